// Pointwise exterior algebra on R^n (n <= 7): k-forms, metrics, linear maps.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace cyg {

constexpr int kMaxDim = 7;
constexpr int kMaxCoeffs = 35;  // C(7,3)

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DegenerateMetric : std::domain_error {
  using std::domain_error::domain_error;
};

// Strictly increasing multi-indices of size k in {0..n-1}, stored as bitmasks
// in lexicographic order.
const std::vector<std::uint8_t>& basis_masks(int n, int k);
int mask_position(int n, std::uint8_t mask);
int binomial(int n, int k);

// Sign of the shuffle placing the indices of I before those of J.
inline int shuffle_sign(std::uint8_t I, std::uint8_t J) {
  int inv = 0;
  for (int j = 0; j < 8; ++j)
    if (J & (1u << j)) inv += __builtin_popcount(I >> (j + 1));
  return (inv & 1) ? -1 : 1;
}

template <typename Scalar>
using SquareMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

using Mat = SquareMatrix<double>;
using Vec = Vector<double>;

template <typename Scalar>
class Form {
 public:
  using Coeffs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxCoeffs, 1>;

  Form() : dim_(0), degree_(0), c_(1) { c_.setZero(); }
  Form(int dim, int degree) : dim_(dim), degree_(degree) {
    if (dim < 1 || dim > kMaxDim || degree < 0)
      throw DimensionMismatch("form degree/dimension out of range");
    c_.setZero(binomial(dim, degree));  // empty when degree > dim
  }

  static Form zero(int dim, int degree) { return Form(dim, degree); }
  static Form scalar(int dim, Scalar s) {
    Form f(dim, 0);
    f.c_(0) = s;
    return f;
  }
  // dx_{i1} ^ ... ^ dx_{ik}; indices in any order (sign applied), repeats give 0.
  static Form monomial(int dim, std::initializer_list<int> idx, Scalar coeff = Scalar(1)) {
    Form f(dim, static_cast<int>(idx.size()));
    std::uint8_t m = 0;
    int sign = 1;
    for (int i : idx) {
      if (i < 0 || i >= dim) throw DimensionMismatch("monomial index out of range");
      if (m & (1u << i)) return f;
      sign *= shuffle_sign(m, std::uint8_t(1u << i));
      m |= std::uint8_t(1u << i);
    }
    f.c_(mask_position(dim, m)) = coeff * Scalar(sign);
    return f;
  }
  static Form volume(int dim) { return monomial_mask(dim, std::uint8_t((1u << dim) - 1)); }
  static Form monomial_mask(int dim, std::uint8_t m, Scalar coeff = Scalar(1)) {
    Form f(dim, __builtin_popcount(m));
    f.c_(mask_position(dim, m)) = coeff;
    return f;
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(c_.size()); }
  std::uint8_t mask(int pos) const { return basis_masks(dim_, degree_)[pos]; }

  Scalar& operator[](int pos) { return c_(pos); }
  const Scalar& operator[](int pos) const { return c_(pos); }
  Coeffs& coeffs() { return c_; }
  const Coeffs& coeffs() const { return c_; }

  // Full-index accessor: sign-adjusted stored value, zero on repeated indices.
  Scalar at(std::initializer_list<int> idx) const {
    if (static_cast<int>(idx.size()) != degree_) throw DimensionMismatch("index count != degree");
    std::uint8_t m = 0;
    int sign = 1;
    for (int i : idx) {
      if (m & (1u << i)) return Scalar(0);
      sign *= shuffle_sign(m, std::uint8_t(1u << i));
      m |= std::uint8_t(1u << i);
    }
    return Scalar(sign) * c_(mask_position(dim_, m));
  }

  Form& operator+=(const Form& o) { check(o); c_ += o.c_; return *this; }
  Form& operator-=(const Form& o) { check(o); c_ -= o.c_; return *this; }
  Form& operator*=(Scalar s) { c_ *= s; return *this; }
  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator*(Scalar s, Form a) { return a *= s; }
  friend Form operator*(Form a, Scalar s) { return a *= s; }
  Form operator-() const { Form r(*this); r.c_ = -c_; return r; }

  Scalar max_abs() const { return c_.size() ? c_.cwiseAbs().maxCoeff() : Scalar(0); }

 private:
  void check(const Form& o) const {
    if (o.dim_ != dim_ || o.degree_ != degree_) throw DimensionMismatch("form shape mismatch");
  }
  int dim_, degree_;
  Coeffs c_;
};

// Complex forms as a pair of real forms.
template <typename Scalar>
struct ComplexForm {
  Form<Scalar> re, im;

  ComplexForm() = default;
  ComplexForm(int dim, int degree) : re(dim, degree), im(dim, degree) {}
  ComplexForm(Form<Scalar> r, Form<Scalar> i) : re(std::move(r)), im(std::move(i)) {
    if (re.dim() != im.dim() || re.degree() != im.degree())
      throw DimensionMismatch("real/imaginary parts differ in shape");
  }
  explicit ComplexForm(Form<Scalar> r) : re(r), im(r.dim(), r.degree()) {}

  int dim() const { return re.dim(); }
  int degree() const { return re.degree(); }
  ComplexForm conj() const { return {re, -im}; }

  ComplexForm& operator+=(const ComplexForm& o) { re += o.re; im += o.im; return *this; }
  ComplexForm& operator-=(const ComplexForm& o) { re -= o.re; im -= o.im; return *this; }
  friend ComplexForm operator+(ComplexForm a, const ComplexForm& b) { return a += b; }
  friend ComplexForm operator-(ComplexForm a, const ComplexForm& b) { return a -= b; }
  friend ComplexForm operator*(std::complex<Scalar> z, const ComplexForm& a) {
    return {z.real() * a.re - z.imag() * a.im, z.real() * a.im + z.imag() * a.re};
  }
  friend ComplexForm operator*(Scalar s, const ComplexForm& a) { return {s * a.re, s * a.im}; }
  friend ComplexForm operator*(const ComplexForm& a, Scalar s) { return {s * a.re, s * a.im}; }
  ComplexForm operator-() const { return {-re, -im}; }
};

using KForm = Form<double>;
using CForm = ComplexForm<double>;

template <typename Scalar>
Form<Scalar> wedge(const Form<Scalar>& a, const Form<Scalar>& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("wedge: dimension mismatch");
  const int n = a.dim();
  Form<Scalar> out(n, a.degree() + b.degree());
  if (a.degree() + b.degree() > n) return out;
  const auto& ma = basis_masks(n, a.degree());
  const auto& mb = basis_masks(n, b.degree());
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] == Scalar(0)) continue;
    for (int j = 0; j < b.size(); ++j) {
      if (ma[i] & mb[j]) continue;
      out[mask_position(n, ma[i] | mb[j])] += Scalar(shuffle_sign(ma[i], mb[j])) * a[i] * b[j];
    }
  }
  return out;
}

template <typename Scalar>
ComplexForm<Scalar> wedge(const ComplexForm<Scalar>& a, const ComplexForm<Scalar>& b) {
  return {wedge(a.re, b.re) - wedge(a.im, b.im), wedge(a.re, b.im) + wedge(a.im, b.re)};
}
template <typename Scalar>
ComplexForm<Scalar> wedge(const Form<Scalar>& a, const ComplexForm<Scalar>& b) {
  return {wedge(a, b.re), wedge(a, b.im)};
}
template <typename Scalar>
ComplexForm<Scalar> wedge(const ComplexForm<Scalar>& a, const Form<Scalar>& b) {
  return {wedge(a.re, b), wedge(a.im, b)};
}

// Interior product iota(v) a, inserting v in the first slot.
template <typename Scalar, typename Derived>
Form<Scalar> contract(const Eigen::MatrixBase<Derived>& v, const Form<Scalar>& a) {
  if (a.degree() < 1) throw std::invalid_argument("contract: degree-0 form");
  if (v.size() != a.dim()) throw DimensionMismatch("contract: dimension mismatch");
  const int n = a.dim();
  Form<Scalar> out(n, a.degree() - 1);
  const auto& m = basis_masks(n, a.degree());
  for (int p = 0; p < a.size(); ++p) {
    if (a[p] == Scalar(0)) continue;
    int before = 0;
    for (int i = 0; i < n; ++i) {
      if (!(m[p] & (1u << i))) continue;
      const Scalar s = (before & 1) ? Scalar(-1) : Scalar(1);
      out[mask_position(n, std::uint8_t(m[p] & ~(1u << i)))] += s * Scalar(v(i)) * a[p];
      ++before;
    }
  }
  return out;
}
template <typename Scalar, typename Derived>
ComplexForm<Scalar> contract(const Eigen::MatrixBase<Derived>& v, const ComplexForm<Scalar>& a) {
  return {contract(v, a.re), contract(v, a.im)};
}

// k-th compound matrix: entry (I,J) = det(M[I,J]).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> compound(const SquareMatrix<Scalar>& M, int k) {
  const int n = static_cast<int>(M.rows());
  const auto& masks = basis_masks(n, k);
  const int N = static_cast<int>(masks.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> C(N, N);
  if (k == 0) { C(0, 0) = Scalar(1); return C; }
  std::vector<std::array<int, kMaxDim>> idx(N);
  for (int p = 0; p < N; ++p) {
    int c = 0;
    for (int i = 0; i < n; ++i)
      if (masks[p] & (1u << i)) idx[p][c++] = i;
  }
  if (k <= 3) {
    // Closed-form minors.
    for (int I = 0; I < N; ++I)
      for (int J = 0; J < N; ++J) {
        const auto& r = idx[I];
        const auto& c = idx[J];
        auto m = [&](int a, int b) { return M(r[a], c[b]); };
        if (k == 1) {
          C(I, J) = m(0, 0);
        } else if (k == 2) {
          C(I, J) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        } else {
          C(I, J) = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                    m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                    m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
        }
      }
    return C;
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim> sub(k, k);
  for (int I = 0; I < N; ++I)
    for (int J = 0; J < N; ++J) {
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) sub(a, b) = M(idx[I][a], idx[J][b]);
      C(I, J) = sub.determinant();
    }
  return C;
}

template <typename Scalar>
class Metric {
 public:
  Metric() = default;
  explicit Metric(const SquareMatrix<Scalar>& g) : g_(g) {
    if (g.rows() != g.cols() || g.rows() < 1 || g.rows() > kMaxDim)
      throw DimensionMismatch("metric must be square of size <= 7");
    g_ = Scalar(0.5) * (g + g.transpose());
    Eigen::SelfAdjointEigenSolver<SquareMatrix<Scalar>> es(g_);
    valid_ = es.eigenvalues().minCoeff() > Scalar(0);
    if (valid_) {
      ginv_ = g_.inverse();
      sqrt_det_ = std::sqrt(g_.determinant());
    }
  }
  static Metric euclidean(int n) { return Metric(SquareMatrix<Scalar>::Identity(n, n)); }

  int dim() const { return static_cast<int>(g_.rows()); }
  bool valid() const { return valid_; }
  const SquareMatrix<Scalar>& matrix() const { return g_; }
  const SquareMatrix<Scalar>& inverse() const { require(); return ginv_; }
  Scalar sqrt_det() const { require(); return sqrt_det_; }
  Form<Scalar> volume_form() const { require(); return sqrt_det_ * Form<Scalar>::volume(dim()); }
  void require() const {
    if (!valid_) throw DegenerateMetric("metric is not positive definite");
  }

 private:
  SquareMatrix<Scalar> g_, ginv_;
  Scalar sqrt_det_ = Scalar(0);
  bool valid_ = false;
};

using MetricTensor = Metric<double>;

enum class MapRole { Generic, ComplexStructure, ChartDifferential };

template <typename Scalar>
struct LinearMapT {
  SquareMatrix<Scalar> m;
  MapRole role = MapRole::Generic;
  int dim() const { return static_cast<int>(m.rows()); }
  Scalar complex_structure_defect() const {
    const int n = dim();
    return (m * m + SquareMatrix<Scalar>::Identity(n, n)).cwiseAbs().maxCoeff();
  }
};
using LinearMap = LinearMapT<double>;

// Pullback L^* a, where (L^* a)(v1..vk) = a(L v1, .., L vk).
template <typename Scalar>
Form<Scalar> pullback(const SquareMatrix<Scalar>& L, const Form<Scalar>& a) {
  if (L.rows() != a.dim() || L.cols() != a.dim()) throw DimensionMismatch("pullback: dimension mismatch");
  Form<Scalar> out(a.dim(), a.degree());
  out.coeffs() = compound<Scalar>(L, a.degree()).transpose() * a.coeffs();
  return out;
}
template <typename Scalar>
ComplexForm<Scalar> pullback(const SquareMatrix<Scalar>& L, const ComplexForm<Scalar>& a) {
  return {pullback(L, a.re), pullback(L, a.im)};
}
template <typename Scalar>
Form<Scalar> pullback(const LinearMapT<Scalar>& L, const Form<Scalar>& a) { return pullback(L.m, a); }
template <typename Scalar>
ComplexForm<Scalar> pullback(const LinearMapT<Scalar>& L, const ComplexForm<Scalar>& a) { return pullback(L.m, a); }

// Components of a with all indices raised by g, in the increasing basis.
template <typename Scalar>
typename Form<Scalar>::Coeffs raise(const Metric<Scalar>& g, const Form<Scalar>& a) {
  return compound<Scalar>(g.inverse(), a.degree()) * a.coeffs();
}

template <typename Scalar>
Form<Scalar> hodge_star(const Metric<Scalar>& g, const Form<Scalar>& a) {
  g.require();
  if (g.dim() != a.dim()) throw DimensionMismatch("hodge_star: dimension mismatch");
  const int n = a.dim();
  const std::uint8_t full = std::uint8_t((1u << n) - 1);
  const auto up = raise(g, a);
  Form<Scalar> out(n, n - a.degree());
  for (int p = 0; p < a.size(); ++p) {
    const std::uint8_t I = a.mask(p), Ic = std::uint8_t(full & ~I);
    out[mask_position(n, Ic)] += Scalar(shuffle_sign(I, Ic)) * g.sqrt_det() * up(p);
  }
  return out;
}
template <typename Scalar>
ComplexForm<Scalar> hodge_star(const Metric<Scalar>& g, const ComplexForm<Scalar>& a) {
  return {hodge_star(g, a.re), hodge_star(g, a.im)};
}

template <typename Scalar>
Scalar form_norm2(const Metric<Scalar>& g, const Form<Scalar>& a) {
  g.require();
  if (g.dim() != a.dim()) throw DimensionMismatch("form_norm: dimension mismatch");
  return a.coeffs().dot(raise(g, a));
}
template <typename Scalar>
Scalar form_norm(const Metric<Scalar>& g, const Form<Scalar>& a) {
  using std::sqrt;
  return sqrt(std::max(Scalar(0), form_norm2(g, a)));
}
template <typename Scalar>
Scalar form_norm(const Metric<Scalar>& g, const ComplexForm<Scalar>& a) {
  using std::sqrt;
  return sqrt(std::max(Scalar(0), form_norm2(g, a.re) + form_norm2(g, a.im)));
}

// 2-forms <-> antisymmetric matrices W(a,b) = w(e_a, e_b).
template <typename Scalar>
SquareMatrix<Scalar> to_matrix(const Form<Scalar>& w) {
  if (w.degree() != 2) throw DimensionMismatch("to_matrix: expected a 2-form");
  const int n = w.dim();
  SquareMatrix<Scalar> W = SquareMatrix<Scalar>::Zero(n, n);
  for (int p = 0; p < w.size(); ++p) {
    const std::uint8_t m = w.mask(p);
    int i = __builtin_ctz(m), j = 31 - __builtin_clz(m);
    W(i, j) = w[p];
    W(j, i) = -w[p];
  }
  return W;
}
template <typename Scalar>
Form<Scalar> from_matrix(const SquareMatrix<Scalar>& W) {
  const int n = static_cast<int>(W.rows());
  Form<Scalar> w(n, 2);
  for (int p = 0; p < w.size(); ++p) {
    const std::uint8_t m = w.mask(p);
    int i = __builtin_ctz(m), j = 31 - __builtin_clz(m);
    w[p] = Scalar(0.5) * (W(i, j) - W(j, i));
  }
  return w;
}

// Embeds a form on R^n into R^{n+1} = <e_0> + R^n (indices shifted by one).
template <typename Scalar>
Form<Scalar> lift(const Form<Scalar>& a) {
  const int n = a.dim();
  Form<Scalar> out(n + 1, a.degree());
  for (int p = 0; p < a.size(); ++p) out[mask_position(n + 1, std::uint8_t(a.mask(p) << 1))] = a[p];
  return out;
}
// Restriction of a form on R^{n+1} to the hyperplane spanned by e_1..e_n.
template <typename Scalar>
Form<Scalar> restrict_hyperplane(const Form<Scalar>& a) {
  const int n = a.dim() - 1;
  Form<Scalar> out(n, a.degree());
  for (int p = 0; p < a.size(); ++p)
    if (!(a.mask(p) & 1u)) out[mask_position(n, std::uint8_t(a.mask(p) >> 1))] = a[p];
  return out;
}

// Norms of symmetric 2-tensors: |h|_g for covariant h, |k|_g for contravariant k.
double covariant_tensor_norm(const MetricTensor& g, const Mat& h);
double contravariant_tensor_norm(const MetricTensor& g, const Mat& k);

// Standard structures on C^3 = R^6 with real coordinates (x1,y1,x2,y2,x3,y3).
namespace std_c3 {
KForm omega0();
CForm Omega0();
Mat J0();  // J0 d/dx_j = d/dy_j
CForm dz(int j);
CForm dzbar(int j);
}  // namespace std_c3

}  // namespace cyg
