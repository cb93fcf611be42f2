#include "cyglue/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <thread>

namespace cyg {

namespace {

int ipow(int n, int k) {
  int r = 1;
  for (int i = 0; i < k; ++i) r *= n;
  return r;
}

struct Stencil {
  std::vector<double> offsets, weights;  // derivative = sum w_j f(x + o_j h) / h
};

Stencil stencil(int order) {
  if (order == 4) return {{1, -1, 2, -2}, {8.0 / 12, -8.0 / 12, -1.0 / 12, 1.0 / 12}};
  if (order == 2) return {{1, -1}, {0.5, -0.5}};
  throw std::invalid_argument("finite-difference order must be 2 or 4");
}

// out[.. c ..] = sum_a M(a, c) T[.. a ..] along one axis.
Tensor apply_axis(const Tensor& T, const Mat& M, int axis) {
  const int n = T.dim(), stride = ipow(n, T.rank() - 1 - axis);
  Tensor out(n, T.rank());
  for (int f = 0; f < T.size(); ++f) {
    const int c = (f / stride) % n, base = f - c * stride;
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += M(a, c) * T[base + a * stride];
    out[f] = s;
  }
  return out;
}

int factorial(int k) { return k <= 1 ? 1 : k * factorial(k - 1); }

}  // namespace

FdStep relative_step(const Point& x, double scale, int order, double floor) {
  return {scale * std::max(x.norm(), floor), order};
}

Tensor::Tensor(int dim, int rank) : dim_(dim), rank_(rank), c_(Eigen::VectorXd::Zero(ipow(dim, rank))) {}

int Tensor::flat(std::initializer_list<int> idx) const {
  if (static_cast<int>(idx.size()) != rank_) throw DimensionMismatch("tensor index count != rank");
  int f = 0;
  for (int i : idx) f = f * dim_ + i;
  return f;
}

Tensor to_tensor(const KForm& a) {
  const int n = a.dim(), k = a.degree();
  Tensor T(n, k);
  for (int p = 0; p < a.size(); ++p) {
    if (a[p] == 0.0) continue;
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (a.mask(p) & (1u << i)) idx.push_back(i);
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      int inv = 0, f = 0;
      for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) inv += perm[i] > perm[j];
      for (int i = 0; i < k; ++i) f = f * n + idx[perm[i]];
      T[f] = (inv & 1) ? -a[p] : a[p];
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return T;
}

Tensor to_tensor(const Mat& m) {
  const int n = static_cast<int>(m.rows());
  Tensor T(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) T[i * n + j] = m(i, j);
  return T;
}

double tensor_norm(const MetricTensor& g, const Tensor& T, int form_rank) {
  if (g.dim() != T.dim()) throw DimensionMismatch("tensor_norm: dimension mismatch");
  // g^{-1} = L L^T; contracting every index with L gives an orthonormal frame.
  const Mat L = Eigen::LLT<Mat>(g.inverse()).matrixL();
  Tensor u = T;
  for (int ax = 0; ax < T.rank(); ++ax) u = apply_axis(u, L, ax);
  return u.data().norm() / std::sqrt(double(factorial(form_rank)));
}

Christoffel christoffel_from(const Mat& g, const std::vector<Mat>& dg) {
  const int n = static_cast<int>(g.rows());
  const Mat ginv = MetricTensor(g).inverse();
  Christoffel G(n, Mat::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Vec low(n);
      for (int l = 0; l < n; ++l) low(l) = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
      const Vec up = ginv * low;
      for (int k = 0; k < n; ++k) G[k](i, j) = G[k](j, i) = up(k);
    }
  return G;
}

Christoffel christoffel(const MetricField& g, const Point& x, const FdStep& fd) {
  const int n = static_cast<int>(x.size());
  std::vector<Mat> dg(n);
  for (int i = 0; i < n; ++i) dg[i] = partial(g, x, i, fd);
  return christoffel_from(g(x), dg);
}

namespace {

Tensor nabla_from(const Tensor& T, const Tensor* dT_dirs, const Christoffel& G) {
  const int n = T.dim(), p = T.rank();
  Tensor out(n, p + 1);
  const int block = T.size();
  std::vector<int> digits(p);
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < block; ++f) {
      double s = dT_dirs[i][f];
      int rem = f;
      for (int m = p - 1; m >= 0; --m) {
        digits[m] = rem % n;
        rem /= n;
      }
      for (int m = 0; m < p; ++m) {
        const int stride = ipow(n, p - 1 - m), base = f - digits[m] * stride;
        for (int l = 0; l < n; ++l) s -= G[l](i, digits[m]) * T[base + l * stride];
      }
      out[i * block + f] = s;
    }
  }
  return out;
}

// Center bundle and its nabla fields.
std::pair<TensorBundle, std::vector<Tensor>> nabla_with_center(const BundleField& f, const Point& x,
                                                               const FdStep& fd) {
  const int n = static_cast<int>(x.size());
  const Stencil st = stencil(fd.order);
  TensorBundle c = f(x);
  const int nf = static_cast<int>(c.fields.size());
  std::vector<Mat> dg(n, Mat::Zero(n, n));
  std::vector<std::vector<Tensor>> dT(nf, std::vector<Tensor>(n));
  for (int k = 0; k < nf; ++k)
    for (int i = 0; i < n; ++i) dT[k][i] = Tensor(c.fields[k].dim(), c.fields[k].rank());
  Point p = x;
  for (int i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < st.offsets.size(); ++s) {
      p = x;
      p(i) += st.offsets[s] * fd.h;
      const TensorBundle b = f(p);
      const double w = st.weights[s] / fd.h;
      dg[i] += w * b.g;
      for (int k = 0; k < nf; ++k) dT[k][i].data() += w * b.fields[k].data();
    }
  }
  const Christoffel G = christoffel_from(c.g, dg);
  std::vector<Tensor> out(nf);
  for (int k = 0; k < nf; ++k) out[k] = nabla_from(c.fields[k], dT[k].data(), G);
  return {std::move(c), std::move(out)};
}

}  // namespace

std::vector<Tensor> covariant_derivatives(const BundleField& f, const Point& x, const FdStep& fd) {
  return nabla_with_center(f, x, fd).second;
}

Tensor covariant_derivative(const std::function<Tensor(const Point&)>& T, const MetricField& g, const Point& x,
                            const FdStep& fd) {
  BundleField f = [&](const Point& y) { return TensorBundle{g(y), {T(y)}}; };
  return covariant_derivatives(f, x, fd)[0];
}

BundleField nabla_bundle(BundleField f, FdStep fd) {
  return [f = std::move(f), fd](const Point& y) {
    auto [c, d] = nabla_with_center(f, y, fd);
    return TensorBundle{c.g, std::move(d)};
  };
}

double Curvature::bianchi_defect() const {
  const int n = riemann.dim();
  double worst = 0.0;
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          worst = std::max(worst, std::abs(riemann({l, i, j, k}) + riemann({l, j, k, i}) + riemann({l, k, i, j})));
  return worst;
}

Curvature riemann_ricci(const MetricField& g, const Point& x, const FdStep& fd) {
  const int n = static_cast<int>(x.size());
  const Stencil st = stencil(fd.order);
  const Mat g0 = g(x);
  const Christoffel G = christoffel(g, x, fd);
  std::vector<Christoffel> dG(n, Christoffel(n, Mat::Zero(n, n)));  // dG[i][l](j,k) = d_i Gamma^l_{jk}
  Point p = x;
  for (int i = 0; i < n; ++i)
    for (std::size_t s = 0; s < st.offsets.size(); ++s) {
      p = x;
      p(i) += st.offsets[s] * fd.h;
      const Christoffel Gs = christoffel(g, p, fd);
      for (int l = 0; l < n; ++l) dG[i][l] += (st.weights[s] / fd.h) * Gs[l];
    }
  Tensor up(n, 4);  // R^l_{ijk}
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double s = dG[i][l](j, k) - dG[j][l](i, k);
          for (int m = 0; m < n; ++m) s += G[l](i, m) * G[m](j, k) - G[l](j, m) * G[m](i, k);
          up({l, i, j, k}) = s;
        }
  Curvature c{Tensor(n, 4), Mat::Zero(n, n), MetricTensor(g0)};
  c.g.require();
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double s = 0.0;
          for (int m = 0; m < n; ++m) s += g0(l, m) * up({m, i, j, k});
          c.riemann({l, i, j, k}) = s;
        }
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += up({i, i, j, k});
      c.ricci(j, k) = s;
    }
  return c;
}

KForm exterior_derivative(const FormField& a, const Point& x, const FdStep& fd) {
  const int n = static_cast<int>(x.size());
  const KForm a0 = a(x);
  KForm out(n, a0.degree() + 1);
  for (int i = 0; i < n; ++i) out += wedge(KForm::monomial(n, {i}), partial(a, x, i, fd));
  return out;
}

CForm exterior_derivative(const CFormField& a, const Point& x, const FdStep& fd) {
  const int n = static_cast<int>(x.size());
  const CForm a0 = a(x);
  CForm out(n, a0.degree() + 1);
  for (int i = 0; i < n; ++i) out += wedge(KForm::monomial(n, {i}), partial(a, x, i, fd));
  return out;
}

Rule1D gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
  // Golub-Welsch: nodes are eigenvalues of the Jacobi matrix.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) T(k, k - 1) = T(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  Rule1D r;
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    const double v = es.eigenvectors()(0, i);
    r.x.push_back(mid + half * es.eigenvalues()(i));
    r.w.push_back(half * 2.0 * v * v);
  }
  return r;
}

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the center.
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

void gk_refine(const std::function<Eigen::VectorXd(double)>& f, double a, double b, double tol, int depth,
               AdaptiveResult& acc) {
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  const Eigen::VectorXd fc = f(mid);
  Eigen::VectorXd k = kWgk[7] * fc, g = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const Eigen::VectorXd s = f(mid - half * kXgk[j]) + f(mid + half * kXgk[j]);
    k += kWgk[j] * s;
    if (j % 2 == 1) g += kWg[j / 2] * s;
  }
  acc.evaluations += 15;
  k *= half;
  g *= half;
  const double err = (k - g).cwiseAbs().maxCoeff();
  if (err <= tol || depth <= 0) {
    if (acc.value.size() == 0) acc.value = Eigen::VectorXd::Zero(k.size());
    acc.value += k;
    acc.error += err;
    return;
  }
  gk_refine(f, a, mid, 0.5 * tol, depth - 1, acc);
  gk_refine(f, mid, b, 0.5 * tol, depth - 1, acc);
}

}  // namespace

AdaptiveResult integrate_adaptive(const std::function<Eigen::VectorXd(double)>& f, double a, double b,
                                  double abs_tol, int max_depth) {
  AdaptiveResult r;
  gk_refine(f, a, b, abs_tol, max_depth, r);
  return r;
}

double SphereRule::volume() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

SphereRule s5_rule(int n_mu, int n_phi, int deck_order) {
  // dvol(S^5) = (1/4) dmu1 dmu2 dphi1 dphi2 dphi3 on the simplex x T^3.
  const Rule1D u = gauss_legendre(n_mu, 0.0, 1.0);
  const double dphi = 2.0 * M_PI / n_phi;
  SphereRule s;
  for (int a = 0; a < n_mu; ++a)
    for (int b = 0; b < n_mu; ++b) {
      const double m1 = u.x[a], m2 = (1.0 - u.x[a]) * u.x[b], m3 = (1.0 - u.x[a]) * (1.0 - u.x[b]);
      const double wmu = 0.25 * u.w[a] * u.w[b] * (1.0 - u.x[a]);
      const double rad[3] = {std::sqrt(m1), std::sqrt(m2), std::sqrt(m3)};
      for (int i = 0; i < n_phi; ++i)
        for (int j = 0; j < n_phi; ++j)
          for (int k = 0; k < n_phi; ++k) {
            const double ph[3] = {(i + 0.5) * dphi, (j + 0.5) * dphi, (k + 0.5) * dphi};
            Vec p(6);
            for (int c = 0; c < 3; ++c) {
              p(2 * c) = rad[c] * std::cos(ph[c]);
              p(2 * c + 1) = rad[c] * std::sin(ph[c]);
            }
            s.points.push_back(p);
            s.weights.push_back(wmu * dphi * dphi * dphi / deck_order);
          }
    }
  return s;
}

ConeRule cone_rule(double a, double b, const ConeGrid& grid) {
  const Rule1D rr = gauss_legendre(grid.n_r, a, b);
  const SphereRule sph = s5_rule(grid.n_mu, grid.n_phi, grid.deck_order);
  ConeRule c;
  for (int i = 0; i < grid.n_r; ++i) {
    const double r = rr.x[i], wr = rr.w[i] * std::pow(r, 5);
    for (std::size_t j = 0; j < sph.points.size(); ++j) {
      c.points.push_back(r * sph.points[j]);
      c.weights.push_back(wr * sph.weights[j]);
    }
  }
  return c;
}

ConeGrid refined(const ConeGrid& g) { return {2 * g.n_r, 2 * g.n_mu, g.n_phi, g.deck_order}; }

namespace {

struct Sums {
  double max = 0.0, p2 = 0.0, p12 = 0.0, vol = 0.0;
};

std::vector<Sums> accumulate(const std::function<std::vector<double>(const Vec&)>& f, int count,
                             const ConeRule& rule, int workers) {
  const int n = static_cast<int>(rule.points.size());
  std::vector<std::vector<double>> vals(n);
  parallel_for(n, workers, [&](int i) {
    vals[i] = f(rule.points[i]);
    if (static_cast<int>(vals[i].size()) != count) throw DimensionMismatch("region_norms: value count");
  });
  std::vector<Sums> s(count);
  for (int q = 0; q < count; ++q) {
    for (int i = 0; i < n; ++i) s[q].max = std::max(s[q].max, std::abs(vals[i][q]));
    const double M = s[q].max > 0.0 ? s[q].max : 1.0;
    for (int i = 0; i < n; ++i) {
      const double v = std::abs(vals[i][q]), w = rule.weights[i];
      s[q].p2 += w * v * v;
      s[q].p12 += w * std::pow(v / M, 12);
      s[q].vol += w;
    }
    s[q].p12 = M * std::pow(s[q].p12, 1.0 / 12.0);
    s[q].p2 = std::sqrt(s[q].p2);
  }
  return s;
}

}  // namespace

std::vector<NormReport> region_norms_multi(const std::function<std::vector<double>(const Vec&)>& f, int count,
                                           double a, double b, const ConeGrid& grid, int workers) {
  const auto base = accumulate(f, count, cone_rule(a, b, grid), workers);
  const auto fine = accumulate(f, count, cone_rule(a, b, refined(grid)), workers);
  std::vector<NormReport> out(count);
  for (int q = 0; q < count; ++q) {
    NormReport& r = out[q];
    r.grid = grid;
    r.c0 = std::max(base[q].max, fine[q].max);
    r.c0_delta = std::abs(fine[q].max - base[q].max);
    r.l2 = base[q].p2;
    r.l2_error = std::abs(fine[q].p2 - base[q].p2);
    r.l12 = fine[q].p12;
    r.l12_error = std::abs(fine[q].p12 - base[q].p12);
    r.volume = base[q].vol;
  }
  return out;
}

NormReport region_norms(const std::function<double(const Vec&)>& f, double a, double b, const ConeGrid& grid,
                        int workers) {
  return region_norms_multi([&](const Vec& x) { return std::vector<double>{f(x)}; }, 1, a, b, grid, workers)[0];
}

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y, int min_points,
                       double min_octaves) {
  if (x.size() != y.size()) throw InsufficientData("fit_power_law: size mismatch");
  const int n = static_cast<int>(x.size());
  if (n < min_points) throw InsufficientData("fit_power_law: too few points");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (!(*lo > 0.0) || std::log2(*hi / *lo) < min_octaves - 1e-9)
    throw InsufficientData("fit_power_law: abscissae span fewer octaves than required");
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    if (!(y[i] > 0.0)) throw InsufficientData("fit_power_law: non-positive ordinate");
    A(i, 0) = std::log(x[i]);
    A(i, 1) = 1.0;
    b(i) = std::log(y[i]);
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  PowerFit f;
  f.exponent = c(0);
  f.log_constant = c(1);
  f.residual = std::sqrt((A * c - b).squaredNorm() / n);
  f.points = n;
  return f;
}

int default_workers() {
  if (const char* env = std::getenv("CYGLUE_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto run = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(workers, n); ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace cyg
