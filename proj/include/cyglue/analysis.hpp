// Finite-difference geometry on coordinate charts, quadrature on cones, and
// power-law fits.
#pragma once

#include "cyglue/forms.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace cyg {

using Point = Eigen::VectorXd;
using MetricField = std::function<Mat(const Point&)>;
using FormField = std::function<KForm(const Point&)>;
using CFormField = std::function<CForm(const Point&)>;

struct InsufficientData : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Central-difference step; order 2 or 4.
struct FdStep {
  double h = 1e-3;
  int order = 2;
};

// h = scale * max(|x|, floor): relative stepping on cones.
FdStep relative_step(const Point& x, double scale = 1e-3, int order = 2, double floor = 1e-3);

template <class F>
auto partial(const F& f, const Point& x, int i, const FdStep& fd) {
  using T = std::decay_t<decltype(f(x))>;
  Point p = x;
  auto at = [&](double s) -> T {
    p = x;
    p(i) += s * fd.h;
    return f(p);
  };
  if (fd.order == 4) {
    T r = (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) * (1.0 / (12.0 * fd.h));
    return r;
  }
  T r = (at(1) - at(-1)) * (1.0 / (2.0 * fd.h));
  return r;
}

// Dense covariant tensor of rank <= 5, row-major over indices.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int dim, int rank);

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  int size() const { return static_cast<int>(c_.size()); }
  double& operator[](int flat) { return c_(flat); }
  double operator[](int flat) const { return c_(flat); }
  double& operator()(std::initializer_list<int> idx) { return c_(flat(idx)); }
  double operator()(std::initializer_list<int> idx) const { return c_(flat(idx)); }
  Eigen::VectorXd& data() { return c_; }
  const Eigen::VectorXd& data() const { return c_; }
  double max_abs() const { return c_.size() ? c_.cwiseAbs().maxCoeff() : 0.0; }

  Tensor& operator+=(const Tensor& o) { c_ += o.c_; return *this; }
  Tensor& operator-=(const Tensor& o) { c_ -= o.c_; return *this; }
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(double s, Tensor a) { a.c_ *= s; return a; }
  friend Tensor operator*(Tensor a, double s) { a.c_ *= s; return a; }

 private:
  int flat(std::initializer_list<int> idx) const;
  int dim_ = 0, rank_ = 0;
  Eigen::VectorXd c_;
};

// Full antisymmetric component array of a form; rank-2 array of a matrix.
Tensor to_tensor(const KForm& a);
Tensor to_tensor(const Mat& m);

// sqrt(T_{a..} T^{a..}) / sqrt(k!) where the last `form_rank` indices are a
// form part (so forms get the orthonormal-monomial norm).
double tensor_norm(const MetricTensor& g, const Tensor& T, int form_rank = 0);

// Gamma[k](i, j) = Gamma^k_{ij}.
using Christoffel = std::vector<Mat>;
Christoffel christoffel_from(const Mat& g, const std::vector<Mat>& dg);
Christoffel christoffel(const MetricField& g, const Point& x, const FdStep& fd);

// Metric plus covariant tensor fields sampled at one point, so that a single
// stencil yields the derivatives of all of them.
struct TensorBundle {
  Mat g;
  std::vector<Tensor> fields;
};
using BundleField = std::function<TensorBundle(const Point&)>;

// nabla T with the derivative index first:
// (nabla T)_{i a..} = d_i T_{a..} - sum_m Gamma^l_{i a_m} T_{..l..}.
std::vector<Tensor> covariant_derivatives(const BundleField& f, const Point& x, const FdStep& fd);
Tensor covariant_derivative(const std::function<Tensor(const Point&)>& T, const MetricField& g, const Point& x,
                            const FdStep& fd);
// The field x -> (g, nabla T) as a bundle, so nabla^2 = covariant_derivatives(nabla_bundle(f)).
BundleField nabla_bundle(BundleField f, FdStep fd);

// R_{lijk} = g_{lm} R^m_{ijk}, R^l_{ijk} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
// + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}; Ric_{jk} = R^i_{ijk}.
struct Curvature {
  Tensor riemann;
  Mat ricci;
  MetricTensor g;
  double riemann_norm() const { return tensor_norm(g, riemann); }
  double ricci_norm() const { return tensor_norm(g, to_tensor(ricci)); }
  double bianchi_defect() const;
};
Curvature riemann_ricci(const MetricField& g, const Point& x, const FdStep& fd);

KForm exterior_derivative(const FormField& a, const Point& x, const FdStep& fd);
CForm exterior_derivative(const CFormField& a, const Point& x, const FdStep& fd);

// Quadrature.
struct Rule1D {
  std::vector<double> x, w;
};
Rule1D gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Adaptive Gauss-Kronrod (7/15) with bisection; error measured in max norm.
struct AdaptiveResult {
  Eigen::VectorXd value;
  double error = 0.0;
  int evaluations = 0;
};
AdaptiveResult integrate_adaptive(const std::function<Eigen::VectorXd(double)>& f, double a, double b,
                                  double abs_tol = 1e-12, int max_depth = 40);

// Unit sphere S^5 in C^3 through toric coordinates z_j = sqrt(mu_j) e^{i phi_j}:
// collapsed Gauss-Legendre on the simplex, trapezoid on T^3. Weights sum to
// pi^3 / deck_order.
struct SphereRule {
  std::vector<Vec> points;
  std::vector<double> weights;
  double volume() const;
};
SphereRule s5_rule(int n_mu, int n_phi, int deck_order = 1);

struct ConeGrid {
  int n_r = 6;
  int n_mu = 4;
  int n_phi = 6;
  int deck_order = 1;
};

// Nodes x = r u of Gamma x (a, b) with weights for r^5 dr dmu_Gamma.
struct ConeRule {
  std::vector<Vec> points;
  std::vector<double> weights;
};
ConeRule cone_rule(double a, double b, const ConeGrid& grid);

struct NormReport {
  double c0 = 0.0;
  double l2 = 0.0;
  double l12 = 0.0;
  double volume = 0.0;
  ConeGrid grid;
  double l2_error = 0.0;   // |L2(grid) - L2(refined)|
  double l12_error = 0.0;  // |L12(refined) - L12(grid)|
  double c0_delta = 0.0;   // |max(refined) - max(grid)|
};

// The refined grid doubles the radial and simplex node counts; L2 is reported
// on the base grid and L12 on the refined one.
ConeGrid refined(const ConeGrid& g);
NormReport region_norms(const std::function<double(const Vec&)>& f, double a, double b, const ConeGrid& grid,
                        int workers = 1);
// Several pointwise quantities sharing one evaluation per node.
std::vector<NormReport> region_norms_multi(const std::function<std::vector<double>(const Vec&)>& f, int count,
                                           double a, double b, const ConeGrid& grid, int workers = 1);

// Least squares on (log x, log y).
struct PowerFit {
  double exponent = 0.0;
  double log_constant = 0.0;
  double residual = 0.0;  // rms of log residuals
  int points = 0;
};
PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y, int min_points = 4,
                       double min_octaves = 2.0);

// Observed convergence order from errors at steps h and h/2.
inline double observed_order(double e_h, double e_h2) { return std::log2(e_h / e_h2); }

// Worker count: CYGLUE_WORKERS if set, else hardware concurrency.
int default_workers();
// Runs body(i) for i in [0, n); the lowest-index exception is rethrown.
void parallel_for(int n, int workers, const std::function<void(int)>& body);

}  // namespace cyg
