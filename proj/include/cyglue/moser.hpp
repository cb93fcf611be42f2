// Radial primitives of closed forms on cones and the Moser flow carrying
// omega_V + eta back to omega_V.
#pragma once

#include "cyglue/analysis.hpp"
#include "cyglue/forms.hpp"

#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cyg {

struct NotClosed : std::domain_error {
  using std::domain_error::domain_error;
};
struct RateOutOfRange : std::domain_error {
  using std::domain_error::domain_error;
};
struct Degenerate : std::domain_error {
  using std::domain_error::domain_error;
};
struct DomainEscape : std::domain_error {
  using std::domain_error::domain_error;
};

// eta = eta0 + eta1 ^ dr in cone-chart coordinates y = (gamma, r), r = y(5).
struct SplitForm {
  KForm eta0;
  KForm eta1;
  double closedness_residual = 0.0;  // max |d eta| coefficient
  double radial_residual = 0.0;      // max |d eta0 / dr + d_Gamma eta1| coefficient
};
SplitForm split_form(const FormField& eta_chart, const Point& y, const FdStep& fd, double tol = 1e-6);

enum class PrimitiveDirection { FromZero, FromInfinity };

// Radial homotopy primitive in ambient coordinates:
//   from zero:     sigma(x) =  int_0^1 u^{k-1} iota_x eta(u x) du
//   from infinity: sigma(x) = -int_0^1 v^{-k-1} iota_x eta(x / v) dv
// (the second is -int_r^inf of the same radial integrand, mapped to a finite
// interval so no truncation radius is needed). Rates: nu > 0 from zero,
// lambda < -k from infinity.
class RadialPrimitive {
 public:
  using CoeffField = std::function<Eigen::VectorXd(const Vec&)>;

  RadialPrimitive(FormField eta, int degree, double rate, PrimitiveDirection dir, double abs_tol = 1e-12);
  RadialPrimitive(CFormField eta, int degree, double rate, PrimitiveDirection dir, double abs_tol = 1e-12);

  KForm operator()(const Vec& x) const;
  CForm complex(const Vec& x) const;

  double decay_rate() const { return rate_; }
  PrimitiveDirection direction() const { return dir_; }
  int degree() const { return degree_; }
  bool is_complex() const { return complex_; }

 private:
  void check_rate() const;
  Eigen::VectorXd integrate(const Vec& x) const;

  CoeffField eta_;
  int degree_;
  double rate_;
  PrimitiveDirection dir_;
  double tol_;
  bool complex_;
};

// X with sigma + iota(X) omega_t = 0. Degenerate when the smallest singular
// value of omega_t is below 1e-6 times the largest.
Vec moser_vector_field(const KForm& sigma, const KForm& omega_t);

struct MoserProblem {
  FormField eta;    // closed 2-form with omega = omega_V + eta
  FormField sigma;  // d sigma = eta
  KForm omega_V = std_c3::omega0();
  double r_min = 0.0;
  double r_max = 1.0;
  // Trajectories leaving chart_r_min < |x| < chart_r_max raise DomainEscape.
  double chart_r_min = 0.0;
  double chart_r_max = std::numeric_limits<double>::infinity();
  bool shrink_toward_zero = true;  // conical (true) or asymptotically conical
  std::vector<Vec> directions;     // unit vectors
  std::vector<double> radial_fractions;
};

struct MoserOptions {
  int steps = 64;
  int max_halvings = 8;
  double fd_scale = 1e-3;
  int workers = 1;
};

struct MoserResult {
  std::vector<Vec> samples;
  std::vector<Vec> images;  // psi_1(samples)
  double pullback_residual = 0.0;  // sup |psi_1^*(omega_V + eta) - omega_V|_{g_V}
  double max_displacement = 0.0;
  std::pair<double, double> shrunk_domain;
  int halvings = 0;
};

// Closed 2-form eta = dA on C^3 with A = amp (r^nu x_a dx_b - r^{nu-2} x_a x_b r dr).
// iota_x A = 0, so the radial primitive from zero returns A itself;
// |A| = O(r^{nu+1}) and |eta| = O(r^nu).
struct GaugePerturbation {
  double nu = 3.0;
  double amplitude = 1e-2;
  int a = 0;
  int b = 3;
  KForm A(const Vec& x) const;
  KForm eta(const Vec& x) const;
};

// psi_1(x) by classical RK4 on t in [0, 1] with X_t = (omega_V + t eta)^{-1} sigma.
Vec moser_flow_point(const MoserProblem& p, const Vec& x, int steps);
MoserResult moser_integrate(const MoserProblem& p, const MoserOptions& opt = {});

}  // namespace cyg
