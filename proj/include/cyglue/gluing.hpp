// Neck gluing of a conical Calabi-Yau patch with a scaled asymptotically
// conical space: cutoff, correction forms, the glued pair (omega_t, Omega_t),
// defect scans and the exponent ledger.
#pragma once

#include "cyglue/analysis.hpp"
#include "cyglue/cones.hpp"
#include "cyglue/moser.hpp"
#include "cyglue/su3.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace cyg {

struct ConfigViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// F(s) = f(s-1) / (f(s-1) + f(2-s)), f(x) = exp(-1/x) for x > 0: 0 for s <= 1, 1 for s >= 2.
double cutoff_F(double s);
double cutoff_dF(double s);

double default_alpha(double nu);
// kappa = min((1-alpha)(-3-lambda), alpha(3+nu) - 3); the second term is nu/2 at the default alpha.
double predicted_kappa(double nu, double lambda, double alpha);
// C0 defect exponent gamma = min(-lambda(1-alpha), alpha nu).
double predicted_gamma(double nu, double lambda, double alpha);

struct GluingConfig {
  double t = 0.1;
  double alpha = std::numeric_limits<double>::quiet_NaN();  // NaN: default_alpha(nu)
  double nu = 2.0;
  double lambda = -6.0;
  double eps = 1.0;  // outer neck scale
  double R = 1.0;    // compact core radius of the AC side
  ConeGrid grid{4, 3, 4, 3};
  ConeGrid hessian_grid{3, 2, 3, 3};
  double fd_scale = 1e-3;          // relative step for nabla
  double hessian_fd_scale = 1e-2;  // relative step for nabla^2
  int workers = 1;

  double alpha_value() const;
  double kappa() const { return predicted_kappa(nu, lambda, alpha_value()); }
  double gamma() const { return predicted_gamma(nu, lambda, alpha_value()); }
  // tR < t^alpha < 2 t^alpha < eps, 0 < alpha < 1, nu > 0, lambda < -3.
  void validate() const;
};

// dA = Phi^* Omega0 - Omega_V (radial primitive from zero) and
// dB = Upsilon^* Omega_Y - Omega_V (radial primitive from infinity).
struct CorrectionForms {
  CFormField eta_A, eta_B;
  CFormField A, B;
  double rate_A = 0.0, rate_B = 0.0;
};
CorrectionForms correction_forms(const GluingConfig& cfg, const ConeGeometry& cone, const ACGeometry& ac,
                                 const OrbifoldPatch& conical);

enum class Region { QOnly, Neck, POnly };
const char* region_name(Region r);

class GluedStructure {
 public:
  GluedStructure(GluingConfig cfg, std::shared_ptr<const CorrectionForms> forms, const ConeGeometry& cone);

  const GluingConfig& config() const { return cfg_; }
  double neck_inner() const { return inner_; }  // t^alpha
  double neck_outer() const { return 2.0 * inner_; }
  int deck_order() const { return deck_; }
  Region region(const Vec& x) const;

  // omega_t = omega_V wherever the Darboux-matched charts overlap.
  KForm omega(const Vec& x) const;
  // Omega_V + d[F A + t^3 (1 - F) B(x / t)].
  CForm Omega(const Vec& x) const;
  CForm Omega_Q(const Vec& x) const;  // Phi^* Omega0
  CForm Omega_P(const Vec& x) const;  // Upsilon_t^* (t^3 Omega_Y)

 private:
  GluingConfig cfg_;
  std::shared_ptr<const CorrectionForms> forms_;
  double inner_;
  int deck_;
};

GluedStructure build_glued(const GluingConfig& cfg, const ConeGeometry& cone, const ACGeometry& ac,
                           const OrbifoldPatch& conical);

struct NeckReport {
  NearlyCYReport max_defects;
  int samples = 0;
  bool all_stable = false;
};
// Raises NotStable / NotPositive naming the offending sample.
NeckReport nearly_cy_on_neck(const GluedStructure& glued, const std::vector<Vec>& samples);

// sup over the sample set of |Rm(t^2 g_Y)|, computed in resolved charts of
// the scaled metric; samples are points of Y.
double p_side_curvature(const ACGeometry& ac, double t, const std::vector<Vec>& samples);
std::vector<Vec> default_curvature_samples();
PowerFit curvature_scaling_check(const ACGeometry& ac, const std::vector<double>& t_list,
                                 const std::vector<Vec>& samples = default_curvature_samples());

struct DefectRow {
  double t = 0.0;
  double neck_sup = 0.0;           // sup |Omega_t - Omega_V|_{g_V}
  double omega_c0 = 0.0;           // |omega_t - omega_t'|
  double omega_l2 = 0.0;
  double im_omega_c0 = 0.0;        // |Im Omega_t - Im Omega_t'|
  double im_omega_l2 = 0.0;
  double nabla_c0 = 0.0;           // |nabla(omega_t - omega_t')|
  double nabla_l12 = 0.0;
  double nabla_omega_l12 = 0.0;    // |nabla omega_t|
  double nabla_re_omega_l12 = 0.0; // |nabla Re Omega_t|
  double nabla2_c0 = 0.0;          // |nabla^2 (omega_t - omega_t')|
  double neck_volume = 0.0;
  double curvature_sup = 0.0;

  static constexpr int kColumns = 13;
  static const std::array<const char*, kColumns>& column_names();
  std::array<double, kColumns> values() const;
};

struct DefectScan {
  std::vector<DefectRow> rows;
  std::vector<double> l2_error, l12_error, c0_delta;  // quadrature refinement estimates per row
  std::string csv() const;  // fixed column order, 17 significant digits
  std::vector<double> column(int c) const;
};

DefectScan defect_scan(const GluingConfig& tmpl, const std::vector<double>& t_list, const ConeGeometry& cone,
                       const ACGeometry& ac, const OrbifoldPatch& conical);

using Rational = boost::multiprecision::cpp_rational;

struct ExponentPair {
  Rational p_side;  // lambda term
  Rational q_side;  // nu term
};

// The five inequality families of the hypothesis ledger as exact exponents.
struct LedgerFamily {
  std::string name;
  ExponentPair exponents;
  Rational hypothesis;
  bool holds() const { return exponents.p_side >= hypothesis && exponents.q_side >= hypothesis; }
};
std::vector<LedgerFamily> hypothesis_ledger(const Rational& nu, const Rational& lambda, const Rational& alpha,
                                             const Rational& kappa);
Rational exact_alpha(const Rational& nu);
Rational exact_kappa(const Rational& nu, const Rational& lambda, const Rational& alpha);
// The L2 family implies the other four whenever 0 < alpha <= 1.
bool ledger_implication_holds(const Rational& nu, const Rational& lambda, const Rational& alpha,
                              const Rational& kappa);

struct MeasuredCheck {
  std::string column;
  double measured = 0.0;   // fitted exponent
  double required = 0.0;   // hypothesis exponent
  double predicted = 0.0;  // from the exponent ledger
  bool pass = false;
};

struct Thm52Verdict {
  double alpha = 0.0, kappa = 0.0, gamma = 0.0;
  std::vector<LedgerFamily> families;
  bool symbolic_pass = false;
  std::vector<MeasuredCheck> measured;
  bool measured_pass = false;
  bool pass() const { return symbolic_pass && measured_pass; }
};

constexpr double kExponentTolerance = 0.3;
Thm52Verdict thm52_check(const DefectScan& scan, const GluingConfig& cfg);
Thm52Verdict thm52_predict(const GluingConfig& cfg);

}  // namespace cyg
