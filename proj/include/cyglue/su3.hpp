// SU(3)-structure recovery from a nearly Calabi-Yau pair (omega, Omega) at a point.
#pragma once

#include "cyglue/forms.hpp"

#include <stdexcept>

namespace cyg {

struct NotStable : std::domain_error {
  using std::domain_error::domain_error;
};
struct NotPositive : std::domain_error {
  using std::domain_error::domain_error;
};

struct SU3Structure {
  LinearMap J_prime;
  KForm theta2_prime;
  KForm omega11;
  double f = 1.0;
  KForm omega_prime;
  MetricTensor g_M;
};

struct NearlyCYReport {
  double defect_theta2 = 0.0;         // |theta2 - theta2'|_{g_M}
  double defect_omega20 = 0.0;        // |omega^{(2,0)}|_{g_M}
  double defect_normalization = 0.0;  // |omega^3 - 3/2 theta1 ^ theta2|_{g_M}
  double f_deviation = 0.0;           // |f - 1|
  bool stable = false;
  bool within_eps0 = false;  // all three defects below eps0
};

// Quartic invariant lambda = tr(K^2)/6 of a 3-form on R^6; negative iff the
// stabilizer is SL(3,C).
double stable_invariant(const KForm& theta1);
// K(v) = A(iota_v theta1 ^ theta1) with A : Lambda^5 -> R^6 (x) Lambda^6.
Mat stable_endomorphism(const KForm& theta1);

// J' = -K/sqrt(-lambda): the sign makes Re(Omega0) map to the standard J0
// (J0 d/dx = d/dy) in the orientation dx1^dy1^dx2^dy2^dx3^dy3.
LinearMap acs_from_theta1(const KForm& theta1);

// theta2'(u,v,w) = theta1(J^{-1}u, v, w), so theta1 + i theta2' is (3,0) for J.
KForm theta2_prime(const LinearMap& J, const KForm& theta1);

// (omega^{(1,1)}, omega^{(2,0)+(0,2)}) with omega^{(1,1)}(u,v) = (omega(u,v) + omega(Ju,Jv))/2.
std::pair<KForm, KForm> omega_11(const KForm& omega, const LinearMap& J);

// Symmetric form w(., J .) as a matrix.
Mat hermitian_form(const KForm& w, const LinearMap& J);

std::pair<SU3Structure, NearlyCYReport> recover_su3(const KForm& omega, const CForm& Omega,
                                                    double eps0 = 0.2);

struct Prop32Comparison {
  double metric_deviation = 0.0;          // |g~ - g_M|_{g~}
  double inverse_metric_deviation = 0.0;  // |g~^{-1} - g_M^{-1}|_{g~}
  double eps = 0.0;                       // max(|w~ - w|_{g~}, |W~ - W|_{g~})
  double ratio = 0.0;                     // max deviation / eps (the reported C)
};

struct CYPoint {
  KForm omega;
  CForm Omega;
  MetricTensor g;
};

CYPoint standard_cy_point();
Prop32Comparison check_prop32(const KForm& omega, const CForm& Omega, const CYPoint& reference);

}  // namespace cyg
