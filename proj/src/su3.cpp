#include "cyglue/su3.hpp"

#include <cmath>

namespace cyg {

Mat stable_endomorphism(const KForm& theta1) {
  if (theta1.dim() != 6 || theta1.degree() != 3) throw DimensionMismatch("expected a 3-form on R^6");
  Mat K(6, 6);
  for (int b = 0; b < 6; ++b) {
    const KForm five = wedge(contract(Vec::Unit(6, b), theta1), theta1);
    // iota(e_a) vol = (-1)^a dx_{complement of a}
    for (int a = 0; a < 6; ++a) {
      const std::uint8_t comp = std::uint8_t(0x3F & ~(1u << a));
      K(a, b) = ((a & 1) ? -1.0 : 1.0) * five[mask_position(6, comp)];
    }
  }
  return K;
}

double stable_invariant(const KForm& theta1) {
  const Mat K = stable_endomorphism(theta1);
  return (K * K).trace() / 6.0;
}

LinearMap acs_from_theta1(const KForm& theta1) {
  const Mat K = stable_endomorphism(theta1);
  const double lambda = (K * K).trace() / 6.0;
  if (!(lambda < 0.0)) throw NotStable("theta1 is not stable of complex type (lambda >= 0)");
  return {-K / std::sqrt(-lambda), MapRole::ComplexStructure};
}

KForm theta2_prime(const LinearMap& J, const KForm& theta1) {
  const Mat Jinv = -J.m;
  KForm out(theta1.dim(), 3);
  const auto& masks = basis_masks(theta1.dim(), 3);
  for (int p = 0; p < out.size(); ++p) {
    int idx[3], c = 0;
    for (int i = 0; i < theta1.dim(); ++i)
      if (masks[p] & (1u << i)) idx[c++] = i;
    // Increasing index triples only; totally antisymmetric when theta1 is of
    // type (3,0)+(0,3) for J.
    double s = 0.0;
    for (int d = 0; d < theta1.dim(); ++d) s += Jinv(d, idx[0]) * theta1.at({d, idx[1], idx[2]});
    out[p] = s;
  }
  return out;
}

std::pair<KForm, KForm> omega_11(const KForm& omega, const LinearMap& J) {
  const Mat W = to_matrix(omega);
  const Mat W11 = 0.5 * (W + J.m.transpose() * W * J.m);
  KForm w11 = from_matrix<double>(W11);
  return {w11, omega - w11};
}

Mat hermitian_form(const KForm& w, const LinearMap& J) {
  const Mat H = to_matrix(w) * J.m;
  return 0.5 * (H + H.transpose());
}

namespace {

double top_coeff(const KForm& top) { return top[0]; }

}  // namespace

std::pair<SU3Structure, NearlyCYReport> recover_su3(const KForm& omega, const CForm& Omega, double eps0) {
  SU3Structure s;
  NearlyCYReport rep;
  const KForm& theta1 = Omega.re;
  s.J_prime = acs_from_theta1(theta1);
  auto [w11, w20] = omega_11(omega, s.J_prime);

  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_form(w11, s.J_prime));
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  constexpr double kTol = 1e-12;
  if (lo <= kTol) {
    // omega^{(1,1)} is the same for -J'; a negative-definite Hermitian form
    // selects the opposite orientation of J'.
    if (hi < -kTol) {
      s.J_prime.m = -s.J_prime.m;
    } else {
      throw NotPositive("omega^(1,1) is not positive for J'");
    }
  }
  s.omega11 = w11;
  s.theta2_prime = theta2_prime(s.J_prime, theta1);

  const double w3 = top_coeff(wedge(wedge(w11, w11), w11));
  const double t12 = 1.5 * top_coeff(wedge(theta1, s.theta2_prime));
  s.f = w3 / t12;
  if (!(s.f > 0.0)) throw NotPositive("normalization function f is not positive");
  s.omega_prime = std::cbrt(1.0 / s.f) * w11;
  s.g_M = MetricTensor(hermitian_form(s.omega_prime, s.J_prime));
  if (!s.g_M.valid()) throw NotPositive("recovered metric is not positive definite");

  rep.stable = true;
  rep.defect_theta2 = form_norm(s.g_M, Omega.im - s.theta2_prime);
  rep.defect_omega20 = form_norm(s.g_M, w20);
  rep.defect_normalization =
      form_norm(s.g_M, wedge(wedge(omega, omega), omega) - 1.5 * wedge(theta1, Omega.im));
  rep.f_deviation = std::abs(s.f - 1.0);
  rep.within_eps0 = rep.defect_theta2 < eps0 && rep.defect_omega20 < eps0 && rep.defect_normalization < eps0;
  return {s, rep};
}

CYPoint standard_cy_point() { return {std_c3::omega0(), std_c3::Omega0(), MetricTensor::euclidean(6)}; }

Prop32Comparison check_prop32(const KForm& omega, const CForm& Omega, const CYPoint& ref) {
  Prop32Comparison c;
  const auto [s, rep] = recover_su3(omega, Omega);
  (void)rep;
  const Mat dg = ref.g.matrix() - s.g_M.matrix();
  const Mat dginv = ref.g.inverse() - s.g_M.inverse();
  c.metric_deviation = covariant_tensor_norm(ref.g, dg);
  c.inverse_metric_deviation = contravariant_tensor_norm(ref.g, dginv);
  c.eps = std::max(form_norm(ref.g, ref.omega - omega), form_norm(ref.g, ref.Omega - Omega));
  c.ratio = c.eps > 0.0 ? std::max(c.metric_deviation, c.inverse_metric_deviation) / c.eps : 0.0;
  return c;
}

}  // namespace cyg
