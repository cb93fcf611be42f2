#include "cyglue/g2.hpp"

#include <cmath>

namespace cyg {

namespace g2 {

KForm phi0() {
  return KForm::monomial(7, {0, 1, 2}) + KForm::monomial(7, {0, 3, 4}) + KForm::monomial(7, {0, 5, 6}) +
         KForm::monomial(7, {1, 3, 5}) - KForm::monomial(7, {1, 4, 6}) - KForm::monomial(7, {2, 3, 6}) -
         KForm::monomial(7, {2, 4, 5});
}

KForm star_phi0() {
  return KForm::monomial(7, {3, 4, 5, 6}) + KForm::monomial(7, {1, 2, 5, 6}) + KForm::monomial(7, {1, 2, 3, 4}) +
         KForm::monomial(7, {0, 2, 4, 6}) - KForm::monomial(7, {0, 2, 3, 5}) - KForm::monomial(7, {0, 1, 4, 5}) -
         KForm::monomial(7, {0, 1, 3, 6});
}

}  // namespace g2

MetricTensor metric_from_phi(const KForm& phi) {
  if (phi.dim() != 7 || phi.degree() != 3) throw DimensionMismatch("expected a 3-form on R^7");
  std::array<KForm, 7> ip;
  for (int a = 0; a < 7; ++a) ip[a] = contract(Vec::Unit(7, a), phi);
  Mat B(7, 7);
  for (int a = 0; a < 7; ++a)
    for (int b = a; b < 7; ++b) B(a, b) = B(b, a) = wedge(wedge(ip[a], ip[b]), phi)[0] / 6.0;
  const double det = B.determinant();
  if (!(det > 0.0)) throw NotPositive3Form("associated bilinear form has non-positive determinant");
  MetricTensor g(std::pow(det, -1.0 / 9.0) * B);
  if (!g.valid()) throw NotPositive3Form("associated bilinear form is not positive definite");
  return g;
}

G2Structure g2_structure(const KForm& phi) {
  G2Structure s{phi, metric_from_phi(phi), KForm()};
  s.star_phi = hodge_star(s.g, phi);
  return s;
}

std::pair<KForm, KForm> build_phi_chi(const KForm& omega, const KForm& theta1, const KForm& theta2) {
  const KForm ds = KForm::monomial(7, {0});
  const KForm w = lift(omega);
  KForm phi = wedge(ds, w) + lift(theta1);
  KForm chi = 0.5 * wedge(w, w) - wedge(ds, lift(theta2));
  return {phi, chi};
}

TorsionSample torsion_psi(const KForm& omega, const CForm& Omega) {
  TorsionSample t;
  auto [phi, chi] = build_phi_chi(omega, Omega.re, Omega.im);
  const MetricTensor g = metric_from_phi(phi);
  t.psi = phi - hodge_star(g, chi);
  t.psi_norm = form_norm(g, t.psi);
  const auto [s, rep] = recover_su3(omega, Omega);
  t.omega_defect = form_norm(s.g_M, omega - s.omega_prime);
  t.theta2_defect = rep.defect_theta2;
  return t;
}

MetricTensor product_metric(const MetricTensor& g6) {
  Mat g = Mat::Zero(7, 7);
  g(0, 0) = 1.0;
  g.block(1, 1, 6, 6) = g6.matrix();
  return MetricTensor(g);
}

G2Comparison compare_g2(const KForm& phi, const KForm& phi_prime, const MetricTensor& g_prime, const KForm& chi) {
  G2Comparison c;
  const MetricTensor g = metric_from_phi(phi);
  metric_from_phi(phi_prime);  // positivity of phi'
  c.phi = form_norm(g_prime, phi - phi_prime);
  c.metric = covariant_tensor_norm(g_prime, g.matrix() - g_prime.matrix());
  c.inverse = contravariant_tensor_norm(g_prime, g.inverse() - g_prime.inverse());
  c.star_vs_chi = form_norm(g_prime, hodge_star(g, phi) - chi);
  return c;
}

G2Comparison compare_g2(const KForm& phi, const KForm& phi_prime, const MetricTensor& g_prime) {
  return compare_g2(phi, phi_prime, g_prime, hodge_star(g_prime, phi_prime));
}

}  // namespace cyg
