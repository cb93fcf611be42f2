#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cyglue/analysis.hpp"
#include "cyglue/su3.hpp"

#include <random>

using namespace cyg;

namespace {

// Endomorphism oracle: iota_{K v} vol = iota_v theta ^ theta, solved by
// matching against iota_{e_i} vol coefficient by coefficient.
Mat k_oracle(const KForm& theta) {
  const KForm vol = KForm::volume(6);
  Mat basis(6, 6);  // column i: coefficients of iota_{e_i} vol
  for (int i = 0; i < 6; ++i) basis.col(i) = contract(Vec::Unit(6, i), vol).coeffs();
  Mat K(6, 6);
  for (int b = 0; b < 6; ++b) {
    const KForm five = wedge(contract(Vec::Unit(6, b), theta), theta);
    K.col(b) = basis.colPivHouseholderQr().solve(Vec(five.coeffs()));
  }
  return K;
}

Mat random_glplus(std::mt19937_64& rng, double spread) {
  std::normal_distribution<double> d;
  Mat L = Mat::Identity(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) L(i, j) += spread * d(rng);
  if (L.determinant() < 0) L.row(0) *= -1.0;
  return L;
}

CForm random_cform(std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  CForm P(6, 3);
  for (int i = 0; i < P.re.size(); ++i) P.re[i] = d(rng), P.im[i] = d(rng);
  return P;
}

KForm random_2form(std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  KForm Q(6, 2);
  for (int i = 0; i < Q.size(); ++i) Q[i] = d(rng);
  return Q;
}

}  // namespace

TEST_CASE("stable invariant sign and homogeneity") {
  const KForm re = std_c3::Omega0().re;
  const Mat K = k_oracle(re);
  CHECK(stable_invariant(re) == doctest::Approx((K * K).trace() / 6.0));
  CHECK(stable_invariant(re) < 0.0);
  const KForm split = KForm::monomial(6, {0, 2, 4}) + KForm::monomial(6, {1, 3, 5});
  CHECK(stable_invariant(split) == doctest::Approx((k_oracle(split) * k_oracle(split)).trace() / 6.0));
  CHECK(stable_invariant(split) > 0.0);
  CHECK(stable_invariant(1.7 * re) == doctest::Approx(std::pow(1.7, 4) * stable_invariant(re)));
  CHECK((stable_endomorphism(re) - K).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("almost complex structure from Re Omega0") {
  const KForm re = std_c3::Omega0().re;
  const LinearMap J = acs_from_theta1(re);
  CHECK((J.m - std_c3::J0()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(J.complex_structure_defect() < 1e-12);
  CHECK((acs_from_theta1(5.0 * re).m - std_c3::J0()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(acs_from_theta1(KForm::monomial(6, {0, 2, 4}) + KForm::monomial(6, {1, 3, 5})), NotStable);
}

TEST_CASE("acs equivariance under GL+ pullback") {
  std::mt19937_64 rng(11);
  const KForm re = std_c3::Omega0().re;
  for (int i = 0; i < 25; ++i) {
    const Mat L = random_glplus(rng, 0.3);
    const Mat J = acs_from_theta1(pullback(L, re)).m;
    CHECK((J - L.inverse() * std_c3::J0() * L).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("theta2 prime") {
  const CForm W = std_c3::Omega0();
  const LinearMap J{std_c3::J0(), MapRole::ComplexStructure};
  CHECK((theta2_prime(J, W.re) - W.im).max_abs() < 1e-14);
  CHECK((theta2_prime(J, W.im) + W.re).max_abs() < 1e-14);
  std::mt19937_64 rng(12);
  const CForm P = random_cform(rng);
  CHECK((theta2_prime(J, P.re + 2.0 * P.im) - theta2_prime(J, P.re) - 2.0 * theta2_prime(J, P.im)).max_abs() <
        1e-13);
}

TEST_CASE("type decomposition of 2-forms") {
  const LinearMap J{std_c3::J0(), MapRole::ComplexStructure};
  auto [w11, w20] = omega_11(std_c3::omega0(), J);
  CHECK((w11 - std_c3::omega0()).max_abs() < 1e-15);
  CHECK(w20.max_abs() < 1e-15);
  // dx1 ^ dx2 in the (x1, y1, x2, y2, ...) ordering is monomial {0, 2}.
  const KForm e = KForm::monomial(6, {0, 2});
  auto [e11, e20] = omega_11(e, J);
  CHECK((e11 - 0.5 * (KForm::monomial(6, {0, 2}) + KForm::monomial(6, {1, 3}))).max_abs() < 1e-15);
  CHECK((e11 + e20 - e).max_abs() < 1e-15);
  auto [again, rest] = omega_11(e11, J);
  CHECK((again - e11).max_abs() < 1e-15);
  CHECK(rest.max_abs() < 1e-15);
}

TEST_CASE("recovery on the standard point") {
  const auto [s, rep] = recover_su3(std_c3::omega0(), std_c3::Omega0());
  CHECK(s.f == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((s.g_M.matrix() - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rep.defect_theta2 < 1e-12);
  CHECK(rep.defect_omega20 < 1e-12);
  CHECK(rep.defect_normalization < 1e-12);
  CHECK(rep.stable);
  CHECK(rep.within_eps0);
}

TEST_CASE("recovery invariants on SU(3) data") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 20; ++i) {
    const Mat L = random_glplus(rng, 0.25);
    const auto [s, rep] = recover_su3(pullback(L, std_c3::omega0()), pullback(L, std_c3::Omega0()));
    CHECK(std::abs(s.f - 1.0) < 1e-10);
    CHECK(std::max({rep.defect_theta2, rep.defect_omega20, rep.defect_normalization}) < 1e-10);
    CHECK(s.J_prime.complex_structure_defect() < 1e-10);
    // Omega' = theta1 + i theta2' is (3,0): iota of a (0,1) vector v + i J v vanishes.
    const CForm Wp(pullback(L, std_c3::Omega0()).re, s.theta2_prime);
    const Vec v = Vec::Unit(6, i % 6), Jv = s.J_prime.m * v;
    const CForm a = contract(v, Wp), b = contract(Jv, Wp);
    // iota_{v + iJv} W = a + i b.
    CHECK((a.re - b.im).max_abs() < 1e-10);
    CHECK((a.im + b.re).max_abs() < 1e-10);
  }
}

TEST_CASE("recovery of perturbed pairs") {
  const double e = 0.01;
  const auto [s, rep] = recover_su3(std_c3::omega0() + e * KForm::monomial(6, {0, 2}), std_c3::Omega0());
  CHECK(rep.defect_omega20 == doctest::Approx(0.005 * std::sqrt(2.0)).epsilon(0.2));
  CHECK(rep.defect_theta2 < 1e-12);

  const double d = 0.05;
  const auto [s2, rep2] = recover_su3((1.0 + d) * std_c3::omega0(), std_c3::Omega0());
  CHECK(s2.f == doctest::Approx(std::pow(1.0 + d, 3)));
  CHECK((s2.omega_prime - std_c3::omega0()).max_abs() < 1e-12);
  CHECK(rep2.defect_theta2 < 1e-12);
  CHECK(rep2.defect_omega20 < 1e-12);

  CHECK_THROWS_AS(recover_su3(std_c3::omega0(), CForm(6, 3)), NotStable);
}

TEST_CASE("recovery scale covariance") {
  std::mt19937_64 rng(14);
  const KForm w = std_c3::omega0() + 0.03 * random_2form(rng);
  const CForm W = std_c3::Omega0() + 0.03 * random_cform(rng);
  const auto [s, rep] = recover_su3(w, W);
  for (double c : {0.5, 2.0}) {
    const auto [sc, repc] = recover_su3(c * c * w, (c * c * c) * W);
    CHECK((sc.J_prime.m - s.J_prime.m).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((sc.g_M.matrix() - c * c * s.g_M.matrix()).cwiseAbs().maxCoeff() < 1e-10 * c * c);
    // A k-form's g_M norm scales as c^{deg - k}; the defects are degree 2, 3, 6 forms of weight 2, 3, 6.
    CHECK(repc.defect_theta2 == doctest::Approx(rep.defect_theta2).epsilon(1e-8));
    CHECK(repc.defect_omega20 == doctest::Approx(rep.defect_omega20).epsilon(1e-8));
    CHECK(repc.defect_normalization == doctest::Approx(rep.defect_normalization).epsilon(1e-8));
  }
}

TEST_CASE("f deviation bounded by the defects with one constant") {
  std::mt19937_64 rng(15);
  double C0 = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double eps = std::pow(10.0, -1.0 - (i % 4));
    const auto [s, rep] = recover_su3(std_c3::omega0() + eps * random_2form(rng),
                                      std_c3::Omega0() + eps * random_cform(rng));
    const double sum = rep.defect_theta2 + rep.defect_omega20 + rep.defect_normalization;
    C0 = std::max(C0, rep.f_deviation / sum);
  }
  MESSAGE("fitted C0 = " << C0);
  CHECK(C0 < 10.0);
}

TEST_CASE("closeness to a reference CY point") {
  const CYPoint ref = standard_cy_point();
  const auto zero = check_prop32(ref.omega, ref.Omega, ref);
  CHECK(zero.metric_deviation < 1e-12);
  CHECK(zero.inverse_metric_deviation < 1e-12);

  const CForm bar = wedge(wedge(std_c3::dzbar(0), std_c3::dzbar(1)), std_c3::dzbar(2));
  const auto one = check_prop32(ref.omega, ref.Omega + 0.01 * bar, ref);
  CHECK(one.metric_deviation <= 0.2);
  CHECK(one.inverse_metric_deviation <= 0.2);

  std::mt19937_64 rng(16);
  const CForm P = random_cform(rng);
  std::vector<double> eps, dev;
  for (double e : {1e-2, 1e-3, 1e-4}) {
    eps.push_back(e);
    dev.push_back(check_prop32(ref.omega, ref.Omega + e * P, ref).metric_deviation);
  }
  CHECK(fit_power_law(eps, dev, 3, 2.0).exponent == doctest::Approx(1.0).epsilon(0.1));
}
