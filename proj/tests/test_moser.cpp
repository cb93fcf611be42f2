#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cyglue/cones.hpp"
#include "cyglue/moser.hpp"

#include <random>

using namespace cyg;

namespace {

Vec random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Vec x(6);
  for (int i = 0; i < 6; ++i) x(i) = d(rng);
  return x.normalized();
}

double norm0(const KForm& a) { return form_norm(MetricTensor::euclidean(6), a); }

}  // namespace

TEST_CASE("gauge perturbation is exact") {
  std::mt19937_64 rng(41);
  for (double nu : {2.0, 3.0, -4.0}) {
    GaugePerturbation gp;
    gp.nu = nu;
    gp.amplitude = 0.3;
    const Vec x = (0.4 + 0.3 * (nu < 0)) * random_unit(rng);
    const KForm dA = exterior_derivative([&](const Point& q) { return gp.A(q); }, x, relative_step(x, 1e-3, 4));
    CHECK((dA - gp.eta(x)).max_abs() < 1e-9);
    CHECK(contract(x, gp.A(x)).max_abs() < 1e-14);
  }
}

TEST_CASE("radial split of forms on cone charts") {
  std::mt19937_64 rng(42);
  const Vec x = 1.3 * random_unit(rng);
  const int p = hopf::best_patch(x);
  const Vec y = hopf::ambient_to_chart(p, x);
  const FdStep fd{1e-4, 4};

  SUBCASE("eta = 0") {
    const SplitForm s = split_form([](const Point&) { return KForm(6, 2); }, y, fd);
    CHECK(s.eta0.max_abs() == 0.0);
    CHECK(s.eta1.max_abs() == 0.0);
  }
  SUBCASE("eta = d(r^2 beta) gives eta1 = -2 r beta") {
    // beta = d a1 on the link; d(r^2 beta) = 2r dr ^ beta = -2r beta ^ dr.
    const KForm beta = KForm::monomial(6, {1});
    const FormField eta = [&](const Point& q) { return 2.0 * q(5) * wedge(KForm::monomial(6, {5}), beta); };
    const SplitForm s = split_form(eta, y, fd);
    CHECK(s.eta0.max_abs() < 1e-15);
    CHECK((s.eta1 + 2.0 * y(5) * beta).max_abs() < 1e-14);
    CHECK(s.radial_residual < 1e-8);
  }
  SUBCASE("eta = omega_V splits as r^2 omega|Gamma - r alpha ^ dr") {
    const ConeGeometry cone = flat_c3_cone();
    const FormField eta = [&](const Point& q) { return cone.chart_fields(p, q).omega; };
    const SplitForm s = split_form(eta, y, fd);
    const auto [Xc, Zc] = radial_and_reeb(p, y);
    CHECK(contract(Zc, s.eta1)[0] == doctest::Approx(-y(5)));
    Point y2 = y;
    y2(5) *= 2.0;
    const SplitForm s2 = split_form(eta, y2, fd);
    CHECK((s2.eta0 - 4.0 * s.eta0).max_abs() < 1e-12);
    CHECK((s2.eta1 - 2.0 * s.eta1).max_abs() < 1e-12);
    CHECK(s.radial_residual < 1e-8);
  }
  SUBCASE("non-closed forms are rejected") {
    const FormField bad = [](const Point& q) { return q(0) * KForm::monomial(6, {1, 2}); };
    CHECK_THROWS_AS(split_form(bad, y, fd), NotClosed);
  }
}

TEST_CASE("radial primitives") {
  std::mt19937_64 rng(43);
  GaugePerturbation gp;
  gp.nu = 2.0;
  gp.amplitude = 0.5;
  const RadialPrimitive from_zero([&](const Point& q) { return gp.eta(q); }, 2, 2.0, PrimitiveDirection::FromZero);
  CHECK(from_zero.degree() == 2);
  CHECK(from_zero.direction() == PrimitiveDirection::FromZero);
  for (int i = 0; i < 4; ++i) {
    const Vec x = (0.2 + 0.2 * i) * random_unit(rng);
    CHECK((from_zero(x) - gp.A(x)).max_abs() < 1e-10);
    const KForm ds =
        exterior_derivative([&](const Point& q) { return from_zero(q); }, x, relative_step(x, 1e-3, 4));
    CHECK((ds - gp.eta(x)).max_abs() < 1e-8);
  }

  GaugePerturbation far;
  far.nu = -4.0;
  far.amplitude = 1.0;
  const RadialPrimitive from_inf([&](const Point& q) { return far.eta(q); }, 2, -4.0, PrimitiveDirection::FromInfinity);
  const Vec u = random_unit(rng);
  std::vector<double> rs, ns;
  for (double r = 2.0; r <= 32.0; r *= 2.0) {
    rs.push_back(r);
    ns.push_back(norm0(from_inf(r * u)));
    CHECK(contract(Vec(r * u), from_inf(r * u)).max_abs() < 1e-10 * ns.back() + 1e-16);
  }
  CHECK(fit_power_law(rs, ns, 4, 4.0).exponent == doctest::Approx(-3.0).epsilon(0.1));

  const RadialPrimitive zero([](const Point&) { return KForm(6, 2); }, 2, 1.0, PrimitiveDirection::FromZero);
  CHECK(zero(u).max_abs() == 0.0);

  const RadialPrimitive cplx(
      [&](const Point& q) { return CForm(gp.eta(q), 2.0 * gp.eta(q)); }, 2, 2.0, PrimitiveDirection::FromZero);
  CHECK(cplx.is_complex());
  CHECK((cplx.complex(0.5 * u).im - 2.0 * gp.A(Vec(0.5 * u))).max_abs() < 1e-10);
}

TEST_CASE("rate gates") {
  const FormField z = [](const Point&) { return KForm(6, 2); };
  CHECK_THROWS_AS(RadialPrimitive(z, 2, 0.0, PrimitiveDirection::FromZero), RateOutOfRange);
  CHECK_THROWS_AS(RadialPrimitive(z, 2, -1.0, PrimitiveDirection::FromZero), RateOutOfRange);
  CHECK_THROWS_AS(RadialPrimitive(z, 2, -2.0, PrimitiveDirection::FromInfinity), RateOutOfRange);
  CHECK_THROWS_AS(RadialPrimitive(z, 3, -3.0, PrimitiveDirection::FromInfinity), RateOutOfRange);
  CHECK_NOTHROW(RadialPrimitive(z, 3, -3.5, PrimitiveDirection::FromInfinity));
  CHECK_NOTHROW(RadialPrimitive(z, 2, 0.1, PrimitiveDirection::FromZero));
}

TEST_CASE("Moser vector field") {
  const KForm w = std_c3::omega0();
  CHECK(moser_vector_field(KForm(6, 1), w).norm() == 0.0);
  std::mt19937_64 rng(44);
  std::normal_distribution<double> d;
  for (int i = 0; i < 5; ++i) {
    KForm s(6, 1), e(6, 2);
    for (int k = 0; k < 6; ++k) s[k] = 0.1 * d(rng);
    for (int k = 0; k < e.size(); ++k) e[k] = 0.05 * d(rng);
    const Vec X = moser_vector_field(s, w + e);
    CHECK((s + contract(X, w + e)).max_abs() < 1e-12);
  }
  // sigma = r dr: iota(Z) omega_V = -r dr with Z = J0 x, so X = Z.
  const Vec x = 1.4 * random_unit(rng);
  KForm rdr(6, 1);
  rdr.coeffs() = x;
  CHECK((moser_vector_field(rdr, w) - std_c3::J0() * x).norm() < 1e-13);
  CHECK_THROWS_AS(moser_vector_field(rdr, KForm::monomial(6, {0, 1})), Degenerate);
}

TEST_CASE("Moser flow") {
  std::mt19937_64 rng(45);
  MoserProblem p;
  p.r_min = 0.05;
  p.r_max = 1.0;
  p.chart_r_max = 2.0;
  for (int i = 0; i < 4; ++i) p.directions.push_back(random_unit(rng));
  p.radial_fractions = {0.1, 0.5, 1.0};

  SUBCASE("eta = 0 gives the identity") {
    p.eta = [](const Point&) { return KForm(6, 2); };
    p.sigma = [](const Point&) { return KForm(6, 1); };
    const MoserResult r = moser_integrate(p, {8});
    CHECK(r.pullback_residual < 1e-12);
    CHECK(r.max_displacement == 0.0);
    for (std::size_t i = 0; i < r.samples.size(); ++i) CHECK((r.images[i] - r.samples[i]).norm() == 0.0);
  }
  SUBCASE("nu = 3 perturbation") {
    GaugePerturbation gp;
    gp.nu = 3.0;
    gp.amplitude = 0.2;
    p.eta = [gp](const Point& q) { return gp.eta(q); };
    p.sigma = [gp](const Point& q) { return gp.A(q); };
    const MoserResult r64 = moser_integrate(p, {64});
    CHECK(r64.pullback_residual < 1e-6);
    CHECK(r64.max_displacement > 0.0);
    const double e8 = moser_integrate(p, {8}).pullback_residual;
    const double e16 = moser_integrate(p, {16}).pullback_residual;
    CHECK(observed_order(e8, e16) == doctest::Approx(4.0).epsilon(0.15));
  }
  SUBCASE("trajectories leaving the chart") {
    GaugePerturbation gp;
    gp.nu = 3.0;
    gp.amplitude = 50.0;
    p.eta = [gp](const Point& q) { return gp.eta(q); };
    p.sigma = [gp](const Point& q) { return gp.A(q); };
    p.chart_r_max = 1.01;
    const MoserResult r = moser_integrate(p, {16, 8});
    CHECK(r.halvings > 0);
    CHECK(r.shrunk_domain.second < p.r_max);
  }
}
