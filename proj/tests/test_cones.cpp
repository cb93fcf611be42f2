#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cyglue/analysis.hpp"
#include "cyglue/cones.hpp"
#include "cyglue/su3.hpp"

#include <complex>
#include <random>

using namespace cyg;

namespace {

Vec random_point(std::mt19937_64& rng, double r) {
  std::normal_distribution<double> d;
  Vec x(6);
  for (int i = 0; i < 6; ++i) x(i) = d(rng);
  return r * x / x.norm();
}

std::vector<std::pair<int, Vec>> chart_samples(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<std::pair<int, Vec>> s;
  for (int i = 0; i < n; ++i) {
    const Vec x = random_point(rng, u(rng));
    const int p = hopf::best_patch(x);
    s.emplace_back(p, hopf::ambient_to_chart(p, x));
  }
  return s;
}

double field_distance(const CYFields& a, const CYFields& b) {
  return std::max({(a.g - b.g).cwiseAbs().maxCoeff(), (a.omega - b.omega).max_abs(), (a.Omega.re - b.Omega.re).max_abs(),
                   (a.Omega.im - b.Omega.im).max_abs()});
}

}  // namespace

TEST_CASE("Hopf charts round trip and differentials") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 30; ++i) {
    const Vec x = random_point(rng, 0.3 + i * 0.1);
    for (int p = 0; p < hopf::kPatches; ++p) {
      const Vec y = hopf::ambient_to_chart(p, x);
      if (!y.allFinite() || y.segment(1, 4).norm() > 5.0) continue;
      CHECK((hopf::chart_to_ambient(p, y) - x).norm() < 1e-12);
      const Mat D = hopf::chart_differential(p, y);
      const double h = 1e-5;
      for (int c = 0; c < 6; ++c) {
        Vec yp = y, ym = y;
        yp(c) += h, ym(c) -= h;
        const Vec fd = (hopf::chart_to_ambient(p, yp) - hopf::chart_to_ambient(p, ym)) / (2 * h);
        CHECK((D.col(c) - fd).norm() < 1e-8);
      }
    }
    CHECK(hopf::ambient_to_chart(hopf::best_patch(x), x)(5) == doctest::Approx(x.norm()));
  }
}

TEST_CASE("cones carry genuine Calabi-Yau structures") {
  std::mt19937_64 rng(32);
  for (const ConeGeometry& cone : {flat_c3_cone(), quotient_cone_z3()}) {
    for (const auto& [p, y] : chart_samples(rng, 10)) {
      const CYFields f = cone.chart_fields(p, y);
      const auto [s, rep] = recover_su3(f.omega, f.Omega);
      CHECK(std::max({rep.defect_theta2, rep.defect_omega20, rep.defect_normalization}) < 1e-9);
      CHECK((s.g_M.matrix() - f.g).cwiseAbs().maxCoeff() < 1e-9 * (1.0 + f.g.norm()));
    }
  }
}

TEST_CASE("quotient cone deck invariance") {
  const ConeGeometry cone = quotient_cone_z3();
  CHECK(cone.deck_order() == 3);
  const Mat G = cone.deck_generator();
  const Mat G3 = G * G * G;
  CHECK((G3 - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-14);
  std::mt19937_64 rng(33);
  const Vec x = random_point(rng, 1.3);
  const CYFields f = cone.ambient(x), fg = cone.ambient(G * x);
  CHECK((pullback(G, fg.omega) - f.omega).max_abs() < 1e-13);
  CHECK((pullback(G, fg.Omega).re - f.Omega.re).max_abs() < 1e-13);
  CHECK((pullback(G, fg.Omega).im - f.Omega.im).max_abs() < 1e-13);
  CHECK((G.transpose() * fg.g * G - f.g).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(cone.link_volume() == doctest::Approx(M_PI * M_PI * M_PI / 3.0).epsilon(1e-10));
  CHECK(flat_c3_cone().link_volume() == doctest::Approx(M_PI * M_PI * M_PI).epsilon(1e-10));
}

TEST_CASE("homogeneity under real dilations") {
  std::mt19937_64 rng(34);
  const ConeGeometry cone = quotient_cone_z3();
  for (const auto& [p, y] : chart_samples(rng, 8))
    for (double t : {0.5, 2.0, 3.7}) {
      const CYFields d = dilation_pullback(cone, p, y, complex_dilation(t, 0.0));
      const CYFields f = cone.chart_fields(p, y);
      CHECK((d.g - t * t * f.g).cwiseAbs().maxCoeff() < 1e-12 * t * t * (1.0 + f.g.norm()));
      CHECK((d.omega - t * t * f.omega).max_abs() < 1e-12 * t * t * (1.0 + f.omega.max_abs()));
      CHECK((d.Omega.re - t * t * t * f.Omega.re).max_abs() < 1e-12 * t * t * t * (1.0 + f.Omega.re.max_abs()));
    }
}

TEST_CASE("complex dilations") {
  std::mt19937_64 rng(35);
  const ConeGeometry cone = flat_c3_cone();
  const auto samples = chart_samples(rng, 6);
  for (const auto& [p, y] : samples) {
    CHECK(field_distance(dilation_pullback(cone, p, y, complex_dilation(1.0, 0.0)), cone.chart_fields(p, y)) < 1e-13);
    const CYFields d = dilation_pullback(cone, p, y, complex_dilation(2.0, M_PI / 3.0));
    const CYFields f = cone.chart_fields(p, y);
    const double s = 1.0 + f.Omega.re.max_abs() + f.Omega.im.max_abs();
    CHECK((d.Omega.re + 8.0 * f.Omega.re).max_abs() < 1e-9 * s);
    CHECK((d.Omega.im + 8.0 * f.Omega.im).max_abs() < 1e-9 * s);
    CHECK((d.omega - 4.0 * f.omega).max_abs() < 1e-9 * (1.0 + f.omega.max_abs()));
  }
  const ComplexDilation a = complex_dilation(1.5, 0.4), b = complex_dilation(0.7, -1.1);
  const ComplexDilation ab = a.compose(b);
  CHECK((ab.ambient_matrix() - a.ambient_matrix() * b.ambient_matrix()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(ab.t == doctest::Approx(1.05));
  const Vec y = samples[0].second;
  const Vec lhs = ab.chart_map(y), rhs = a.chart_map(b.chart_map(y));
  CHECK(std::abs(lhs(5) - rhs(5)) < 1e-13);
  CHECK(std::remainder(lhs(0) - rhs(0), 2 * M_PI) == doctest::Approx(0.0));
  CHECK((lhs.segment(1, 4) - rhs.segment(1, 4)).norm() < 1e-13);
}

TEST_CASE("radial and Reeb fields") {
  std::mt19937_64 rng(36);
  for (int i = 0; i < 5; ++i) {
    const Vec x = random_point(rng, 1.7);
    const auto [X, Z] = radial_and_reeb_ambient(x);
    CHECK((X - x).norm() < 1e-15);
    CHECK((Z - std_c3::J0() * x).norm() < 1e-15);
    // iota_X omega_V = r^2 alpha, alpha(Z) = 1.
    CHECK((contract(X, std_c3::omega0()) - x.squaredNorm() * contact_form(x)).max_abs() < 1e-13);
    CHECK(contract(Z, contact_form(x))[0] == doctest::Approx(1.0));
    const int p = hopf::best_patch(x);
    const Vec y = hopf::ambient_to_chart(p, x);
    const auto [Xc, Zc] = radial_and_reeb(p, y);
    const Mat D = hopf::chart_differential(p, y);
    CHECK((D * Xc - X).norm() < 1e-12);
    CHECK((D * Zc - Z).norm() < 1e-12);
  }
}

TEST_CASE("Lie derivative identities converge at order 2") {
  std::mt19937_64 rng(37);
  const ConeGeometry cone = quotient_cone_z3();
  const auto samples = chart_samples(rng, 8);
  for (LieCheck which : {LieCheck::X_omega, LieCheck::X_Omega, LieCheck::Z_Omega}) {
    const double e1 = lie_derivative_check(cone, which, samples, 1e-3);
    const double e2 = lie_derivative_check(cone, which, samples, 5e-4);
    // Pure discretization error w^3 h^2 |T| / 6 with weight w <= 3.
    CHECK(e1 < 2e-5);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
  }
  CHECK(lie_derivative_check(cone, LieCheck::Z_omega, samples, 1e-3) < 1e-9);
}

TEST_CASE("Calabi ALE space") {
  const ACGeometry ale = calabi_ale_o3(1.0);
  CHECK(ale.rate() == -6.0);
  CHECK(ale.modelled_cone().deck_order() == 3);
  std::mt19937_64 rng(38);

  // Potential derivatives against the closed form rho u' = (rho^3 + a^3)^{1/3}.
  for (double rho : {0.5, 2.0, 40.0}) {
    const double up = std::cbrt(rho * rho * rho + 1.0) / rho;
    CHECK(ale.du_minus_one(rho) == doctest::Approx(up - 1.0).epsilon(1e-10));
    const double h = 1e-5 * rho;
    const double upp = (std::cbrt(std::pow(rho + h, 3) + 1.0) / (rho + h) - std::cbrt(std::pow(rho - h, 3) + 1.0) / (rho - h)) / (2 * h);
    CHECK(ale.d2u(rho) == doctest::Approx(upp).epsilon(1e-6));
  }

  for (double r : {0.3, 1.0, 3.0}) {
    const Vec x = random_point(rng, r);
    const CYFields f = ale.ambient(x);
    const auto [s, rep] = recover_su3(f.omega, f.Omega);
    CHECK(std::max({rep.defect_theta2, rep.defect_omega20, rep.defect_normalization}) < 1e-9);
    const auto c = ale.resolved_chart(x);
    CHECK((c.to_ambient(c.from_ambient(x)) - x).norm() < 1e-12);
  }

  // Ricci flatness away from the zero section in ambient coordinates.
  const Vec x = random_point(rng, 2.0);
  const Curvature cv = riemann_ricci([&](const Point& p) { return ale.metric(p); }, x, relative_step(x, 5e-4, 4));
  CHECK(cv.ricci_norm() < 1e-6);
  CHECK(cv.riemann_norm() > 1e-4);

  // Decay of omega_Y - omega_V on a dyadic ladder.
  const Vec u = random_point(rng, 1.0);
  std::vector<double> rs, dev;
  for (double r = 2.0; r <= 32.0; r *= 2.0) {
    rs.push_back(r);
    dev.push_back(form_norm(MetricTensor::euclidean(6), ale.ambient(r * u).omega - std_c3::omega0()));
  }
  CHECK(fit_power_law(rs, dev, 4, 4.0).exponent == doctest::Approx(-6.0).epsilon(0.05));
  const Vec far = 100.0 * u;
  CHECK((ale.metric(far) - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-3);

  // Darboux map and the primitive.
  const Vec xd = random_point(rng, 2.5);
  const Mat D = ale.darboux_differential(xd);
  CHECK((pullback(D, ale.ambient(ale.darboux(xd)).omega) - std_c3::omega0()).max_abs() < 1e-11);
  const CForm dW = ale.darboux_omega_defect(xd);
  const CForm direct = pullback(D, ale.ambient(ale.darboux(xd)).Omega) - std_c3::Omega0();
  CHECK((dW.re - direct.re).max_abs() < 1e-12);
  CHECK((dW.im - direct.im).max_abs() < 1e-12);
  CHECK(ale.darboux_min_radius() == doctest::Approx(1.0).epsilon(1e-12));
  const KForm dprim = exterior_derivative([&](const Point& p) { return ale.omega_primitive(p); }, xd,
                                          relative_step(xd, 1e-3, 4));
  CHECK((dprim - (ale.ambient(xd).omega - std_c3::omega0())).max_abs() < 1e-9);
}

TEST_CASE("T6/Z3 fixed points") {
  const double L = kDefaultLatticeScale;
  // Brute force: z = L(s + t zeta) is fixed iff (zeta - 1) z lies in the lattice.
  const std::complex<double> zeta = std::polar(1.0, 2.0 * M_PI / 3.0);
  std::vector<std::complex<double>> found;
  const int n = 300;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const std::complex<double> z = L * (double(i) / n + double(j) / n * zeta);
      const std::complex<double> w = (zeta - 1.0) * z / L;
      const double t = w.imag() / zeta.imag(), s = w.real() - t * zeta.real();
      if (std::abs(s - std::round(s)) < 1e-9 && std::abs(t - std::round(t)) < 1e-9) found.push_back(z);
    }
  CHECK(found.size() == 3);
  const auto pts = t6_z3_fixed_points(L);
  REQUIRE(pts.size() == 27);
  for (const Vec& p : pts)
    for (int k = 0; k < 3; ++k) {
      const std::complex<double> z(p(2 * k), p(2 * k + 1));
      double best = 1e9;
      for (const auto& f : found) best = std::min(best, std::abs(f - z));
      CHECK(best < 1e-9);
    }
  CHECK_THROWS_AS(t6_z3_orbifold_patch(27), std::out_of_range);
  CHECK_THROWS_AS(t6_z3_orbifold_patch(-1), std::out_of_range);
}

TEST_CASE("orbifold patches") {
  const OrbifoldPatch flat = t6_z3_orbifold_patch(5);
  CHECK(flat.chart_radius() > 0.0);
  std::mt19937_64 rng(39);
  const Vec x = random_point(rng, 0.5 * flat.chart_radius());
  const CYFields f = flat.ambient(x);
  CHECK((f.omega - std_c3::omega0()).max_abs() == 0.0);
  CHECK((f.Omega.re - std_c3::Omega0().re).max_abs() == 0.0);
  CHECK(flat.A(x).re.max_abs() == 0.0);

  const OrbifoldPatch pert = t6_z3_orbifold_patch(0, 2.0, 0.1);
  const Vec u = random_point(rng, 1.0);
  std::vector<double> rs, dev;
  for (double r = 0.4; r >= 0.024; r /= 2.0) {
    rs.push_back(r);
    const CForm d = pert.Omega(r * u) - std_c3::Omega0();
    dev.push_back(form_norm(MetricTensor::euclidean(6), d));
  }
  CHECK(fit_power_law(rs, dev, 4, 4.0).exponent == doctest::Approx(2.0).epsilon(0.05));
  const Vec y = 0.3 * u;
  const CForm dA = exterior_derivative([&](const Point& p) { return pert.A(p); }, y, FdStep{1e-4, 4});
  CHECK((dA.re - pert.dA(y).re).max_abs() < 1e-10);
  CHECK((dA.im - pert.dA(y).im).max_abs() < 1e-10);
  CHECK_THROWS(t6_z3_orbifold_patch(0, 0.0, 0.1));
}

TEST_CASE("geometry descriptors") {
  CHECK(quotient_cone_z3().descriptor().kind == "cone");
  const GeometryDescriptor d = calabi_ale_o3().descriptor();
  CHECK(d.kind == "ac");
  CHECK(d.rate == -6.0);
  CHECK(t6_z3_orbifold_patch(0).descriptor().kind == "conical");
}
