#include "cyglue/cones.hpp"

#include "cyglue/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <complex>
#include <stdexcept>

namespace cyg {

using cd = std::complex<double>;

namespace hopf {

namespace {

void check_patch(int p) {
  if (p < 0 || p >= kPatches) throw std::out_of_range("cone chart patch must be in 0..5");
}

std::array<int, 3> slots(int patch) {
  const int j = patch / 2;
  std::array<int, 3> s{j, 0, 0};
  int c = 1;
  for (int k = 0; k < 3; ++k)
    if (k != j) s[c++] = k;
  return s;
}

void put(Vec& v, int slot, cd z) {
  v(2 * slot) = z.real();
  v(2 * slot + 1) = z.imag();
}

}  // namespace

Vec chart_to_ambient(int patch, const Vec& y) {
  check_patch(patch);
  const auto sl = slots(patch);
  const cd w1(y(1), y(2)), w2(y(3), y(4));
  const double s = 1.0 / std::sqrt(1.0 + std::norm(w1) + std::norm(w2));
  const cd c = y(5) * s * std::polar(1.0, y(0));
  Vec x(6);
  put(x, sl[0], c);
  put(x, sl[1], c * w1);
  put(x, sl[2], c * w2);
  return x;
}

Mat chart_differential(int patch, const Vec& y) {
  check_patch(patch);
  const auto sl = slots(patch);
  const cd w[2] = {cd(y(1), y(2)), cd(y(3), y(4))};
  const double r = y(5);
  const double s = 1.0 / std::sqrt(1.0 + std::norm(w[0]) + std::norm(w[1]));
  const cd e = std::polar(1.0, y(0));
  const cd u[3] = {s, w[0] * s, w[1] * s};
  Mat L = Mat::Zero(6, 6);
  auto column = [&](int col, const cd du[3], cd scale) {
    for (int q = 0; q < 3; ++q) {
      const cd v = scale * du[q];
      L(2 * sl[q], col) = v.real();
      L(2 * sl[q] + 1, col) = v.imag();
    }
  };
  const cd iu[3] = {cd(0, 1) * u[0], cd(0, 1) * u[1], cd(0, 1) * u[2]};
  column(0, iu, r * e);
  column(5, u, e);
  for (int m = 0; m < 2; ++m) {
    const double comp[2] = {w[m].real(), w[m].imag()};
    for (int part = 0; part < 2; ++part) {
      const double ds = -s * s * s * comp[part];
      const cd dw = part == 0 ? cd(1, 0) : cd(0, 1);
      cd du[3] = {ds, w[0] * ds, w[1] * ds};
      du[1 + m] += dw * s;
      column(1 + 2 * m + part, du, r * e);
    }
  }
  return L;
}

Vec ambient_to_chart(int patch, const Vec& x) {
  check_patch(patch);
  const auto sl = slots(patch);
  const cd z[3] = {cd(x(2 * sl[0]), x(2 * sl[0] + 1)), cd(x(2 * sl[1]), x(2 * sl[1] + 1)),
                   cd(x(2 * sl[2]), x(2 * sl[2] + 1))};
  if (std::abs(z[0]) == 0.0) throw std::domain_error("point outside the cone chart patch");
  Vec y(6);
  double phi = std::arg(z[0]);
  if (patch % 2 == 1 && phi < 0.0) phi += 2.0 * M_PI;
  const cd w1 = z[1] / z[0], w2 = z[2] / z[0];
  y << phi, w1.real(), w1.imag(), w2.real(), w2.imag(), x.norm();
  return y;
}

int best_patch(const Vec& x) {
  int j = 0;
  double best = -1.0;
  for (int k = 0; k < 3; ++k) {
    const double m = std::hypot(x(2 * k), x(2 * k + 1));
    if (m > best) best = m, j = k;
  }
  const double phi = std::atan2(x(2 * j + 1), x(2 * j));
  return 2 * j + (std::abs(phi) < 0.5 * M_PI ? 0 : 1);
}

}  // namespace hopf

CYFields ChartedGeometry::chart_fields(int patch, const Vec& y) const {
  const Mat L = hopf::chart_differential(patch, y);
  const CYFields a = ambient(hopf::chart_to_ambient(patch, y));
  return {L.transpose() * a.g * L, pullback(L, a.omega), pullback(L, a.Omega), L.inverse() * a.J * L};
}

ConeGeometry::ConeGeometry(std::string name, int deck_order) : name_(std::move(name)), deck_order_(deck_order) {
  if (deck_order < 1) throw std::invalid_argument("deck order must be positive");
}

CYFields ConeGeometry::ambient(const Vec&) const {
  return {Mat::Identity(6, 6), std_c3::omega0(), std_c3::Omega0(), std_c3::J0()};
}

Mat ConeGeometry::deck_generator() const { return ComplexDilation{1.0, 2.0 * M_PI / deck_order_}.ambient_matrix(); }

double ConeGeometry::link_volume(int n_mu, int n_phi) const { return s5_rule(n_mu, n_phi, deck_order_).volume(); }

GeometryDescriptor ConeGeometry::descriptor() const {
  return {name_, "cone", 0.0, {{"deck_order", double(deck_order_)}}, {{"n_mu", 6}, {"n_phi", 8}}};
}

ConeGeometry flat_c3_cone() { return ConeGeometry("flat_c3", 1); }
ConeGeometry quotient_cone_z3() { return ConeGeometry("c3_mod_z3", 3); }

std::pair<Vec, Vec> radial_and_reeb(int patch, const Vec& y) {
  (void)patch;
  Vec X = Vec::Zero(6), Z = Vec::Zero(6);
  X(5) = y(5);
  Z(0) = 1.0;
  return {X, Z};
}

std::pair<Vec, Vec> radial_and_reeb_ambient(const Vec& x) { return {x, std_c3::J0() * x}; }

KForm contact_form(const Vec& x) {
  KForm a(6, 1);
  const double r2 = x.squaredNorm();
  for (int j = 0; j < 3; ++j) {
    a[2 * j] = -x(2 * j + 1) / r2;
    a[2 * j + 1] = x(2 * j) / r2;
  }
  return a;
}

namespace {

struct FlowPullback {
  LieCheck which;
  // Phi_s^* of the selected field at chart point y.
  CForm operator()(const ChartedGeometry& geom, int patch, const Vec& y, double s) const {
    Vec ys = y;
    Mat D = Mat::Identity(6, 6);
    const bool radial = which == LieCheck::X_omega || which == LieCheck::X_Omega;
    if (radial) {
      ys(5) *= std::exp(s);
      D(5, 5) = std::exp(s);
    } else {
      ys(0) += s;
    }
    const CYFields f = geom.chart_fields(patch, ys);
    const bool two = which == LieCheck::X_omega || which == LieCheck::Z_omega;
    return two ? CForm(pullback(D, f.omega)) : pullback(D, f.Omega);
  }
};

}  // namespace

double lie_derivative_check(const ChartedGeometry& geom, LieCheck which,
                            const std::vector<std::pair<int, Vec>>& samples, double h) {
  const FlowPullback flow{which};
  double worst = 0.0;
  for (const auto& [patch, y] : samples) {
    const CYFields f = geom.chart_fields(patch, y);
    const CForm L = (1.0 / (2.0 * h)) * (flow(geom, patch, y, h) - flow(geom, patch, y, -h));
    CForm expected;
    switch (which) {
      case LieCheck::X_omega: expected = CForm(2.0 * f.omega); break;
      case LieCheck::X_Omega: expected = 3.0 * f.Omega; break;
      case LieCheck::Z_omega: expected = CForm(KForm(6, 2)); break;
      case LieCheck::Z_Omega: expected = cd(0.0, 3.0) * f.Omega; break;
    }
    worst = std::max(worst, form_norm(MetricTensor(f.g), L - expected));
  }
  return worst;
}

Vec ComplexDilation::chart_map(const Vec& y) const {
  Vec out = y;
  out(0) += theta;
  out(5) *= t;
  return out;
}

Mat ComplexDilation::chart_differential() const {
  Mat D = Mat::Identity(6, 6);
  D(5, 5) = t;
  return D;
}

Mat ComplexDilation::ambient_matrix() const {
  Mat M = Mat::Zero(6, 6);
  const double c = t * std::cos(theta), s = t * std::sin(theta);
  for (int j = 0; j < 3; ++j) {
    M(2 * j, 2 * j) = c;
    M(2 * j, 2 * j + 1) = -s;
    M(2 * j + 1, 2 * j) = s;
    M(2 * j + 1, 2 * j + 1) = c;
  }
  return M;
}

ComplexDilation complex_dilation(double t, double theta) {
  if (!(t > 0.0)) throw std::invalid_argument("dilation factor must be positive");
  return {t, theta};
}

CYFields dilation_pullback(const ChartedGeometry& geom, int patch, const Vec& y, const ComplexDilation& d) {
  const Mat D = d.chart_differential();
  const CYFields f = geom.chart_fields(patch, d.chart_map(y));
  return {D.transpose() * f.g * D, pullback(D, f.omega), pullback(D, f.Omega), D.inverse() * f.J * D};
}

// Calabi ALE.

ACGeometry::ACGeometry(double a, double compact_radius) : a_(a), R_(compact_radius), cone_(quotient_cone_z3()) {
  if (!(a > 0.0)) throw std::invalid_argument("resolution scale a must be positive");
}

double ACGeometry::du_minus_one(double rho) const {
  const double phi = std::cbrt(rho * rho * rho + a_ * a_ * a_);
  return a_ * a_ * a_ / ((phi * phi + phi * rho + rho * rho) * rho);
}

double ACGeometry::d2u(double rho) const {
  const double phi = std::cbrt(rho * rho * rho + a_ * a_ * a_);
  return -a_ * a_ * a_ / (phi * phi * rho * rho);
}

namespace {

// Real 6x6 metric of a Hermitian matrix H in interleaved (Re, Im) coordinates.
Mat real_metric(const Eigen::Matrix3cd& H) {
  Mat g(6, 6);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const cd h = H(i, j);
      g(2 * i, 2 * j) = h.real();
      g(2 * i + 1, 2 * j + 1) = h.real();
      g(2 * i, 2 * j + 1) = h.imag();
      g(2 * i + 1, 2 * j) = -h.imag();
    }
  return g;
}

}  // namespace

Mat ACGeometry::metric(const Vec& x) const {
  const double rho = x.squaredNorm();
  const double up = 1.0 + du_minus_one(rho), upp = d2u(rho);
  // h_{i jbar} = u' delta + u'' zbar_i z_j = A + iB; g = [[A, B], [-B, A]] in
  // (x, y) blocks, interleaved here.
  Eigen::Matrix3cd H;
  cd z[3];
  for (int j = 0; j < 3; ++j) z[j] = cd(x(2 * j), x(2 * j + 1));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) H(i, j) = (i == j ? up : 0.0) + upp * std::conj(z[i]) * z[j];
  return real_metric(H);
}


namespace {

// Resolved-chart evaluation in extended precision: the curvature check takes
// second differences of this metric.
using ld = long double;
using cld = std::complex<ld>;

std::array<cld, 3> resolved_to_ambient(int slot, cld xi0, cld root0, const Vec& q) {
  const cld xi(q(4), q(5));
  const cld root = root0 * std::pow(xi / xi0, ld(1) / ld(3));
  std::array<cld, 3> z;
  int c = 0;
  for (int k = 0; k < 3; ++k) {
    z[k] = k == slot ? root : cld(q(2 * c), q(2 * c + 1)) * root;
    if (k != slot) ++c;
  }
  return z;
}

}  // namespace

Vec ACGeometry::ResolvedChart::to_ambient(const Vec& q) const {
  const auto z = resolved_to_ambient(slot, cld(xi0), cld(root0), q);
  Vec x(6);
  for (int k = 0; k < 3; ++k) {
    x(2 * k) = double(z[k].real());
    x(2 * k + 1) = double(z[k].imag());
  }
  return x;
}

Vec ACGeometry::ResolvedChart::from_ambient(const Vec& x) const {
  const cd zj(x(2 * slot), x(2 * slot + 1));
  Vec q(6);
  int c = 0;
  for (int k = 0; k < 3; ++k) {
    if (k == slot) continue;
    const cd w = cd(x(2 * k), x(2 * k + 1)) / zj;
    q(2 * c) = w.real();
    q(2 * c + 1) = w.imag();
    ++c;
  }
  const cd xi = zj * zj * zj;
  q(4) = xi.real();
  q(5) = xi.imag();
  return q;
}

ACGeometry::ResolvedChart ACGeometry::resolved_chart(const Vec& x) const {
  int j = 0;
  for (int k = 1; k < 3; ++k)
    if (std::hypot(x(2 * k), x(2 * k + 1)) > std::hypot(x(2 * j), x(2 * j + 1))) j = k;
  const cd zj(x(2 * j), x(2 * j + 1));
  return {j, zj * zj * zj, zj};
}

Mat ACGeometry::resolved_metric(const ResolvedChart& c, const Vec& q) const {
  const auto z = resolved_to_ambient(c.slot, cld(c.xi0), cld(c.root0), q);
  ld rho = 0;
  for (const cld& v : z) rho += std::norm(v);
  const ld a3 = ld(a_) * a_ * a_;
  const ld phi = std::cbrt(rho * rho * rho + a3);
  const ld up = phi / rho, phip = rho * rho / (phi * phi);
  // Complex Jacobian dz/dq with columns w1, w2, xi.
  const cld xi(q(4), q(5));
  cld D[3][3] = {};
  int col = 0;
  for (int k = 0; k < 3; ++k)
    if (k != c.slot) D[k][col++] = z[c.slot];
  for (int k = 0; k < 3; ++k) D[k][2] = z[k] / (ld(3) * xi);
  // H' = u' <D_perp, D_perp> + phi' v vbar^T / rho with v_a = <D_a, z>; the split
  // avoids the cancellation u' + rho u'' = phi'.
  cld v[3], Dp[3][3];
  for (int a = 0; a < 3; ++a) {
    v[a] = 0;
    for (int i = 0; i < 3; ++i) v[a] += D[i][a] * std::conj(z[i]);
    for (int i = 0; i < 3; ++i) Dp[i][a] = D[i][a] - (v[a] / rho) * z[i];
  }
  Eigen::Matrix3cd H;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      cld s = 0;
      for (int i = 0; i < 3; ++i) s += Dp[i][a] * std::conj(Dp[i][b]);
      const cld h = up * s + phip * v[a] * std::conj(v[b]) / rho;
      H(a, b) = cd(double(h.real()), double(h.imag()));
    }
  return real_metric(H);
}

CYFields ACGeometry::ambient(const Vec& x) const {
  const Mat g = metric(x);
  const Mat J = std_c3::J0();
  return {g, from_matrix<double>(-g * J), std_c3::Omega0(), J};
}

GeometryDescriptor ACGeometry::descriptor() const {
  return {"calabi_ale_o3", "ac", rate(), {{"a", a_}, {"R", R_}, {"deck_order", 3.0}},
          {{"r_min", 0.1}, {"r_max", 10.0}, {"decay_ladder_start", 2.0}, {"decay_ladder_octaves", 5.0}}};
}

double ACGeometry::darboux_min_radius() const { return std::sqrt(a_); }

namespace {

// h(rho) = (1 - a^3/rho^3)^{1/6} and h'(rho).
std::pair<double, double> darboux_profile(double a, double rho) {
  const double q = a * a * a / (rho * rho * rho);
  if (!(q < 1.0)) throw std::domain_error("Darboux map requires |z|^2 > a");
  const double h = std::exp(std::log1p(-q) / 6.0);
  return {h, h * q / (2.0 * rho * (1.0 - q))};
}

}  // namespace

Vec ACGeometry::darboux(const Vec& x) const { return darboux_profile(a_, x.squaredNorm()).first * x; }

Mat ACGeometry::darboux_differential(const Vec& x) const {
  const auto [h, hp] = darboux_profile(a_, x.squaredNorm());
  return h * Mat::Identity(6, 6) + 2.0 * hp * x * x.transpose();
}

CForm ACGeometry::darboux_omega_defect(const Vec& x) const {
  const double rho = x.squaredNorm();
  const auto [h, hp] = darboux_profile(a_, rho);
  const double q = a_ * a_ * a_ / (rho * rho * rho);
  const double h3m1 = std::expm1(0.5 * std::log1p(-q));
  KForm dh(6, 1);
  for (int i = 0; i < 6; ++i) dh[i] = 2.0 * hp * x(i);
  // iota_E Omega0 with E = sum z_j d/dz_j.
  using std_c3::dz;
  static const CForm dz12 = wedge(dz(1), dz(2)), dz02 = wedge(dz(0), dz(2)), dz01 = wedge(dz(0), dz(1));
  const cd z[3] = {cd(x(0), x(1)), cd(x(2), x(3)), cd(x(4), x(5))};
  const CForm iE = z[0] * dz12 - z[1] * dz02 + z[2] * dz01;
  return h3m1 * std_c3::Omega0() + (h * h) * wedge(dh, iE);
}

KForm ACGeometry::omega_primitive(const Vec& x) const {
  const double c = 0.5 * du_minus_one(x.squaredNorm());
  KForm s(6, 1);
  for (int j = 0; j < 3; ++j) {
    s[2 * j] = -c * x(2 * j + 1);
    s[2 * j + 1] = c * x(2 * j);
  }
  return s;
}

ACGeometry calabi_ale_o3(double a) { return ACGeometry(a); }

// T^6 / Z3.

std::vector<Vec> t6_z3_fixed_points(double L) {
  const cd zeta = std::polar(1.0, 2.0 * M_PI / 3.0);
  // Fixed points of zeta on C / L<1, zeta>: (zeta - 1) z in the lattice.
  std::vector<cd> pts;
  for (int m = -3; m <= 3; ++m)
    for (int n = -3; n <= 3; ++n) {
      const cd z = L * (double(m) + double(n) * zeta) / (zeta - 1.0);
      // Coordinates in the basis (L, L zeta), reduced to [0, 1).
      const double t = z.imag() / (L * zeta.imag());
      const double s = z.real() / L - t * zeta.real();
      double sr = s - std::floor(s + 1e-9), tr = t - std::floor(t + 1e-9);
      if (sr > 1.0 - 1e-9) sr = 0.0;
      if (tr > 1.0 - 1e-9) tr = 0.0;
      const cd red = L * (sr + tr * zeta);
      bool seen = false;
      for (const cd& p : pts) seen = seen || std::abs(p - red) < 1e-9 * L;
      if (!seen) pts.push_back(red);
    }
  std::sort(pts.begin(), pts.end(), [](cd a, cd b) {
    return a.real() < b.real() - 1e-12 || (std::abs(a.real() - b.real()) <= 1e-12 && a.imag() < b.imag());
  });
  std::vector<Vec> out;
  for (const cd& a : pts)
    for (const cd& b : pts)
      for (const cd& c : pts) {
        Vec v(6);
        v << a.real(), a.imag(), b.real(), b.imag(), c.real(), c.imag();
        out.push_back(v);
      }
  return out;
}

OrbifoldPatch::OrbifoldPatch(int index, double nu, double amplitude, double lattice_scale)
    : index_(index), nu_(nu), amp_(amplitude), scale_(lattice_scale) {
  const auto pts = t6_z3_fixed_points(lattice_scale);
  if (index < 0 || index >= static_cast<int>(pts.size()))
    throw std::out_of_range("singular point index must be in 0..26");
  if (amplitude != 0.0 && !(nu > 0.0)) throw std::invalid_argument("synthetic perturbation needs rate nu > 0");
  center_ = pts[index];
}

double OrbifoldPatch::chart_radius() const {
  // Half the distance to the nearest other fixed point or lattice translate.
  const cd zeta = std::polar(1.0, 2.0 * M_PI / 3.0);
  const auto pts = t6_z3_fixed_points(scale_);
  double best = scale_;
  for (const Vec& q : pts) {
    double d2 = 0.0;
    for (int j = 0; j < 3; ++j) {
      const cd dz(center_(2 * j) - q(2 * j), center_(2 * j + 1) - q(2 * j + 1));
      double m = std::numeric_limits<double>::infinity();
      for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b) m = std::min(m, std::norm(dz - scale_ * (double(a) + double(b) * zeta)));
      d2 += m;
    }
    if (d2 > 1e-18) best = std::min(best, std::sqrt(d2));
  }
  return 0.5 * best;
}

CForm OrbifoldPatch::A(const Vec& x) const {
  if (amp_ == 0.0) return CForm(6, 2);
  const double r = x.norm();
  static const CForm kappa = wedge(std_c3::dz(0), std_c3::dzbar(1));
  return (amp_ * std::pow(r, nu_ + 1.0)) * kappa;
}

CForm OrbifoldPatch::dA(const Vec& x) const {
  if (amp_ == 0.0) return CForm(6, 3);
  const double r = x.norm();
  KForm xdx(6, 1);
  for (int i = 0; i < 6; ++i) xdx[i] = x(i);
  static const CForm kappa = wedge(std_c3::dz(0), std_c3::dzbar(1));
  return ((nu_ + 1.0) * amp_ * std::pow(r, nu_ - 1.0)) * wedge(xdx, kappa);
}

CForm OrbifoldPatch::Omega(const Vec& x) const { return std_c3::Omega0() + dA(x); }

CYFields OrbifoldPatch::ambient(const Vec& x) const {
  return {Mat::Identity(6, 6), std_c3::omega0(), Omega(x), std_c3::J0()};
}

GeometryDescriptor OrbifoldPatch::descriptor() const {
  return {"t6_z3_patch",
          "conical",
          nu_,
          {{"index", double(index_)}, {"nu", nu_}, {"amplitude", amp_}, {"lattice_scale", scale_}},
          {{"chart_radius", chart_radius()}}};
}

OrbifoldPatch t6_z3_orbifold_patch(int index, double nu, double amplitude, double lattice_scale) {
  return OrbifoldPatch(index, nu, amplitude, lattice_scale);
}

}  // namespace cyg
