#include "cyglue/gluing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cyg {

namespace {

double smooth_step(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

KForm position_form(const Vec& x) {
  KForm v(6, 1);
  v.coeffs() = x;
  return v;
}

const MetricTensor& flat_metric() {
  static const MetricTensor g = MetricTensor::euclidean(6);
  return g;
}

}  // namespace

double cutoff_F(double s) {
  if (s <= 1.0) return 0.0;
  if (s >= 2.0) return 1.0;
  const double a = smooth_step(s - 1.0), b = smooth_step(2.0 - s);
  return a / (a + b);
}

double cutoff_dF(double s) {
  if (s <= 1.0 || s >= 2.0) return 0.0;
  const double u = s - 1.0, v = 2.0 - s;
  const double a = smooth_step(u), b = smooth_step(v);
  const double da = a / (u * u), db = -b / (v * v);
  return (da * b - a * db) / ((a + b) * (a + b));
}

double default_alpha(double nu) { return 0.5 * (6.0 + nu) / (3.0 + nu); }

double predicted_kappa(double nu, double lambda, double alpha) {
  return std::min((1.0 - alpha) * (-3.0 - lambda), alpha * (3.0 + nu) - 3.0);
}

double predicted_gamma(double nu, double lambda, double alpha) {
  return std::min(-lambda * (1.0 - alpha), alpha * nu);
}

double GluingConfig::alpha_value() const { return std::isnan(alpha) ? default_alpha(nu) : alpha; }

void GluingConfig::validate() const {
  const double a = alpha_value();
  std::ostringstream msg;
  if (!(t > 0.0)) msg << "t must be positive; ";
  if (!(a > 0.0 && a < 1.0)) msg << "alpha must lie in (0, 1); ";
  if (!(nu > 0.0)) msg << "nu must be positive; ";
  if (!(lambda < -3.0)) msg << "lambda must be below -3; ";
  if (t > 0.0 && a > 0.0 && a < 1.0) {
    const double ta = std::pow(t, a);
    if (!(t * R < ta && 2.0 * ta < eps)) msg << "admissibility tR < t^alpha < 2t^alpha < eps fails; ";
  }
  if (grid.n_r < 1 || grid.n_mu < 1 || grid.n_phi < 1 || hessian_grid.n_r < 1) msg << "grid sizes must be positive; ";
  const std::string s = msg.str();
  if (!s.empty()) throw ConfigViolation(s.substr(0, s.size() - 2));
}

CorrectionForms correction_forms(const GluingConfig& cfg, const ConeGeometry& cone, const ACGeometry& ac,
                                 const OrbifoldPatch& conical) {
  if (cone.deck_order() != ac.modelled_cone().deck_order())
    throw ConfigViolation("conical patch and AC space model different cones");
  if (!(cfg.lambda < -3.0) || !(ac.rate() < -3.0)) {
    std::ostringstream msg;
    msg << "AC rate " << std::min(cfg.lambda, ac.rate()) << " is not below -3";
    throw RateOutOfRange(msg.str());
  }
  CorrectionForms out;
  out.eta_A = [conical](const Point& x) { return conical.dA(Vec(x)); };
  out.eta_B = [ac](const Point& x) { return ac.darboux_omega_defect(Vec(x)); };
  out.rate_B = ac.rate();
  if (conical.amplitude() == 0.0) {
    out.rate_A = std::numeric_limits<double>::infinity();
    out.A = [](const Point&) { return CForm(6, 2); };
  } else {
    out.rate_A = conical.nu();
    auto A = std::make_shared<RadialPrimitive>(out.eta_A, 3, conical.nu(), PrimitiveDirection::FromZero);
    out.A = [A](const Point& x) { return A->complex(Vec(x)); };
  }
  auto B = std::make_shared<RadialPrimitive>(out.eta_B, 3, ac.rate(), PrimitiveDirection::FromInfinity);
  out.B = [B](const Point& x) { return B->complex(Vec(x)); };
  return out;
}

const char* region_name(Region r) {
  switch (r) {
    case Region::QOnly: return "Q-only";
    case Region::Neck: return "neck";
    case Region::POnly: return "P-only";
  }
  return "?";
}

GluedStructure::GluedStructure(GluingConfig cfg, std::shared_ptr<const CorrectionForms> forms,
                               const ConeGeometry& cone)
    : cfg_(std::move(cfg)), forms_(std::move(forms)), deck_(cone.deck_order()) {
  cfg_.validate();
  inner_ = std::pow(cfg_.t, cfg_.alpha_value());
}

Region GluedStructure::region(const Vec& x) const {
  const double r = x.norm();
  if (r >= 2.0 * inner_) return Region::QOnly;
  if (r <= inner_) return Region::POnly;
  return Region::Neck;
}

KForm GluedStructure::omega(const Vec&) const { return std_c3::omega0(); }

CForm GluedStructure::Omega_Q(const Vec& x) const { return std_c3::Omega0() + forms_->eta_A(x); }

CForm GluedStructure::Omega_P(const Vec& x) const {
  return std_c3::Omega0() + forms_->eta_B(Point(x / cfg_.t));
}

CForm GluedStructure::Omega(const Vec& x) const {
  const double r = x.norm();
  const double s = r / inner_;
  if (s >= 2.0) return Omega_Q(x);
  if (s <= 1.0) return Omega_P(x);
  const double F = cutoff_F(s);
  const double t = cfg_.t;
  const Point xs = x / t;
  CForm out = std_c3::Omega0() + F * forms_->eta_A(x) + (1.0 - F) * forms_->eta_B(xs);
  const KForm dF = (cutoff_dF(s) / (inner_ * r)) * position_form(x);
  out += wedge(dF, CForm(forms_->A(x) - t * forms_->B(xs)));
  return out;
}

GluedStructure build_glued(const GluingConfig& cfg, const ConeGeometry& cone, const ACGeometry& ac,
                           const OrbifoldPatch& conical) {
  cfg.validate();
  if (conical.amplitude() != 0.0 && std::abs(conical.nu() - cfg.nu) > 1e-12)
    throw ConfigViolation("configured nu differs from the conical data rate");
  if (conical.chart_radius() < cfg.eps) throw ConfigViolation("neck outer scale exceeds the orbifold chart radius");
  const double inner_Y = std::pow(cfg.t, cfg.alpha_value() - 1.0);
  if (!(cfg.R > ac.darboux_min_radius() && inner_Y > ac.darboux_min_radius()))
    throw ConfigViolation("neck reaches inside the Darboux radius of the AC space");
  auto forms = std::make_shared<const CorrectionForms>(correction_forms(cfg, cone, ac, conical));
  return GluedStructure(cfg, forms, cone);
}

NeckReport nearly_cy_on_neck(const GluedStructure& glued, const std::vector<Vec>& samples) {
  NeckReport out;
  auto& m = out.max_defects;
  m.stable = true;
  m.within_eps0 = true;
  for (const Vec& x : samples) {
    auto describe = [&](const std::exception& e) {
      std::ostringstream msg;
      msg << e.what() << " at sample (";
      for (int i = 0; i < x.size(); ++i) msg << (i ? ", " : "") << x(i);
      msg << ") with t = " << glued.config().t;
      return msg.str();
    };
    try {
      const auto [s, rep] = recover_su3(glued.omega(x), glued.Omega(x));
      (void)s;
      m.defect_theta2 = std::max(m.defect_theta2, rep.defect_theta2);
      m.defect_omega20 = std::max(m.defect_omega20, rep.defect_omega20);
      m.defect_normalization = std::max(m.defect_normalization, rep.defect_normalization);
      m.f_deviation = std::max(m.f_deviation, rep.f_deviation);
      m.within_eps0 = m.within_eps0 && rep.within_eps0;
    } catch (const NotStable& e) {
      throw NotStable(describe(e));
    } catch (const NotPositive& e) {
      throw NotPositive(describe(e));
    }
    ++out.samples;
  }
  out.all_stable = true;
  return out;
}

std::vector<Vec> default_curvature_samples() {
  std::vector<Vec> out;
  const double radii[] = {0.2, 0.5, 1.0};
  Vec d1(6), d2(6), d3(6);
  d1 << 1.0, 0.0, 0.0, 0.0, 0.0, 0.0;
  d2 << 0.6, 0.2, -0.3, 0.5, 0.1, 0.4;
  d3 << 0.3, -0.4, 0.5, 0.2, -0.6, 0.3;
  for (double r : radii)
    for (const Vec& d : {d1, d2, d3}) out.push_back(r * d.normalized());
  return out;
}

double p_side_curvature(const ACGeometry& ac, double t, const std::vector<Vec>& samples) {
  // The chart q(x / t) on P_t carries the components t^2 G_Y(q).
  double sup = 0.0;
  for (const Vec& y : samples) {
    const auto chart = ac.resolved_chart(y);
    const Point q = chart.from_ambient(y);
    const MetricField g = [&](const Point& p) -> Mat { return (t * t) * ac.resolved_metric(chart, Vec(p)); };
    const Curvature c = riemann_ricci(g, q, relative_step(q, 5e-4, 4, 0.3));
    sup = std::max(sup, c.riemann_norm());
  }
  return sup;
}

PowerFit curvature_scaling_check(const ACGeometry& ac, const std::vector<double>& t_list,
                                 const std::vector<Vec>& samples) {
  std::vector<double> v;
  for (double t : t_list) v.push_back(p_side_curvature(ac, t, samples));
  return fit_power_law(t_list, v, 3, 1.0);
}

const std::array<const char*, DefectRow::kColumns>& DefectRow::column_names() {
  static const std::array<const char*, kColumns> names = {
      "t",         "neck_sup",           "omega_c0",       "omega_l2",        "im_Omega_c0",
      "im_Omega_l2", "nabla_omega_dev_c0", "nabla_omega_dev_l12", "nabla_omega_l12", "nabla_re_Omega_l12",
      "nabla2_omega_dev_c0", "neck_volume", "curvature_sup"};
  return names;
}

std::array<double, DefectRow::kColumns> DefectRow::values() const {
  return {t,         neck_sup,        omega_c0,           omega_l2,  im_omega_c0,  im_omega_l2, nabla_c0,
          nabla_l12, nabla_omega_l12, nabla_re_omega_l12, nabla2_c0, neck_volume, curvature_sup};
}

std::string DefectScan::csv() const {
  std::string out;
  const auto& names = DefectRow::column_names();
  for (int c = 0; c < DefectRow::kColumns; ++c) {
    out += c ? "," : "";
    out += names[c];
  }
  out += "\n";
  char buf[40];
  for (const DefectRow& r : rows) {
    const auto v = r.values();
    for (int c = 0; c < DefectRow::kColumns; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", v[c]);
      out += c ? "," : "";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::vector<double> DefectScan::column(int c) const {
  std::vector<double> out;
  for (const DefectRow& r : rows) out.push_back(r.values()[c]);
  return out;
}

namespace {

struct NeckSample {
  CForm Omega;
  SU3Structure s;
  NearlyCYReport rep;
};

NeckSample neck_sample(const GluedStructure& glued, const Vec& x) {
  const CForm W = glued.Omega(x);
  auto [s, rep] = recover_su3(glued.omega(x), W);
  return {W, s, rep};
}

// Metric g_t' with omega_t - omega_t', omega_t and Re Omega_t.
TensorBundle neck_bundle(const GluedStructure& glued, const Vec& x) {
  const NeckSample n = neck_sample(glued, x);
  const KForm w = glued.omega(x);
  return {n.s.g_M.matrix(), {to_tensor(KForm(w - n.s.omega_prime)), to_tensor(w), to_tensor(n.Omega.re)}};
}

DefectRow scan_row(const GluedStructure& glued, const ACGeometry& ac, double& l2_err, double& l12_err,
                   double& c0_delta) {
  const GluingConfig& cfg = glued.config();
  const double a = glued.neck_inner(), b = glued.neck_outer();
  const BundleField bundle = [&](const Point& p) { return neck_bundle(glued, Vec(p)); };

  auto pointwise = [&](const Vec& x) {
    const NeckSample n = neck_sample(glued, x);
    const MetricTensor& g = n.s.g_M;
    const auto nab = covariant_derivatives(bundle, Point(x), relative_step(x, cfg.fd_scale, 2));
    return std::vector<double>{form_norm(flat_metric(), CForm(n.Omega - std_c3::Omega0())),
                               form_norm(g, KForm(glued.omega(x) - n.s.omega_prime)),
                               n.rep.defect_theta2,
                               tensor_norm(g, nab[0], 2),
                               tensor_norm(g, nab[1], 2),
                               tensor_norm(g, nab[2], 3)};
  };
  const auto rep = region_norms_multi(pointwise, 6, a, b, cfg.grid, cfg.workers);

  // nabla^2 C0 on the coarser Hessian grid.
  const ConeRule hrule = cone_rule(a, b, cfg.hessian_grid);
  const BundleField dev_bundle = [&](const Point& p) {
    TensorBundle tb = neck_bundle(glued, Vec(p));
    tb.fields.resize(1);
    return tb;
  };
  std::vector<double> hess(hrule.points.size(), 0.0);
  parallel_for(static_cast<int>(hrule.points.size()), cfg.workers, [&](int i) {
    const Vec& x = hrule.points[i];
    const FdStep fd = relative_step(x, cfg.hessian_fd_scale, 2);
    const BundleField nb = nabla_bundle(dev_bundle, fd);
    const auto n2 = covariant_derivatives(nb, Point(x), fd);
    hess[i] = tensor_norm(neck_sample(glued, x).s.g_M, n2[0], 2);
  });

  DefectRow row;
  row.t = cfg.t;
  row.neck_sup = rep[0].c0;
  row.omega_c0 = rep[1].c0;
  row.omega_l2 = rep[1].l2;
  row.im_omega_c0 = rep[2].c0;
  row.im_omega_l2 = rep[2].l2;
  row.nabla_c0 = rep[3].c0;
  row.nabla_l12 = rep[3].l12;
  row.nabla_omega_l12 = rep[4].l12;
  row.nabla_re_omega_l12 = rep[5].l12;
  row.nabla2_c0 = *std::max_element(hess.begin(), hess.end());
  row.neck_volume = rep[0].volume;
  row.curvature_sup = p_side_curvature(ac, cfg.t, default_curvature_samples());
  l2_err = std::max(rep[1].l2_error, rep[2].l2_error);
  l12_err = std::max({rep[3].l12_error, rep[4].l12_error, rep[5].l12_error});
  c0_delta = std::max({rep[0].c0_delta, rep[1].c0_delta, rep[2].c0_delta, rep[3].c0_delta});
  return row;
}

}  // namespace

DefectScan defect_scan(const GluingConfig& tmpl, const std::vector<double>& t_list, const ConeGeometry& cone,
                       const ACGeometry& ac, const OrbifoldPatch& conical) {
  if (t_list.size() < 4) throw InsufficientData("defect scan needs at least 4 values of t");
  for (std::size_t i = 1; i < t_list.size(); ++i)
    if (!(t_list[i] < t_list[i - 1])) throw ConfigViolation("t_list must be strictly decreasing");
  if (std::log2(t_list.front() / t_list.back()) < 2.0 - 1e-9)
    throw InsufficientData("t_list must span at least 2 octaves");
  std::vector<GluedStructure> glued;
  for (double t : t_list) {
    GluingConfig c = tmpl;
    c.t = t;
    glued.push_back(build_glued(c, cone, ac, conical));
  }
  DefectScan scan;
  for (const GluedStructure& g : glued) {
    double l2e = 0, l12e = 0, c0d = 0;
    scan.rows.push_back(scan_row(g, ac, l2e, l12e, c0d));
    scan.l2_error.push_back(l2e);
    scan.l12_error.push_back(l12e);
    scan.c0_delta.push_back(c0d);
  }
  return scan;
}

Rational exact_alpha(const Rational& nu) { return Rational(1, 2) * (6 + nu) / (3 + nu); }

Rational exact_kappa(const Rational& nu, const Rational& lambda, const Rational& alpha) {
  const Rational p = (1 - alpha) * (-3 - lambda);
  const Rational q = alpha * (3 + nu) - 3;
  return p < q ? p : q;
}

std::vector<LedgerFamily> hypothesis_ledger(const Rational& nu, const Rational& lambda, const Rational& alpha,
                                            const Rational& kappa) {
  const Rational P = -lambda * (1 - alpha);  // AC side C0 exponent
  const Rational Q = alpha * nu;             // conical side C0 exponent
  auto fam = [&](std::string name, const Rational& shift, const Rational& hyp) {
    return LedgerFamily{std::move(name), {P + shift, Q + shift}, hyp};
  };
  return {fam("L2", 3 * alpha, 3 + kappa), fam("nabla_L12", -alpha / 2, Rational(-1, 2) + kappa),
          fam("C0", 0, kappa), fam("nabla_C0", -alpha, kappa - 1), fam("nabla2_C0", -2 * alpha, kappa - 2)};
}

bool ledger_implication_holds(const Rational& nu, const Rational& lambda, const Rational& alpha,
                              const Rational& kappa) {
  const auto fams = hypothesis_ledger(nu, lambda, alpha, kappa);
  if (!fams[0].holds()) return true;
  return std::all_of(fams.begin() + 1, fams.end(), [](const LedgerFamily& f) { return f.holds(); });
}

Thm52Verdict thm52_predict(const GluingConfig& cfg) {
  Thm52Verdict v;
  const Rational nu(cfg.nu), lambda(cfg.lambda);
  const Rational alpha = std::isnan(cfg.alpha) ? exact_alpha(nu) : Rational(cfg.alpha);
  const Rational kappa = exact_kappa(nu, lambda, alpha);
  v.alpha = alpha.convert_to<double>();
  v.kappa = kappa.convert_to<double>();
  v.gamma = predicted_gamma(cfg.nu, cfg.lambda, v.alpha);
  v.families = hypothesis_ledger(nu, lambda, alpha, kappa);
  v.symbolic_pass = kappa > 0 && std::all_of(v.families.begin(), v.families.end(),
                                             [](const LedgerFamily& f) { return f.holds(); });
  return v;
}

Thm52Verdict thm52_check(const DefectScan& scan, const GluingConfig& cfg) {
  Thm52Verdict v = thm52_predict(cfg);
  const double k = v.kappa, a = v.alpha, g = v.gamma;
  std::vector<double> t;
  for (const DefectRow& r : scan.rows) t.push_back(r.t);
  struct Spec {
    int column;
    double required, predicted;
  };
  const Spec specs[] = {{3, 3.0 + k, g + 3.0 * a},  {5, 3.0 + k, g + 3.0 * a},  {2, k, g},
                        {4, k, g},                  {7, -0.5 + k, g - 0.5 * a}, {8, -0.5 + k, g - 0.5 * a},
                        {9, -0.5 + k, g - 0.5 * a}, {6, k - 1.0, g - a},        {10, k - 2.0, g - 2.0 * a}};
  v.measured_pass = true;
  for (const Spec& s : specs) {
    MeasuredCheck m;
    m.column = DefectRow::column_names()[s.column];
    m.measured = fit_power_law(t, scan.column(s.column)).exponent;
    m.required = s.required;
    m.predicted = s.predicted;
    m.pass = m.measured >= s.required - kExponentTolerance;
    v.measured_pass = v.measured_pass && m.pass;
    v.measured.push_back(m);
  }
  return v;
}

}  // namespace cyg
