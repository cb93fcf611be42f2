#include "cyglue/moser.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cyg {

namespace {

constexpr int kDim = 6;
constexpr int kR = 5;  // radial chart coordinate

KForm drop_radial(const KForm& a) {
  KForm out(a.dim(), a.degree());
  for (int p = 0; p < a.size(); ++p)
    if (!(a.mask(p) & (1u << kR))) out[p] = a[p];
  return out;
}

// eta1 with eta = eta0 + eta1 ^ dr; r is the last coordinate so no sign enters.
KForm radial_part(const KForm& a) {
  KForm out(a.dim(), a.degree() - 1);
  for (int p = 0; p < a.size(); ++p)
    if (a.mask(p) & (1u << kR))
      out[mask_position(a.dim(), std::uint8_t(a.mask(p) & ~(1u << kR)))] = a[p];
  return out;
}

}  // namespace

SplitForm split_form(const FormField& eta_chart, const Point& y, const FdStep& fd, double tol) {
  SplitForm s;
  const KForm eta = eta_chart(y);
  if (eta.dim() != kDim) throw DimensionMismatch("split_form: expects a form on R^6");
  s.eta0 = drop_radial(eta);
  s.eta1 = radial_part(eta);
  if (eta.degree() + 1 <= kDim) s.closedness_residual = exterior_derivative(eta_chart, y, fd).max_abs();
  if (s.closedness_residual > tol) {
    std::ostringstream msg;
    msg << "split_form: |d eta| = " << s.closedness_residual << " exceeds " << tol;
    throw NotClosed(msg.str());
  }
  if (eta.degree() >= 1) {
    const KForm d_eta0 = partial([&](const Point& q) { return drop_radial(eta_chart(q)); }, y, kR, fd);
    const KForm d_eta1 =
        drop_radial(exterior_derivative([&](const Point& q) { return radial_part(eta_chart(q)); }, y, fd));
    s.radial_residual = (d_eta0 + d_eta1).max_abs();
  }
  return s;
}

RadialPrimitive::RadialPrimitive(FormField eta, int degree, double rate, PrimitiveDirection dir, double abs_tol)
    : degree_(degree), rate_(rate), dir_(dir), tol_(abs_tol), complex_(false) {
  eta_ = [eta = std::move(eta)](const Vec& x) -> Eigen::VectorXd { return eta(x).coeffs(); };
  check_rate();
}

RadialPrimitive::RadialPrimitive(CFormField eta, int degree, double rate, PrimitiveDirection dir, double abs_tol)
    : degree_(degree), rate_(rate), dir_(dir), tol_(abs_tol), complex_(true) {
  eta_ = [eta = std::move(eta)](const Vec& x) -> Eigen::VectorXd {
    const CForm v = eta(x);
    Eigen::VectorXd c(2 * v.re.size());
    c << v.re.coeffs(), v.im.coeffs();
    return c;
  };
  check_rate();
}

void RadialPrimitive::check_rate() const {
  if (degree_ < 1 || degree_ > kDim) throw std::invalid_argument("radial primitive: degree out of range");
  std::ostringstream msg;
  if (dir_ == PrimitiveDirection::FromZero && !(rate_ > 0.0)) {
    msg << "radial primitive from zero needs rate > 0, got " << rate_;
    throw RateOutOfRange(msg.str());
  }
  if (dir_ == PrimitiveDirection::FromInfinity && !(rate_ < -degree_)) {
    msg << "radial primitive from infinity needs rate < " << -degree_ << ", got " << rate_;
    throw RateOutOfRange(msg.str());
  }
}

Eigen::VectorXd RadialPrimitive::integrate(const Vec& x) const {
  const int k = degree_;
  std::function<Eigen::VectorXd(double)> f;
  if (dir_ == PrimitiveDirection::FromZero) {
    f = [&](double u) -> Eigen::VectorXd { return std::pow(u, k - 1) * eta_(Vec(u * x)); };
    return integrate_adaptive(f, 0.0, 1.0, tol_).value;
  }
  f = [&](double v) -> Eigen::VectorXd { return std::pow(v, -k - 1) * eta_(Vec(x / v)); };
  return -integrate_adaptive(f, 0.0, 1.0, tol_).value;
}

KForm RadialPrimitive::operator()(const Vec& x) const {
  if (complex_) throw std::logic_error("radial primitive: complex field, use complex()");
  if (x.size() != kDim) throw DimensionMismatch("radial primitive: expects a point of R^6");
  KForm eta(kDim, degree_);
  eta.coeffs() = integrate(x);
  return contract(x, eta);
}

CForm RadialPrimitive::complex(const Vec& x) const {
  if (!complex_) return CForm((*this)(x));
  if (x.size() != kDim) throw DimensionMismatch("radial primitive: expects a point of R^6");
  const Eigen::VectorXd c = integrate(x);
  const int n = binomial(kDim, degree_);
  KForm re(kDim, degree_), im(kDim, degree_);
  re.coeffs() = c.head(n);
  im.coeffs() = c.tail(n);
  return contract(x, CForm(re, im));
}

Vec moser_vector_field(const KForm& sigma, const KForm& omega_t) {
  if (sigma.degree() != 1 || omega_t.degree() != 2 || sigma.dim() != omega_t.dim())
    throw DimensionMismatch("moser_vector_field: expects a 1-form and a 2-form");
  const Mat W = to_matrix(omega_t);
  Eigen::JacobiSVD<Mat> svd(W);
  const auto& s = svd.singularValues();
  if (!(s(s.size() - 1) > 1e-6 * s(0))) {
    std::ostringstream msg;
    msg << "omega_t degenerate: singular value ratio " << s(s.size() - 1) / s(0);
    throw Degenerate(msg.str());
  }
  // iota(X) omega = W^T X, so sigma + W^T X = 0 gives X = W^{-1} sigma.
  return W.partialPivLu().solve(sigma.coeffs());
}

namespace {

Vec flow_velocity(const MoserProblem& p, const Vec& x, double t) {
  const double r = x.norm();
  if (!(r > p.chart_r_min && r < p.chart_r_max)) {
    std::ostringstream msg;
    msg << "Moser trajectory left the chart at |x| = " << r;
    throw DomainEscape(msg.str());
  }
  return moser_vector_field(p.sigma(x), p.omega_V + t * p.eta(x));
}

std::vector<Vec> sample_points(const MoserProblem& p, double lo, double hi) {
  std::vector<Vec> out;
  for (double f : p.radial_fractions)
    for (const Vec& d : p.directions) out.push_back((lo + f * (hi - lo)) * d.normalized());
  return out;
}

}  // namespace

Vec moser_flow_point(const MoserProblem& p, const Vec& x, int steps) {
  if (steps < 1) throw std::invalid_argument("moser flow: steps must be positive");
  const double dt = 1.0 / steps;
  Vec y = x;
  for (int n = 0; n < steps; ++n) {
    const double t = n * dt;
    const Vec k1 = flow_velocity(p, y, t);
    const Vec k2 = flow_velocity(p, y + 0.5 * dt * k1, t + 0.5 * dt);
    const Vec k3 = flow_velocity(p, y + 0.5 * dt * k2, t + 0.5 * dt);
    const Vec k4 = flow_velocity(p, y + dt * k3, t + dt);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  flow_velocity(p, y, 1.0);
  return y;
}

KForm GaugePerturbation::A(const Vec& x) const {
  const double r = x.norm();
  KForm out = KForm::monomial(kDim, {b}, std::pow(r, nu) * x(a));
  for (int c = 0; c < kDim; ++c) out[c] -= std::pow(r, nu - 2.0) * x(a) * x(b) * x(c);
  return amplitude * out;
}

KForm GaugePerturbation::eta(const Vec& x) const {
  const double r = x.norm();
  KForm xdx(kDim, 1);
  xdx.coeffs() = x;
  const double s = std::pow(r, nu - 2.0);
  KForm out = std::pow(r, nu) * KForm::monomial(kDim, {a, b});
  out += (nu + 1.0) * s * x(a) * wedge(xdx, KForm::monomial(kDim, {b}));
  out += s * x(b) * wedge(xdx, KForm::monomial(kDim, {a}));
  return amplitude * out;
}

MoserResult moser_integrate(const MoserProblem& p, const MoserOptions& opt) {
  if (p.directions.empty() || p.radial_fractions.empty())
    throw std::invalid_argument("moser_integrate: empty sample set");
  double lo = p.r_min, hi = p.r_max;
  for (int halving = 0;; ++halving) {
    MoserResult res;
    res.samples = sample_points(p, lo, hi);
    res.shrunk_domain = {lo, hi};
    res.halvings = halving;
    const int n = static_cast<int>(res.samples.size());
    res.images.assign(n, Vec());
    std::vector<double> residual(n, 0.0), shift(n, 0.0);
    const MetricTensor gV(Mat::Identity(kDim, kDim));
    bool shrink = false;
    try {
      parallel_for(n, opt.workers, [&](int i) {
        const Vec& x = res.samples[i];
        const Vec img = moser_flow_point(p, x, opt.steps);
        const FdStep fd = relative_step(x, opt.fd_scale, 4);
        const auto flow = [&](const Point& q) -> Point { return moser_flow_point(p, Vec(q), opt.steps); };
        Mat Dpsi(kDim, kDim);
        for (int c = 0; c < kDim; ++c) Dpsi.col(c) = partial(flow, Point(x), c, fd);
        const KForm pulled = pullback(Dpsi, KForm(p.omega_V + p.eta(img)));
        residual[i] = form_norm(gV, KForm(pulled - p.omega_V));
        shift[i] = (img - x).norm();
        res.images[i] = img;
      });
    } catch (const DomainEscape&) {
      if (halving >= opt.max_halvings) throw;
      shrink = true;
    } catch (const Degenerate&) {
      if (halving >= opt.max_halvings) throw;
      shrink = true;
    }
    if (shrink) {
      if (p.shrink_toward_zero) hi = lo + 0.5 * (hi - lo);
      else lo = 2.0 * lo;
      continue;
    }
    res.pullback_residual = *std::max_element(residual.begin(), residual.end());
    res.max_displacement = *std::max_element(shift.begin(), shift.end());
    return res;
  }
}

}  // namespace cyg
