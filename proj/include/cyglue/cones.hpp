// Calabi-Yau cones over S^5 and S^5/Z3, the Calabi ALE metric on O(-3) -> CP^2,
// and flat T^6/Z3 orbifold patches.
//
// Every model is written on C^3 = R^6 (coordinates x1,y1,x2,y2,x3,y3) and
// carries cone charts y = (phi, a1, b1, a2, b2, r) over six Hopf patches: on
// patch p the slot j = p/2 has z_j != 0, w = z_k / z_j in C^2 and
// z = r e^{i phi} (1, w) / sqrt(1 + |w|^2) with (1, w) placed from slot j.
#pragma once

#include "cyglue/forms.hpp"

#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace cyg {

struct CYFields {
  Mat g;
  KForm omega;
  CForm Omega;
  Mat J;
};

namespace hopf {
constexpr int kPatches = 6;
Vec chart_to_ambient(int patch, const Vec& y);
// Columns are d x / d y_c.
Mat chart_differential(int patch, const Vec& y);
Vec ambient_to_chart(int patch, const Vec& x);
int best_patch(const Vec& x);
}  // namespace hopf

class ChartedGeometry {
 public:
  virtual ~ChartedGeometry() = default;
  virtual CYFields ambient(const Vec& x) const = 0;
  // Pullback of the ambient fields through a cone chart.
  CYFields chart_fields(int patch, const Vec& y) const;
};

struct GeometryDescriptor {
  std::string name;
  std::string kind;  // cone | ac | conical
  double rate = 0.0;
  std::vector<std::pair<std::string, double>> parameters;
  std::vector<std::pair<std::string, double>> sampling_hints;
};

class ConeGeometry : public ChartedGeometry {
 public:
  ConeGeometry(std::string name, int deck_order);
  CYFields ambient(const Vec& x) const override;

  const std::string& name() const { return name_; }
  int deck_order() const { return deck_order_; }
  // z -> zeta z with zeta = e^{2 pi i / deck_order}.
  Mat deck_generator() const;
  double link_volume(int n_mu = 6, int n_phi = 8) const;
  GeometryDescriptor descriptor() const;

 private:
  std::string name_;
  int deck_order_;
};

ConeGeometry flat_c3_cone();
ConeGeometry quotient_cone_z3();

// X = r d/dr and Z = J_V X in chart coordinates, and the ambient versions
// (Euler field x and J0 x).
std::pair<Vec, Vec> radial_and_reeb(int patch, const Vec& y);
std::pair<Vec, Vec> radial_and_reeb_ambient(const Vec& x);
// Contact form alpha = sum (x dy - y dx) / r^2, so iota(X) omega_V = r^2 alpha.
KForm contact_form(const Vec& x);

enum class LieCheck { X_omega, X_Omega, Z_omega, Z_Omega };
// sup over samples of |L_V T - expected|_{g_V}, with L_V T from central
// differences of flow pullbacks at flow step h. Expected: 2 omega, 3 Omega,
// 0, 3i Omega.
double lie_derivative_check(const ChartedGeometry& geom, LieCheck which,
                            const std::vector<std::pair<int, Vec>>& samples, double h);

// lambda(gamma, r) = (exp(theta Z) gamma, t r); on C^3 it is z -> t e^{i theta} z.
struct ComplexDilation {
  double t = 1.0;
  double theta = 0.0;
  Vec chart_map(const Vec& y) const;
  Mat chart_differential() const;
  Mat ambient_matrix() const;
  ComplexDilation compose(const ComplexDilation& o) const { return {t * o.t, theta + o.theta}; }
};
ComplexDilation complex_dilation(double t, double theta);
CYFields dilation_pullback(const ChartedGeometry& geom, int patch, const Vec& y, const ComplexDilation& d);

// Ricci-flat Kahler metric omega_Y = (i/2) dd^c u(rho), rho = |z|^2, on
// (C^3 \ 0)/Z3 with rho u' = (rho^3 + a^3)^{1/3}, Omega_Y = Omega0. Upsilon is
// the identity in these coordinates.
class ACGeometry : public ChartedGeometry {
 public:
  explicit ACGeometry(double a = 1.0, double compact_radius = 1.0);
  CYFields ambient(const Vec& x) const override;

  double a() const { return a_; }
  double rate() const { return -6.0; }
  double compact_radius() const { return R_; }
  const ConeGeometry& modelled_cone() const { return cone_; }
  GeometryDescriptor descriptor() const;

  // u'(rho) - 1 and u''(rho), cancellation-free.
  double du_minus_one(double rho) const;
  double d2u(double rho) const;
  Mat metric(const Vec& x) const;

  // Holomorphic chart q = (w1, w2, xi) across the zero section CP^2:
  // z_j = xi^{1/3}, z_k = w_k xi^{1/3}, with the cube-root branch continuous
  // around the base point. The metric there is well conditioned for small rho.
  struct ResolvedChart {
    int slot = 0;
    std::complex<double> xi0, root0;
    Vec to_ambient(const Vec& q) const;
    Vec from_ambient(const Vec& x) const;
  };
  ResolvedChart resolved_chart(const Vec& x) const;
  Mat resolved_metric(const ResolvedChart& c, const Vec& q) const;

  // psi(z) = h(rho) z with h = (1 - a^3/rho^3)^{1/6}, so psi^* omega_Y = omega_V
  // for |z|^2 > a.
  double darboux_min_radius() const;
  Vec darboux(const Vec& x) const;
  Mat darboux_differential(const Vec& x) const;
  // psi^* Omega_Y - Omega_V = (h^3 - 1) Omega0 + h^2 dh ^ iota_E Omega0.
  CForm darboux_omega_defect(const Vec& x) const;
  // Primitive 1/2 (u' - 1) sum (x dy - y dx) of omega_Y - omega_V.
  KForm omega_primitive(const Vec& x) const;

 private:
  double a_, R_;
  ConeGeometry cone_;
};

ACGeometry calabi_ale_o3(double a = 1.0);

// Fixed points of z -> zeta z on T^6 = (C / L<1, zeta>)^3, lexicographic.
std::vector<Vec> t6_z3_fixed_points(double lattice_scale);

// Flat orbifold chart Phi(x) = p + x around one of the 27 fixed points, with
// the optional synthetic variant Phi^* Omega0 = Omega_V + dA,
// A = r^{nu+1} amplitude dz1 ^ dzbar2.
class OrbifoldPatch : public ChartedGeometry {
 public:
  OrbifoldPatch(int index, double nu, double amplitude, double lattice_scale);
  CYFields ambient(const Vec& x) const override;

  int index() const { return index_; }
  double nu() const { return nu_; }
  double amplitude() const { return amp_; }
  const Vec& center() const { return center_; }
  double lattice_scale() const { return scale_; }
  // Radius of the embedded ball around the fixed point.
  double chart_radius() const;
  GeometryDescriptor descriptor() const;

  CForm A(const Vec& x) const;
  CForm dA(const Vec& x) const;
  // Omega_V + dA.
  CForm Omega(const Vec& x) const;

 private:
  int index_;
  double nu_, amp_, scale_;
  Vec center_;
};

constexpr double kDefaultLatticeScale = 4.0;
OrbifoldPatch t6_z3_orbifold_patch(int index, double nu = 0.0, double amplitude = 0.0,
                                   double lattice_scale = kDefaultLatticeScale);

}  // namespace cyg
