// G2-structures on R^7 = <ds> + R^6 and the torsion carrier psi = phi - *_g chi.
#pragma once

#include "cyglue/forms.hpp"
#include "cyglue/su3.hpp"

#include <stdexcept>

namespace cyg {

struct NotPositive3Form : std::domain_error {
  using std::domain_error::domain_error;
};

struct G2Structure {
  KForm phi;
  MetricTensor g;
  KForm star_phi;
};

struct TorsionSample {
  KForm psi;
  double psi_norm = 0.0;
  double dstar_phi_proxy = -1.0;  // negative when no chart is attached
  // Right-hand side ingredients of |psi|_g <= C2 (|w - w'|^2 + |w - w'| + |theta2 - theta2'|).
  double omega_defect = 0.0;
  double theta2_defect = 0.0;
  double bound_rhs() const { return omega_defect * omega_defect + omega_defect + theta2_defect; }
};

struct G2Comparison {
  double phi = 0.0;          // |phi - phi'|_{g'}
  double metric = 0.0;       // |g - g'|_{g'}
  double inverse = 0.0;      // |g^{-1} - g'^{-1}|_{g'}
  double star_vs_chi = 0.0;  // |*_g phi - chi|_{g'}
};

namespace g2 {
KForm phi0();
KForm star_phi0();
}  // namespace g2

// B(u,v) vol = (1/6) iota_u phi ^ iota_v phi ^ phi, g = det(B)^{-1/9} B.
MetricTensor metric_from_phi(const KForm& phi);
G2Structure g2_structure(const KForm& phi);

// phi = ds ^ omega + theta1, chi = omega^2/2 - ds ^ theta2 on R^7 with s = x_0.
std::pair<KForm, KForm> build_phi_chi(const KForm& omega, const KForm& theta1, const KForm& theta2);

TorsionSample torsion_psi(const KForm& omega, const CForm& Omega);

// Comparison quantities between two G2 structures; chi defaults to *_{g'} phi'.
G2Comparison compare_g2(const KForm& phi, const KForm& phi_prime, const MetricTensor& g_prime);
G2Comparison compare_g2(const KForm& phi, const KForm& phi_prime, const MetricTensor& g_prime, const KForm& chi);

// ds^2 + g_M on R^7.
MetricTensor product_metric(const MetricTensor& g6);

}  // namespace cyg
