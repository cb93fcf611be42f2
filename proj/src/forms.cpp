#include "cyglue/forms.hpp"

#include <mutex>

namespace cyg {

namespace {

struct Tables {
  std::array<std::array<std::vector<std::uint8_t>, 15>, kMaxDim + 1> masks;
  std::array<std::array<int, 256>, kMaxDim + 1> pos{};

  Tables() {
    for (int n = 1; n <= kMaxDim; ++n) {
      // Lexicographic order of increasing index tuples.
      for (int k = 0; k <= n; ++k) {
        std::vector<int> idx(k);
        for (int i = 0; i < k; ++i) idx[i] = i;
        while (true) {
          std::uint8_t m = 0;
          for (int i : idx) m |= std::uint8_t(1u << i);
          pos[n][m] = static_cast<int>(masks[n][k].size());
          masks[n][k].push_back(m);
          int i = k - 1;
          while (i >= 0 && idx[i] == n - k + i) --i;
          if (i < 0) break;
          ++idx[i];
          for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
      }
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

}  // namespace

const std::vector<std::uint8_t>& basis_masks(int n, int k) {
  static const std::vector<std::uint8_t> empty;
  if (n < 1 || n > kMaxDim || k < 0 || k > n) return empty;
  return tables().masks[n][k];
}

int mask_position(int n, std::uint8_t mask) { return tables().pos[n][mask]; }

int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double covariant_tensor_norm(const MetricTensor& g, const Mat& h) {
  const Mat a = g.inverse() * h;
  return std::sqrt(std::max(0.0, (a * a).trace()));
}

double contravariant_tensor_norm(const MetricTensor& g, const Mat& k) {
  const Mat a = g.matrix() * k;
  return std::sqrt(std::max(0.0, (a * a).trace()));
}

namespace std_c3 {

CForm dz(int j) { return {KForm::monomial(6, {2 * j}), KForm::monomial(6, {2 * j + 1})}; }
CForm dzbar(int j) { return dz(j).conj(); }

KForm omega0() {
  static const KForm w = KForm::monomial(6, {0, 1}) + KForm::monomial(6, {2, 3}) + KForm::monomial(6, {4, 5});
  return w;
}

CForm Omega0() {
  static const CForm W = wedge(wedge(dz(0), dz(1)), dz(2));
  return W;
}

Mat J0() {
  Mat J = Mat::Zero(6, 6);
  for (int j = 0; j < 3; ++j) {
    J(2 * j + 1, 2 * j) = 1.0;
    J(2 * j, 2 * j + 1) = -1.0;
  }
  return J;
}

}  // namespace std_c3

}  // namespace cyg
