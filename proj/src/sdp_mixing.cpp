#include "km/sdp_mixing.hpp"

#include <cmath>
#include <stdexcept>

#include "km/errors.hpp"
#include "km/rng.hpp"

namespace km {

void SdpConfig::validate() const {
  if (rank != 0 && rank < 2)
    throw std::invalid_argument("sdp: rank must be 0 (auto) or >= 2");
  if (!(tol > 0.0)) throw std::invalid_argument("sdp: tol must be > 0");
  if (max_sweeps < 1)
    throw std::invalid_argument("sdp: max_sweeps must be >= 1");
}

int SdpConfig::effective_rank(int n) const {
  if (rank != 0) return rank;
  return static_cast<int>(std::ceil(std::sqrt(2.0 * n))) + 1;
}

double sdp_objective(const Matrix& C, const GramFactor& g) {
  // tr(C V'V) = sum_{jk} C_{jk} <v_j, v_k>
  return (g.V * C).cwiseProduct(g.V).sum();
}

void row_update(GramFactor& g, const Matrix& C, int k) {
  // g_k = V C.col(k) - C_kk v_k  (drops the j == k term)
  Vector gk = g.V * C.col(k) - C(k, k) * g.V.col(k);
  const double norm = gk.norm();
  if (norm > 1e-12) g.V.col(k) = -gk / norm;
}

GramFactor solve_sdp(const Matrix& C, const SdpConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (C.rows() != C.cols() || C.rows() == 0)
    throw std::invalid_argument("sdp: C must be square and nonempty");
  if (!C.allFinite()) throw std::invalid_argument("sdp: non-finite C");
  const double scale = C.cwiseAbs().maxCoeff();
  if ((C - C.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale))
    throw std::invalid_argument("sdp: C must be symmetric");
  const int n = static_cast<int>(C.rows());
  const int r = cfg.effective_rank(n);

  GramFactor g;
  g.V.resize(r, n);
  Rng rng(mix_seed(seed, 0x5d9, n));
  for (int k = 0; k < n; ++k) {
    double sq = 0.0;
    for (int d = 0; d < r; ++d) {
      const double x = rng.normal();
      g.V(d, k) = x;
      sq += x * x;
    }
    if (sq < 1e-300) {  // essentially impossible; keep the invariant anyway
      g.V.col(k).setZero();
      g.V(0, k) = 1.0;
    } else {
      g.V.col(k) /= std::sqrt(sq);
    }
  }

  double prev = sdp_objective(C, g);
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    for (int k = 0; k < n; ++k) row_update(g, C, k);
    const double cur = sdp_objective(C, g);
    if (!std::isfinite(cur)) throw NumericError("sdp: non-finite objective");
    if (prev - cur < cfg.tol * std::max(1.0, std::abs(prev))) {
      prev = cur;
      break;
    }
    prev = cur;
  }
  return g;
}

}  // namespace km
