#include "km/binary_qp.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "km/rng.hpp"

namespace km {

void BinaryQpProblem::validate() const {
  if (S.rows() != S.cols() || S.rows() == 0)
    throw std::invalid_argument("binary qp: S must be square and nonempty");
  if (S.rows() != v.size())
    throw std::invalid_argument("binary qp: S/v dimension mismatch");
  if (!(mu >= 0.0)) throw std::invalid_argument("binary qp: mu must be >= 0");
  if (!S.allFinite() || !v.allFinite())
    throw std::invalid_argument("binary qp: non-finite data");
  const double scale = S.cwiseAbs().maxCoeff();
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale))
    throw std::invalid_argument("binary qp: S must be symmetric");
}

void SdrConfig::validate() const {
  if (m_rnd < 1) throw std::invalid_argument("sdr: m_rnd must be >= 1");
}

double g_value(const BinaryQpProblem& p, const IndicatorVector& psi) {
  if (psi.dim() != p.S.rows())
    throw std::invalid_argument("g_value: dimension mismatch");
  const Vector& x = psi.entries();
  return x.dot(p.S * x) - 2.0 * p.v_eff().dot(x);
}

HomogenizedProblem homogenize(const BinaryQpProblem& p) {
  p.validate();
  const int D = static_cast<int>(p.S.rows());
  const Vector ones = Vector::Ones(D);
  const Vector veff = p.v_eff();
  const Vector t = veff - 0.5 * (p.S * ones);

  HomogenizedProblem h;
  h.S_tilde.setZero(D + 1, D + 1);
  h.S_tilde.topLeftCorner(D, D) = 0.25 * p.S;
  h.S_tilde.topRightCorner(D, 1) = -0.5 * t;
  h.S_tilde.bottomLeftCorner(1, D) = -0.5 * t.transpose();
  h.offset = 0.25 * ones.dot(p.S * ones) - veff.sum();
  return h;
}

std::pair<IndicatorVector, double> solve_binary_exhaustive(
    const BinaryQpProblem& p) {
  p.validate();
  const int D = static_cast<int>(p.S.rows());
  if (D > 24)
    throw std::invalid_argument(
        "solve_binary_exhaustive: D > 24 would enumerate > 16M candidates");
  const Vector veff = p.v_eff();

  // Enumerate psi in lexicographic order (bit d of the counter = psi_d with
  // psi_0 most significant), so the first strict minimum seen is already the
  // lex-smallest tie.  w = S psi is maintained across single-bit flips.
  const std::uint64_t total = 1ULL << D;
  Vector psi = Vector::Zero(D);
  Vector w = Vector::Zero(D);   // w tracks S psi
  double best_val = 0.0;        // g(0) = 0
  Vector best_psi = psi;

  for (std::uint64_t c = 1; c < total; ++c) {
    // bits that flip when going from c-1 to c
    std::uint64_t diff = (c - 1) ^ c;
    while (diff) {
      const int bit = std::countr_zero(diff);
      diff &= diff - 1;
      const int d = D - 1 - bit;  // counter LSB = last coordinate
      if (psi[d] == 0.0) {
        psi[d] = 1.0;
        w += p.S.col(d);
      } else {
        psi[d] = 0.0;
        w -= p.S.col(d);
      }
    }
    const double val = psi.dot(w) - 2.0 * veff.dot(psi);
    if (val < best_val) {
      best_val = val;
      best_psi = psi;
    }
  }
  return {IndicatorVector(std::move(best_psi)), best_val};
}

IndicatorVector randomized_rounding(const GramFactor& g,
                                    const HomogenizedProblem& h,
                                    const SdrConfig& cfg) {
  cfg.validate();
  const int n = g.n();
  if (n != h.D() + 1)
    throw std::invalid_argument("rounding: factor/problem size mismatch");
  Rng rng(mix_seed(cfg.seed, 0x70bd));
  Vector u(g.rank()), hat(n), best_hat(n);
  double best_val = std::numeric_limits<double>::infinity();
  for (int m = 0; m < cfg.m_rnd; ++m) {
    for (int d = 0; d < g.rank(); ++d) u[d] = rng.normal();
    for (int k = 0; k < n; ++k) {
      const double s = g.V.col(k).dot(u);
      hat[k] = s < 0.0 ? -1.0 : 1.0;  // sign(0) := +1
    }
    const double val = hat.dot(h.S_tilde * hat);
    if (val < best_val) {  // strict: first minimal draw wins
      best_val = val;
      best_hat = hat;
    }
  }
  const double wsign = best_hat[n - 1];
  Vector psi(n - 1);
  for (int d = 0; d < n - 1; ++d)
    psi[d] = best_hat[d] * wsign > 0.0 ? 1.0 : 0.0;  // (z+1)/2
  return IndicatorVector(std::move(psi));
}

IndicatorVector refine_indicator(const BinaryQpProblem& p,
                                 const IndicatorVector& psi_prev,
                                 const SdrConfig& cfg, const SdpConfig& sdp_cfg,
                                 BinaryQpMode mode, bool* candidate_rejected) {
  p.validate();
  if (psi_prev.dim() != p.S.rows())
    throw std::invalid_argument("refine_indicator: psi_prev dimension mismatch");

  IndicatorVector candidate = psi_prev;
  if (mode == BinaryQpMode::kExhaustive) {
    candidate = solve_binary_exhaustive(p).first;
  } else {
    const HomogenizedProblem h = homogenize(p);
    const GramFactor g = solve_sdp(h.S_tilde, sdp_cfg, cfg.seed);
    candidate = randomized_rounding(g, h, cfg);
  }
  // guard: never accept a worse indicator (ties keep psi_prev)
  const bool accept = g_value(p, candidate) < g_value(p, psi_prev);
  if (candidate_rejected)
    *candidate_rejected = !accept && !(candidate == psi_prev);
  return accept ? candidate : psi_prev;
}

}  // namespace km
