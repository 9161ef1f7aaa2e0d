#pragma once

#include <cstdint>
#include <utility>

#include "km/sdp_mixing.hpp"
#include "km/types.hpp"

namespace km {

// minimize over psi in {0,1}^D:
//   g(psi) = psi' S psi - 2 (v - (mu/2) 1)' psi
// S symmetric PSD, mu >= 0 (an l1 penalty on psi, which is linear here).
struct BinaryQpProblem {
  Matrix S;
  Vector v;
  double mu = 0.0;

  void validate() const;
  Vector v_eff() const { return v.array() - 0.5 * mu; }
};

// Exact reformulation over z = 2 psi - 1 in {-1,+1}^D with a homogenizing
// coordinate w: for x = [z; w], w in {-1,+1},
//   g(psi) = x' S_tilde x + offset,
//   S_tilde = [ S/4        -t/2 ]      t = v_eff - S 1 / 2
//             [ -t'/2        0  ],     offset = 1'S1/4 - v_eff'1.
struct HomogenizedProblem {
  Matrix S_tilde;  // (D+1) x (D+1), symmetric
  double offset = 0.0;

  int D() const { return static_cast<int>(S_tilde.rows()) - 1; }
};

struct SdrConfig {
  int m_rnd = 50;            // Gaussian rounding draws
  std::uint64_t seed = 0;    // per-call stream; callers derive it per task

  void validate() const;
};

enum class BinaryQpMode { kSdr, kExhaustive };

double g_value(const BinaryQpProblem& p, const IndicatorVector& psi);

HomogenizedProblem homogenize(const BinaryQpProblem& p);

// Enumerates all 2^D candidates (guarded to D <= 24); ties by
// lexicographically smallest psi.  Returns (argmin, min value).
std::pair<IndicatorVector, double> solve_binary_exhaustive(
    const BinaryQpProblem& p);

// Gaussian randomized rounding of a Gram factor: draws u ~ N(0, I_rank),
// takes hat u = sign(V'u) with sign(0) := +1, keeps the draw minimizing
// hat u' S_tilde hat u, then de-homogenizes z = hat u_{1..D} * hat u_{D+1}
// and returns psi = (z + 1)/2.
IndicatorVector randomized_rounding(const GramFactor& g,
                                    const HomogenizedProblem& h,
                                    const SdrConfig& cfg);

// One guarded indicator update: candidate from SDR (or exhaustive);
// returns whichever of {candidate, psi_prev} has the smaller g, preferring
// psi_prev on ties so a stalled update is a no-op.  candidate_rejected, if
// given, reports whether the guard discarded a strictly different candidate.
IndicatorVector refine_indicator(const BinaryQpProblem& p,
                                 const IndicatorVector& psi_prev,
                                 const SdrConfig& cfg, const SdpConfig& sdp_cfg,
                                 BinaryQpMode mode,
                                 bool* candidate_rejected = nullptr);

}  // namespace km
