#pragma once

#include <cstdint>

#include "km/types.hpp"

namespace km {

// Factor V of the Gram matrix X = V'V: one unit-norm r-dimensional column
// per variable of the diag(X) = 1 SDP.
struct GramFactor {
  Matrix V;  // rank x n, every column unit norm

  int rank() const { return static_cast<int>(V.rows()); }
  int n() const { return static_cast<int>(V.cols()); }
};

struct SdpConfig {
  // 0 = pick ceil(sqrt(2 n)) + 1, one above the Barvinok-Pataki bound so
  // the factorized problem has no spurious local optima.
  int rank = 0;
  double tol = 1e-7;   // relative objective decrease per sweep
  int max_sweeps = 2000;

  void validate() const;  // rank must be 0 or >= 2
  int effective_rank(int n) const;
};

// tr(C X) with X = V'V
double sdp_objective(const Matrix& C, const GramFactor& g);

// One coordinate step of the mixing method on column k:
//   g_k = sum_{j != k} C_{kj} v_j;  v_k <- -g_k/||g_k||  when ||g_k|| > 1e-12,
// else v_k is left unchanged.  Never increases the objective.
void row_update(GramFactor& g, const Matrix& C, int k);

// Solve  min tr(C X) s.t. X PSD, diag(X) = 1  via block-coordinate descent
// over the columns of V, starting from seeded random unit columns.  Sweeps
// k = 0..n-1 in order until the per-sweep objective decrease drops below
// tol * max(1, |objective|) or max_sweeps is hit.
GramFactor solve_sdp(const Matrix& C, const SdpConfig& cfg, std::uint64_t seed);

}  // namespace km
