#pragma once

#include "km/types.hpp"

namespace km {

// minimize f(theta) = theta' (Q + lambda I) theta - 2 theta' r
// over the unit simplex.  Q must be symmetric PSD, lambda >= 0.
struct SimplexQpProblem {
  Matrix Q;
  Vector r;
  double lambda = 0.0;

  void validate() const;  // throws std::invalid_argument
  double f(const Vector& theta) const;
};

struct FwConfig {
  double epsilon = 1e-7;  // stop when the iterate moves less than this
  int max_iters = 500;
  // Optional duality-gap stop (0 disables).  The displacement rule above
  // follows the open-loop step size down regardless of progress, so tests
  // that need certified accuracy stop on the gap instead.
  double gap_tol = 0.0;

  void validate() const;
};

struct FwStats {
  int iters = 0;
  double final_gap = 0.0;
  double final_displacement = 0.0;
  bool guard_used = false;  // true when theta0 beat the final iterate
};

// argmin over simplex vertices of c' x, i.e. the index of the smallest
// coefficient; ties resolve to the lowest index.
int lp_on_simplex(const Vector& c);

// grad f = 2 (Q + lambda I) theta - 2 r
Vector fw_gradient(const SimplexQpProblem& p, const Vector& theta);

// Frank-Wolfe duality gap  grad' (theta - e_{j*});  nonnegative on the
// simplex, zero iff theta is optimal.  This is the certificate the stopping
// and acceptance checks rely on.
double fw_gap(const SimplexQpProblem& p, const Vector& theta);

// Frank-Wolfe with step alpha_k = 2/(k+2), k counted from 0.  Returns a
// point no worse than theta0 (a final guard hands back theta0 when the
// warm start was already better, which keeps outer BCD sweeps monotone).
PmfVector solve_simplex_qp(const SimplexQpProblem& p, const PmfVector& theta0,
                           const FwConfig& cfg, FwStats* stats = nullptr);

}  // namespace km
