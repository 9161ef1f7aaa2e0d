// Test-only reference implementations, kept deliberately naive and
// independent of the library's solver code paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "km/binary_qp.hpp"
#include "km/rng.hpp"
#include "km/simplex_fw.hpp"
#include "km/types.hpp"

namespace oracle {

using km::Matrix;
using km::Vector;

// Euclidean projection onto the unit simplex (sort-based).
inline Vector simplex_project(const Vector& y) {
  const int n = static_cast<int>(y.size());
  std::vector<double> u(y.data(), y.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, tau = 0.0;
  int rho = 0;
  for (int k = 0; k < n; ++k) {
    css += u[k];
    const double t = (css - 1.0) / (k + 1);
    if (u[k] - t > 0.0) {
      rho = k + 1;
      tau = t;
    }
  }
  (void)rho;
  Vector out(n);
  for (int k = 0; k < n; ++k) out[k] = std::max(0.0, y[k] - tau);
  return out;
}

// Projected gradient descent on the simplex QP with a Gershgorin-bounded
// step size; iters fixed, no early exit.
inline Vector projected_gradient_qp(const km::SimplexQpProblem& p,
                                    const Vector& theta0, int iters) {
  Matrix A = p.Q;
  A.diagonal().array() += p.lambda;
  double lip = 0.0;  // L <= 2 * max row abs sum of A
  for (int i = 0; i < A.rows(); ++i)
    lip = std::max(lip, 2.0 * A.row(i).cwiseAbs().sum());
  const double step = lip > 0.0 ? 1.0 / lip : 1.0;
  Vector theta = simplex_project(theta0);
  for (int k = 0; k < iters; ++k) {
    const Vector grad = 2.0 * (A * theta) - 2.0 * p.r;
    theta = simplex_project(theta - step * grad);
  }
  return theta;
}

// Central finite differences of p.f
inline Vector fd_gradient(const km::SimplexQpProblem& p, const Vector& theta,
                          double h) {
  Vector g(theta.size());
  for (int d = 0; d < theta.size(); ++d) {
    Vector hi = theta, lo = theta;
    hi[d] += h;
    lo[d] -= h;
    g[d] = (p.f(hi) - p.f(lo)) / (2.0 * h);
  }
  return g;
}

// Linear minimization over simplex vertices by explicit enumeration:
// materialize every vertex e_j, evaluate c . e_j, return the first minimizer.
inline int brute_vertex_argmin(const Vector& c) {
  int arg = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < c.size(); ++j) {
    Vector vertex = Vector::Zero(c.size());
    vertex[j] = 1.0;
    const double val = c.dot(vertex);
    if (val < best) {
      best = val;
      arg = j;
    }
  }
  return arg;
}

// Plain O(2^D D^2) binary minimization, fresh evaluation per candidate,
// counting in lexicographic order (first strict minimum = lex-smallest tie).
inline std::pair<Vector, double> brute_binary_min(const km::BinaryQpProblem& p) {
  const int D = static_cast<int>(p.S.rows());
  const Vector veff = p.v_eff();
  Vector best;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::uint64_t c = 0; c < (1ULL << D); ++c) {
    Vector psi(D);
    for (int d = 0; d < D; ++d)
      psi[d] = (c >> (D - 1 - d)) & 1ULL ? 1.0 : 0.0;
    const double val = psi.dot(p.S * psi) - 2.0 * veff.dot(psi);
    if (val < best_val) {
      best_val = val;
      best = psi;
    }
  }
  return {best, best_val};
}

// --- random instance generators -------------------------------------------

inline Vector random_pmf(km::Rng& rng, int D) {
  Vector e(D);
  double s = 0.0;
  for (int d = 0; d < D; ++d) {
    e[d] = -std::log(rng.uniform_pos());
    s += e[d];
  }
  return e / s;
}

inline Vector random_bits(km::Rng& rng, int D) {
  Vector b(D);
  for (int d = 0; d < D; ++d) b[d] = rng.uniform() < 0.5 ? 0.0 : 1.0;
  return b;
}

// PMF-subproblem shape: Q = sum psi psi', r = sum p psi over `terms` items
inline km::SimplexQpProblem random_q1_instance(km::Rng& rng, int D, int terms,
                                               double lambda = 0.0) {
  km::SimplexQpProblem p;
  p.Q = Matrix::Zero(D, D);
  p.r = Vector::Zero(D);
  p.lambda = lambda;
  for (int t = 0; t < terms; ++t) {
    const Vector psi = random_bits(rng, D);
    p.Q += psi * psi.transpose();
    p.r += rng.uniform() * psi;
  }
  return p;
}

// indicator-subproblem shape: S = sum theta theta', v = sum p theta over
// `terms` users
inline km::BinaryQpProblem random_q2_instance(km::Rng& rng, int D, int terms,
                                              double mu = 0.0) {
  km::BinaryQpProblem p;
  p.S = Matrix::Zero(D, D);
  p.v = Vector::Zero(D);
  p.mu = mu;
  for (int t = 0; t < terms; ++t) {
    const Vector theta = random_pmf(rng, D);
    p.S += theta * theta.transpose();
    p.v += rng.uniform() * theta;
  }
  return p;
}

}  // namespace oracle
