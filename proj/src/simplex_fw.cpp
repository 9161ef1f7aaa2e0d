#include "km/simplex_fw.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "km/errors.hpp"

namespace km {

void SimplexQpProblem::validate() const {
  if (Q.rows() != Q.cols()) throw std::invalid_argument("fw: Q not square");
  if (Q.rows() != r.size())
    throw std::invalid_argument("fw: Q/r dimension mismatch");
  if (Q.rows() == 0) throw std::invalid_argument("fw: empty problem");
  if (!(lambda >= 0.0)) throw std::invalid_argument("fw: lambda must be >= 0");
  if (!Q.allFinite() || !r.allFinite())
    throw std::invalid_argument("fw: non-finite problem data");
  const double scale = Q.cwiseAbs().maxCoeff();
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale))
    throw std::invalid_argument("fw: Q must be symmetric");
}

double SimplexQpProblem::f(const Vector& theta) const {
  return theta.dot(Q * theta) + lambda * theta.squaredNorm() -
         2.0 * theta.dot(r);
}

void FwConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("fw: epsilon must be > 0");
  if (max_iters < 1) throw std::invalid_argument("fw: max_iters must be >= 1");
  if (gap_tol < 0.0) throw std::invalid_argument("fw: gap_tol must be >= 0");
}

int lp_on_simplex(const Vector& c) {
  if (c.size() == 0) throw std::invalid_argument("lp_on_simplex: empty vector");
  int best = 0;
  for (int d = 1; d < c.size(); ++d)
    if (c[d] < c[best]) best = d;  // strict: ties keep the lowest index
  return best;
}

Vector fw_gradient(const SimplexQpProblem& p, const Vector& theta) {
  Vector g = 2.0 * (p.Q * theta) - 2.0 * p.r;
  if (p.lambda != 0.0) g += (2.0 * p.lambda) * theta;
  return g;
}

double fw_gap(const SimplexQpProblem& p, const Vector& theta) {
  const Vector g = fw_gradient(p, theta);
  return g.dot(theta) - g[lp_on_simplex(g)];
}

PmfVector solve_simplex_qp(const SimplexQpProblem& p, const PmfVector& theta0,
                           const FwConfig& cfg, FwStats* stats) {
  p.validate();
  cfg.validate();
  const int D = static_cast<int>(p.Q.rows());
  if (theta0.dim() != D)
    throw std::invalid_argument("fw: theta0 dimension mismatch");

  // A = Q + lambda I, flattened for a raw inner loop: this routine runs for
  // millions of iterations at D ~ 3..16, where per-iteration Eigen temporaries
  // dominate the actual flops.
  Matrix A = p.Q;
  A.diagonal().array() += p.lambda;
  const double* a = A.data();  // column-major D x D
  std::vector<double> theta(theta0.entries().data(),
                            theta0.entries().data() + D);
  std::vector<double> grad(D);

  int k = 0;
  double gap = 0.0, disp = 0.0;
  for (; k < cfg.max_iters; ++k) {
    // grad = 2 A theta - 2 r
    for (int d = 0; d < D; ++d) grad[d] = -2.0 * p.r[d];
    for (int e = 0; e < D; ++e) {
      const double te = 2.0 * theta[e];
      const double* col = a + static_cast<std::ptrdiff_t>(e) * D;
      for (int d = 0; d < D; ++d) grad[d] += col[d] * te;
    }
    int j = 0;
    double gdot = grad[0] * theta[0];
    for (int d = 1; d < D; ++d) {
      gdot += grad[d] * theta[d];
      if (grad[d] < grad[j]) j = d;
    }
    gap = gdot - grad[j];
    if (cfg.gap_tol > 0.0 && gap <= cfg.gap_tol) break;

    const double alpha = 2.0 / (k + 2.0);
    // displacement ||theta_{k+1} - theta_k|| = alpha ||e_j - theta_k||
    double sq = 0.0;
    for (int d = 0; d < D; ++d) sq += theta[d] * theta[d];
    disp = alpha * std::sqrt(std::max(0.0, sq - 2.0 * theta[j] + 1.0));

    const double keep = 1.0 - alpha;
    for (int d = 0; d < D; ++d) theta[d] *= keep;
    theta[j] += alpha;

    if (disp < cfg.epsilon) {
      ++k;
      break;
    }
  }

  Vector out = Eigen::Map<const Vector>(theta.data(), D);
  if (!out.allFinite()) throw NumericError("fw: non-finite iterate");
  // renormalize the apex-combination drift (bounded by ~iters * eps) so the
  // result is a valid PmfVector even after millions of updates
  const double s = out.sum();
  if (std::abs(s - 1.0) > PmfVector::kSumTol) out /= s;

  bool guard = false;
  if (p.f(out) > p.f(theta0.entries())) {
    out = theta0.entries();
    guard = true;
  }
  if (stats) {
    stats->iters = k;
    stats->final_gap = fw_gap(p, out);  // at the point actually returned
    stats->final_displacement = disp;
    stats->guard_used = guard;
  }
  return PmfVector(std::move(out));
}

}  // namespace km
