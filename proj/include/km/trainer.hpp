#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "km/binary_qp.hpp"
#include "km/simplex_fw.hpp"
#include "km/types.hpp"

namespace km {

struct TrainConfig {
  int D = 8;
  int bcd_iters = 5;
  double lambda = 0.0;  // l2 penalty on theta
  double mu = 0.0;      // l1 penalty on psi
  FwConfig fw;
  SdrConfig sdr;
  SdpConfig sdp;
  BinaryQpMode q2_mode = BinaryQpMode::kSdr;
  int restarts = 5;
  std::uint64_t seed = 0;
  int threads = 1;
  // Stop launching further restarts once the best penalized objective is at
  // or below this value (< 0 disables).  Off by default; exact-fit problems
  // use it to avoid re-solving after a zero-residual model is found.
  double stop_objective = -1.0;

  void validate() const;
};

// Objectives per BCD iteration, index 0 = after initialization.  The value
// tracked is the penalized objective
//   J = E + lambda * sum_u ||theta_u||^2 + mu * sum_i ||psi_i||_1,
// the quantity each guarded half-step provably never increases; it equals
// the plain squared error E when lambda = mu = 0.
struct TrainTrace {
  std::vector<double> objective;      // J, length bcd_iters + 1
  std::vector<double> objective_raw;  // plain E alongside
  std::vector<double> seconds;        // cumulative wall time at each entry
  double final_objective_raw = 0;     // E at the last iterate
  double final_rmse = 0;              // sqrt(E / |K|)
  int best_restart = 0;
  std::uint64_t best_restart_seed = 0;
  std::vector<double> restart_objectives;  // final J per restart launched
  long guard_rejections = 0;   // psi candidates discarded by the g-guard
  long fw_guard_uses = 0;      // theta updates returned to the warm start
  double max_final_fw_gap = 0; // worst FW gap across the last sweep
};

// PMF subproblem data: per-user normal equations over the items u actually
// rated,  Q_u = sum psi_i psi_i',  r_u = sum p_ui psi_i.
SimplexQpProblem assemble_q1(const ObservationSet& obs,
                             const std::vector<IndicatorVector>& psi, int u,
                             double lambda);

// Indicator subproblem data: per-item sums over the users who rated i,
//   S_i = sum theta_u theta_u',  v_i = sum p_ui theta_u.
BinaryQpProblem assemble_q2(const ObservationSet& obs,
                            const std::vector<PmfVector>& theta, int i,
                            double mu);

// Seeded start: theta_u are normalized exponentials of uniform draws
// (uniform on the simplex), psi_i are fair coin flips, entities ordered as
// first seen in obs.
KolmogorovModel init_model(const ObservationSet& obs, const TrainConfig& cfg);

struct IkmStepStats {
  long guard_rejections = 0;
  long fw_guard_uses = 0;
  double max_fw_gap = 0.0;
};

// One BCD sweep of Algorithm 1, indicators first, then PMFs; n is the
// 1-based iteration number and feeds the per-task RNG streams.  Guarded in
// both halves, so J never increases.
std::pair<KolmogorovModel, IkmStepStats> ikm_step(const KolmogorovModel& m,
                                                  const ObservationSet& obs,
                                                  const TrainConfig& cfg,
                                                  int n);

// Full training: `restarts` independent seeded runs of bcd_iters sweeps
// each; returns the model with the smallest final J and its trace.
std::pair<KolmogorovModel, TrainTrace> train(const ObservationSet& obs,
                                             const TrainConfig& cfg);

// penalized objective J for the given model/data
double penalized_objective(const KolmogorovModel& m, const ObservationSet& obs,
                           double lambda, double mu);

// CSV with header iter,objective,rmse,seconds; one row per trace entry.
void write_trace_csv(const TrainTrace& t, int num_records,
                     const std::string& path);

}  // namespace km
