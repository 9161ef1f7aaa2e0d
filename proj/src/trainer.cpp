#include "km/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>

#include "km/errors.hpp"
#include "km/parallel.hpp"
#include "km/rng.hpp"

namespace km {
namespace {

// salts for the independent RNG streams hanging off one run seed
constexpr std::uint64_t kSaltTheta = 0x11;
constexpr std::uint64_t kSaltPsi = 0x22;
constexpr std::uint64_t kSaltRound = 0x33;
constexpr std::uint64_t kSaltRestart = 0x44;

double now_minus(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void check_alignment(const KolmogorovModel& m, const ObservationSet& obs) {
  if (m.users().externals() != obs.users().externals() ||
      m.items().externals() != obs.items().externals())
    throw std::invalid_argument(
        "ikm_step: model and observations index different entities");
}

}  // namespace

void TrainConfig::validate() const {
  if (D < 1) throw std::invalid_argument("train: D must be >= 1");
  if (bcd_iters < 1) throw std::invalid_argument("train: bcd_iters must be >= 1");
  if (!(lambda >= 0.0)) throw std::invalid_argument("train: lambda must be >= 0");
  if (!(mu >= 0.0)) throw std::invalid_argument("train: mu must be >= 0");
  if (restarts < 1) throw std::invalid_argument("train: restarts must be >= 1");
  if (threads < 1) throw std::invalid_argument("train: threads must be >= 1");
  fw.validate();
  sdr.validate();
  sdp.validate();
}

SimplexQpProblem assemble_q1(const ObservationSet& obs,
                             const std::vector<IndicatorVector>& psi, int u,
                             double lambda) {
  if (u < 0 || u >= obs.num_users())
    throw std::invalid_argument("assemble_q1: user index out of range");
  if (static_cast<int>(psi.size()) != obs.num_items())
    throw std::invalid_argument("assemble_q1: need one psi per item");
  const int D = psi.empty() ? 0 : psi.front().dim();
  SimplexQpProblem p;
  p.Q = Matrix::Zero(D, D);
  p.r = Vector::Zero(D);
  p.lambda = lambda;
  for (int rec : obs.of_user(u)) {
    const Observation& ob = obs.records()[rec];
    const Vector& x = psi[ob.item].entries();
    p.Q.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0);
    p.r += ob.p * x;
  }
  p.Q.triangularView<Eigen::Upper>() = p.Q.transpose();
  return p;
}

BinaryQpProblem assemble_q2(const ObservationSet& obs,
                            const std::vector<PmfVector>& theta, int i,
                            double mu) {
  if (i < 0 || i >= obs.num_items())
    throw std::invalid_argument("assemble_q2: item index out of range");
  if (static_cast<int>(theta.size()) != obs.num_users())
    throw std::invalid_argument("assemble_q2: need one theta per user");
  const int D = theta.empty() ? 0 : theta.front().dim();
  BinaryQpProblem p;
  p.S = Matrix::Zero(D, D);
  p.v = Vector::Zero(D);
  p.mu = mu;
  for (int rec : obs.of_item(i)) {
    const Observation& ob = obs.records()[rec];
    const Vector& t = theta[ob.user].entries();
    p.S.selfadjointView<Eigen::Lower>().rankUpdate(t, 1.0);
    p.v += ob.p * t;
  }
  p.S.triangularView<Eigen::Upper>() = p.S.transpose();
  return p;
}

KolmogorovModel init_model(const ObservationSet& obs, const TrainConfig& cfg) {
  cfg.validate();
  if (obs.size() == 0) throw std::invalid_argument("init_model: empty data");
  std::vector<PmfVector> theta;
  theta.reserve(obs.num_users());
  for (int u = 0; u < obs.num_users(); ++u) {
    Rng rng(mix_seed(cfg.seed, kSaltTheta, u));
    Vector e(cfg.D);
    double sum = 0.0;
    for (int d = 0; d < cfg.D; ++d) {
      e[d] = -std::log(rng.uniform_pos());  // exp(1) draws
      sum += e[d];
    }
    theta.emplace_back(Vector(e / sum));  // uniform on the simplex
  }
  std::vector<IndicatorVector> psi;
  psi.reserve(obs.num_items());
  for (int i = 0; i < obs.num_items(); ++i) {
    Rng rng(mix_seed(cfg.seed, kSaltPsi, i));
    Vector b(cfg.D);
    for (int d = 0; d < cfg.D; ++d) b[d] = rng.uniform() < 0.5 ? 0.0 : 1.0;
    psi.emplace_back(std::move(b));
  }
  return KolmogorovModel(cfg.D, obs.users(), obs.items(), std::move(theta),
                         std::move(psi));
}

std::pair<KolmogorovModel, IkmStepStats> ikm_step(const KolmogorovModel& m,
                                                  const ObservationSet& obs,
                                                  const TrainConfig& cfg,
                                                  int n) {
  cfg.validate();
  if (n < 1) throw std::invalid_argument("ikm_step: n is 1-based");
  check_alignment(m, obs);
  const int U = obs.num_users(), I = obs.num_items();

  std::vector<PmfVector> theta;
  theta.reserve(U);
  for (int u = 0; u < U; ++u) theta.push_back(m.theta(u));

  // --- indicator half-step, one guarded refine per item ---
  std::vector<IndicatorVector> psi;
  psi.reserve(I);
  for (int i = 0; i < I; ++i) psi.push_back(m.psi(i));
  std::vector<std::uint8_t> rejected(I, 0);
  parallel_for(I, cfg.threads, [&](int i) {
    const BinaryQpProblem q2 = assemble_q2(obs, theta, i, cfg.mu);
    SdrConfig sdr = cfg.sdr;
    sdr.seed = mix_seed(cfg.seed, kSaltRound, i, static_cast<std::uint64_t>(n));
    bool rej = false;
    psi[i] = refine_indicator(q2, psi[i], sdr, cfg.sdp, cfg.q2_mode, &rej);
    rejected[i] = rej ? 1 : 0;
  });

  // --- PMF half-step, warm-started FW per user ---
  std::vector<FwStats> fw_stats(U);
  parallel_for(U, cfg.threads, [&](int u) {
    const SimplexQpProblem q1 = assemble_q1(obs, psi, u, cfg.lambda);
    theta[u] = solve_simplex_qp(q1, theta[u], cfg.fw, &fw_stats[u]);
  });

  IkmStepStats stats;
  for (int i = 0; i < I; ++i) stats.guard_rejections += rejected[i];
  for (int u = 0; u < U; ++u) {
    stats.fw_guard_uses += fw_stats[u].guard_used ? 1 : 0;
    stats.max_fw_gap = std::max(stats.max_fw_gap, fw_stats[u].final_gap);
  }
  return {KolmogorovModel(m.D(), obs.users(), obs.items(), std::move(theta),
                          std::move(psi), m.event_labels()),
          stats};
}

double penalized_objective(const KolmogorovModel& m, const ObservationSet& obs,
                           double lambda, double mu) {
  double j = objective(m, obs);
  if (lambda != 0.0)
    for (int u = 0; u < m.num_users(); ++u)
      j += lambda * m.theta(u).entries().squaredNorm();
  if (mu != 0.0)
    for (int i = 0; i < m.num_items(); ++i)
      j += mu * m.psi(i).entries().sum();
  return j;
}

std::pair<KolmogorovModel, TrainTrace> train(const ObservationSet& obs,
                                             const TrainConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  std::optional<KolmogorovModel> best_model;
  TrainTrace best_trace;
  double best_final = std::numeric_limits<double>::infinity();
  std::vector<double> restart_objectives;

  for (int t = 0; t < cfg.restarts; ++t) {
    TrainConfig run_cfg = cfg;
    run_cfg.seed = mix_seed(cfg.seed, kSaltRestart, t);

    KolmogorovModel model = init_model(obs, run_cfg);
    TrainTrace trace;
    trace.objective.push_back(
        penalized_objective(model, obs, cfg.lambda, cfg.mu));
    trace.objective_raw.push_back(objective(model, obs));
    trace.seconds.push_back(now_minus(t0));
    for (int n = 1; n <= cfg.bcd_iters; ++n) {
      auto [next, stats] = ikm_step(model, obs, run_cfg, n);
      model = std::move(next);
      trace.objective.push_back(
          penalized_objective(model, obs, cfg.lambda, cfg.mu));
      trace.objective_raw.push_back(objective(model, obs));
      trace.seconds.push_back(now_minus(t0));
      trace.guard_rejections += stats.guard_rejections;
      trace.fw_guard_uses += stats.fw_guard_uses;
      trace.max_final_fw_gap = stats.max_fw_gap;  // last sweep wins
    }
    const double final_j = trace.objective.back();
    if (!std::isfinite(final_j)) throw NumericError("train: non-finite objective");
    restart_objectives.push_back(final_j);

    if (final_j < best_final) {  // strict: earliest restart wins ties
      best_final = final_j;
      trace.best_restart = t;
      trace.best_restart_seed = run_cfg.seed;
      trace.final_objective_raw = trace.objective_raw.back();
      trace.final_rmse = std::sqrt(trace.final_objective_raw / obs.size());
      best_trace = std::move(trace);
      best_model = std::move(model);
    }
    if (cfg.stop_objective >= 0.0 && best_final <= cfg.stop_objective) break;
  }
  best_trace.restart_objectives = std::move(restart_objectives);
  return {std::move(*best_model), std::move(best_trace)};
}

void write_trace_csv(const TrainTrace& t, int num_records,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "iter,objective,rmse,seconds\n";
  out.precision(17);
  for (size_t k = 0; k < t.objective.size(); ++k) {
    const double rmse = std::sqrt(t.objective_raw[k] / num_records);
    out << k << ',' << t.objective[k] << ',' << rmse << ',' << t.seconds[k]
        << '\n';
  }
  if (!out) throw IoError("write failure: " + path);
}

}  // namespace km
