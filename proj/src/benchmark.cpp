#include "km/benchmark.hpp"

#include <stdexcept>

#include "km/binary_qp.hpp"
#include "km/rng.hpp"

namespace km {

void SdrBenchConfig::validate() const {
  if (dims.empty()) throw std::invalid_argument("bench: no dims given");
  for (int d : dims)
    if (d < 1 || d > 24)
      throw std::invalid_argument("bench: D must be in 1..24 for the oracle");
  if (users < 1 || items < 1)
    throw std::invalid_argument("bench: users/items must be >= 1");
  if (bcd_iters < 1) throw std::invalid_argument("bench: bcd_iters must be >= 1");
  if (reps < 1) throw std::invalid_argument("bench: reps must be >= 1");
  fw.validate();
  sdr.validate();
  sdp.validate();
}

std::vector<SdrBenchRow> sdr_benchmark(const SdrBenchConfig& cfg) {
  cfg.validate();
  std::vector<SdrBenchRow> rows;
  for (int D : cfg.dims) {
    SdrBenchRow row;
    row.D = D;
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const std::uint64_t rep_seed = mix_seed(cfg.seed, 0xbe7c, D, rep);

      // fully observed synthetic grid, p ~ U[0,1]
      ObservationSet obs;
      Rng prng(mix_seed(rep_seed, 0x9d));
      for (int u = 0; u < cfg.users; ++u)
        for (int i = 0; i < cfg.items; ++i) obs.add(u, i, prng.uniform());

      TrainConfig tcfg;
      tcfg.D = D;
      tcfg.bcd_iters = cfg.bcd_iters;
      tcfg.fw = cfg.fw;
      tcfg.sdr = cfg.sdr;
      tcfg.sdp = cfg.sdp;
      tcfg.seed = rep_seed;
      KolmogorovModel model = init_model(obs, tcfg);

      for (int n = 1; n <= cfg.bcd_iters; ++n) {
        std::vector<PmfVector> theta;
        for (int u = 0; u < cfg.users; ++u) theta.push_back(model.theta(u));
        std::vector<IndicatorVector> psi;
        for (int i = 0; i < cfg.items; ++i) psi.push_back(model.psi(i));

        for (int i = 0; i < cfg.items; ++i) {
          const BinaryQpProblem q2 = assemble_q2(obs, theta, i, tcfg.mu);
          SdrConfig sdr = cfg.sdr;
          sdr.seed = mix_seed(rep_seed, 0x33, i, static_cast<std::uint64_t>(n));
          const auto [opt_psi, opt_val] = solve_binary_exhaustive(q2);
          IndicatorVector cand = opt_psi;
          if (cfg.candidate_mode == BinaryQpMode::kSdr) {
            const HomogenizedProblem h = homogenize(q2);
            const GramFactor g = solve_sdp(h.S_tilde, cfg.sdp, sdr.seed);
            cand = randomized_rounding(g, h, sdr);
          }
          ++row.instances;
          if (g_value(q2, cand) > opt_val + 1e-9) ++row.mismatches;
          // trajectory advances with the guarded SDR candidate
          psi[i] = g_value(q2, cand) < g_value(q2, psi[i]) ? cand : psi[i];
        }
        for (int u = 0; u < cfg.users; ++u) {
          const SimplexQpProblem q1 = assemble_q1(obs, psi, u, tcfg.lambda);
          theta[u] = solve_simplex_qp(q1, theta[u], cfg.fw);
        }
        model = KolmogorovModel(D, obs.users(), obs.items(), std::move(theta),
                                std::move(psi));
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace km
