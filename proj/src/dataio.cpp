#include "km/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "km/errors.hpp"
#include "km/rng.hpp"

namespace km {

void EvalConfig::validate() const {
  if (r_max < 1) throw std::invalid_argument("eval: r_max must be >= 1");
  if (!(split_fraction > 0.0 && split_fraction < 1.0))
    throw std::invalid_argument("eval: split_fraction must be in (0,1)");
}

ObservationSet load_ratings(std::istream& in, int r_max) {
  if (r_max < 1) throw std::invalid_argument("load_ratings: r_max must be >= 1");
  ObservationSet obs;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::int64_t u, i;
    long long r;
    if (!(ls >> u >> i >> r)) {
      // blank lines are tolerated; anything else is malformed
      std::istringstream probe(line);
      std::string tok;
      if (probe >> tok)
        throw IoError("ratings line " + std::to_string(lineno) +
                      ": expected 'user item rating [timestamp]'");
      continue;
    }
    long long ts = 0;
    ls >> ts;  // optional; ignored
    std::string extra;
    if (ls >> extra)
      throw IoError("ratings line " + std::to_string(lineno) +
                    ": trailing data '" + extra + "'");
    if (r < 1 || r > r_max)
      throw IoError("ratings line " + std::to_string(lineno) + ": rating " +
                    std::to_string(r) + " outside 1.." + std::to_string(r_max));
    try {
      obs.add(u, i, static_cast<double>(r) / r_max);
    } catch (const std::invalid_argument& e) {
      throw IoError("ratings line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return obs;
}

ObservationSet load_ratings_file(const std::string& path, int r_max) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open ratings file: " + path);
  return load_ratings(in, r_max);
}

void save_ratings(const ObservationSet& obs, int r_max, std::ostream& out) {
  for (const Observation& ob : obs.records()) {
    const long long r = std::llround(ob.p * r_max);
    out << obs.users().external(ob.user) << '\t'
        << obs.items().external(ob.item) << '\t' << r << '\t' << 0 << '\n';
  }
}

std::pair<ObservationSet, ObservationSet> split(const ObservationSet& obs,
                                                const EvalConfig& cfg) {
  cfg.validate();
  const int n = obs.size();
  if (n < 2) throw std::invalid_argument("split: need at least 2 records");
  std::vector<int> order(n);
  for (int k = 0; k < n; ++k) order[k] = k;
  Rng rng(mix_seed(cfg.split_seed, 0x5917));
  for (int k = n - 1; k > 0; --k)  // Fisher-Yates
    std::swap(order[k], order[rng.uniform_int(k + 1)]);

  int n_train = static_cast<int>(std::lround(cfg.split_fraction * n));
  n_train = std::clamp(n_train, 1, n - 1);  // both sides non-empty
  ObservationSet train, test;
  for (int k = 0; k < n; ++k) {
    const Observation& ob = obs.records()[order[k]];
    ObservationSet& dst = k < n_train ? train : test;
    dst.add(obs.users().external(ob.user), obs.items().external(ob.item), ob.p);
  }
  return {std::move(train), std::move(test)};
}

namespace {

double cold_start_predict(const KolmogorovModel& m, const ObservationSet& obs,
                          const Observation& ob, ColdStartStats* stats,
                          bool* counted_record) {
  const auto u = m.users().find(obs.users().external(ob.user));
  const auto i = m.items().find(obs.items().external(ob.item));
  if (u && i) return m.theta(*u).dot(m.psi(*i));
  if (stats) {
    if (!u) ++stats->unknown_users;
    if (!i) ++stats->unknown_items;
    if (!*counted_record) {
      ++stats->affected_records;
      *counted_record = true;
    }
  }
  // cold-start defaults: uniform theta and/or all-ones psi
  const int D = m.D();
  if (!u && !i) return 1.0;  // uniform . ones
  if (!u) return m.psi(*i).support_size() / static_cast<double>(D);
  return 1.0;  // theta_u . ones = 1 within simplex tolerance
}

}  // namespace

double rmse(const KolmogorovModel& m, const ObservationSet& obs,
            ColdStartStats* stats) {
  if (obs.size() == 0) throw std::invalid_argument("rmse: empty observations");
  double sq = 0.0;
  for (const Observation& ob : obs.records()) {
    bool counted = false;
    const double r = cold_start_predict(m, obs, ob, stats, &counted) - ob.p;
    sq += r * r;
  }
  return std::sqrt(sq / obs.size());
}

double nrmse(const KolmogorovModel& m, const ObservationSet& obs, int r_max,
             ColdStartStats* stats) {
  if (r_max < 1) throw std::invalid_argument("nrmse: r_max must be >= 1");
  // p already equals R/r_max, so the KM-form NRMSE is rmse on this scale
  return rmse(m, obs, stats);
}

GridSearchResult grid_search(const ObservationSet& obs,
                             const std::vector<double>& lambda_grid,
                             const std::vector<double>& mu_grid,
                             const TrainConfig& base_cfg, int r_max,
                             double val_fraction) {
  if (lambda_grid.empty() || mu_grid.empty())
    throw std::invalid_argument("grid_search: empty grid");
  // iterate in ascending (lambda, mu) order so the strict < below resolves
  // ties to the lexicographically smallest pair
  std::vector<double> lambdas = lambda_grid, mus = mu_grid;
  std::sort(lambdas.begin(), lambdas.end());
  std::sort(mus.begin(), mus.end());
  EvalConfig split_cfg;
  split_cfg.r_max = r_max;
  split_cfg.split_fraction = val_fraction;
  split_cfg.split_seed = mix_seed(base_cfg.seed, 0x6e1d);
  auto [fit, val] = split(obs, split_cfg);

  GridSearchResult out;
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : lambdas) {
    for (double mu : mus) {
      TrainConfig cfg = base_cfg;
      cfg.lambda = lambda;
      cfg.mu = mu;
      auto [model, trace] = train(fit, cfg);
      const double score = nrmse(model, val, r_max);
      out.table.push_back({lambda, mu, score});
      // strict <: earlier rows win ties, and rows are generated in
      // lexicographic (lambda, mu) order over the given grids
      if (score < best) {
        best = score;
        out.best_lambda = lambda;
        out.best_mu = mu;
      }
    }
  }
  return out;
}

void write_grid_csv(const GridSearchResult& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "lambda,mu,val_nrmse\n";
  out.precision(17);
  for (const GridPoint& p : g.table)
    out << p.lambda << ',' << p.mu << ',' << p.val_nrmse << '\n';
  if (!out) throw IoError("write failure: " + path);
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for digest: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize k = 0; k < got; ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + hex;
}

}  // namespace km
