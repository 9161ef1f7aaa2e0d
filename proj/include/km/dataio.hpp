#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "km/trainer.hpp"
#include "km/types.hpp"

namespace km {

struct RatingRecord {
  std::int64_t user = 0;
  std::int64_t item = 0;
  int rating = 0;           // 1..r_max
  std::int64_t timestamp = 0;  // parsed when present, otherwise 0; unused
};

struct EvalConfig {
  int r_max = 5;
  double split_fraction = 0.8;
  std::uint64_t split_seed = 0;
  // eta = 1/(R_max - R_min): only relevant when quoting comparisons against
  // raw-rating baselines; the KM pipeline already works on p = R/R_max.
  double eta = 0.25;

  void validate() const;
};

// "user item rating [timestamp]" lines, whitespace separated (the ML100K
// u.data convention).  p = R / r_max.  Errors carry the 1-based line number.
ObservationSet load_ratings(std::istream& in, int r_max);
ObservationSet load_ratings_file(const std::string& path, int r_max);

// Inverse of load_ratings up to timestamp (written as 0): emits one
// "user item rating 0" line per record in record order.
void save_ratings(const ObservationSet& obs, int r_max, std::ostream& out);

// Seeded uniform shuffle of the records; the first
// round(split_fraction * n) go to train, the rest to test.
std::pair<ObservationSet, ObservationSet> split(const ObservationSet& obs,
                                                const EvalConfig& cfg);

struct ColdStartStats {
  int unknown_users = 0;
  int unknown_items = 0;
  int affected_records = 0;
};

// sqrt(mean (p - predict)^2).  Records whose user/item the model has not
// seen are scored with cold-start defaults (uniform theta and/or all-ones
// psi) and counted in stats.
double rmse(const KolmogorovModel& m, const ObservationSet& obs,
            ColdStartStats* stats = nullptr);

// The KM form of the normalized test RMSE: p is already R/r_max, so this is
// rmse on the probability scale; r_max is taken for interface symmetry.
double nrmse(const KolmogorovModel& m, const ObservationSet& obs, int r_max,
             ColdStartStats* stats = nullptr);

struct GridPoint {
  double lambda = 0.0;
  double mu = 0.0;
  double val_nrmse = 0.0;
};

struct GridSearchResult {
  double best_lambda = 0.0;
  double best_mu = 0.0;
  std::vector<GridPoint> table;  // one row per (lambda, mu), lambda-major
};

// Hold-out search: carves a validation set out of obs (seeded, fraction
// 1 - val_fraction held out), trains base_cfg at every grid point, scores
// validation NRMSE, returns the argmin (ties to the lexicographically
// smallest (lambda, mu)) plus the full table.
GridSearchResult grid_search(const ObservationSet& obs,
                             const std::vector<double>& lambda_grid,
                             const std::vector<double>& mu_grid,
                             const TrainConfig& base_cfg, int r_max,
                             double val_fraction = 0.9);

void write_grid_csv(const GridSearchResult& g, const std::string& path);

// FNV-1a 64-bit digest of a file's bytes, as "fnv1a64:<hex>"; used in run
// reports so an experiment records exactly which input it saw.
std::string file_digest(const std::string& path);

}  // namespace km
