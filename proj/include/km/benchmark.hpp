#pragma once

#include <cstdint>
#include <vector>

#include "km/trainer.hpp"

namespace km {

struct SdrBenchConfig {
  std::vector<int> dims = {4, 8, 10};
  int users = 20;
  int items = 40;
  int bcd_iters = 25;
  int reps = 4;             // independent synthetic datasets per D
  std::uint64_t seed = 0;
  FwConfig fw;              // trajectory PMF updates
  SdrConfig sdr;
  SdpConfig sdp;
  // solver being measured against the oracle; kExhaustive is the sanity
  // configuration whose mismatch rate is exactly zero
  BinaryQpMode candidate_mode = BinaryQpMode::kSdr;

  void validate() const;
};

struct SdrBenchRow {
  int D = 0;
  long instances = 0;   // (Q2) subproblems attempted
  long mismatches = 0;  // SDR value > exhaustive optimum + 1e-9
  double rate() const { return instances ? double(mismatches) / instances : 0; }
};

// Synthetic mismatch-rate protocol: draw p_ui ~ Uniform[0,1] on a fully
// observed users x items grid, run IKM sweeps, and at every indicator
// subproblem solve with both SDR and the exhaustive oracle, counting how
// often the rounded value misses the true optimum.  The trajectory itself
// advances with the guarded SDR result, like a real run.
std::vector<SdrBenchRow> sdr_benchmark(const SdrBenchConfig& cfg);

}  // namespace km
