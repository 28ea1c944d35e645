#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sscb/config.hpp"
#include "sscb/environment.hpp"
#include "sscb/model.hpp"
#include "sscb/parallel.hpp"

namespace sscb {

// Grid-scan local minimizers of the true objective for a one-parameter model.
// These are the mismatching-rate references for the toy problem.
std::vector<ParamVector> grid_scan_references(const Environment& env, const RewardModel& model,
                                              double lo = -3.0, double hi = 3.0,
                                              double step = 1e-4,
                                              par::Exec exec = par::Exec::kOpenMP);

struct SweepRow {
  std::string name;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::uint64_t rounds = 0;
  double final_acr = 0.0;
  // Over the final stage (last 10% of rounds in single-round mode), against
  // the grid-scan minimizers on one-parameter models and against the run's
  // own final x otherwise.
  double final_mismatch = 0.0;
  double wall_seconds = 0.0;
  std::string status = "ok";
};

// Runs every config `replicates` times with seed = config.seed + replicate,
// `jobs` runs at a time. A failing run yields a row whose status holds the
// error; the others still run. Rows are config-major, replicate-minor.
std::vector<SweepRow> sweep(std::span<const RunConfig> configs, std::size_t replicates,
                            std::size_t jobs);

void write_summary_tsv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace sscb
