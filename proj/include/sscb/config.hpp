#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sscb/model.hpp"
#include "sscb/optimizer.hpp"
#include "sscb/policy.hpp"

namespace sscb {

enum class Algorithm { kSsgdScb, kSgdScb, kEpsilonGreedy, kGreedy };
enum class EnvironmentKind { kToy, kLinear, kDataset };

std::string to_string(Algorithm algorithm);
std::string to_string(EnvironmentKind kind);

// Everything needed to reproduce one run. Text form is a flat `key = value`
// document; `#` starts a comment. Keys and defaults:
//
//   name = run                      label used in sweep summaries
//   algorithm = ssgd-scb            ssgd-scb | sgd-scb | epsilon-greedy | greedy
//   seed = 1
//   env = toy                       toy | linear | dataset
//   env.contexts = 50               linear: pool size
//   env.dim = 4                     linear: features incl. constant 1
//   env.actions = 3                 linear: K
//   env.seed = 7                    linear: pool and theta draw
//   env.csv =                       dataset: training CSV
//   env.label_column = label
//   env.noise = 0                   dataset: fraction of relabeled rows
//   env.classes = 0                 dataset: K (0 = largest label)
//   env.test_csv =                  dataset: held-out CSV for MSE/top-1
//   model = toy-trig                toy-trig | linear | mlp
//   model.hidden = 32               mlp widths, comma separated
//   model.output = logistic         linear: logistic | identity
//   model.init = 0                  toy-trig starting x
//   schedule.T0 *                   rounds in stage 1
//   schedule.upsilon = 1
//   schedule.stages = 10            S (total rounds for sgd-scb)
//   schedule.eta0 *
//   schedule.noise0 *
//   schedule.max_rounds = 0         stop early after this many rounds (0 = off)
//   policy.kappa = 0.5
//   policy.beta = 0.458333...       11/24
//   policy.omega *                  required for ssgd-scb / sgd-scb
//   policy.C *                      required for ssgd-scb / sgd-scb
//   policy.halve_C = false          C halves at each of the first ten stages
//   epsilon = 0.1
//   l2 = 0                          lambda of a lambda |x|^2 penalty
//   grad_window = 1                 rounds averaged per parameter update
//   snapshot_every = 10000
//   checkpoint_every = 0
//   out = run_out                   output directory (not part of the hash)
//
// Keys marked * have no default and must be given.
struct RunConfig {
  std::string name = "run";
  Algorithm algorithm = Algorithm::kSsgdScb;
  std::uint64_t seed = 1;

  EnvironmentKind env = EnvironmentKind::kToy;
  std::uint64_t env_contexts = 50;
  std::uint64_t env_dim = 4;
  std::uint64_t env_actions = 3;
  std::uint64_t env_seed = 7;
  std::string env_csv;
  std::string env_label_column = "label";
  double env_noise = 0.0;
  std::uint64_t env_classes = 0;
  std::string env_test_csv;

  ModelFamily model = ModelFamily::kToyTrig;
  std::vector<std::size_t> model_hidden = {32};
  OutputSquash model_output = OutputSquash::kLogistic;
  double model_init = 0.0;

  StageSchedule schedule;
  std::uint64_t max_rounds = 0;

  double kappa = 0.5;
  double beta = 11.0 / 24.0;
  double omega = 0.0;
  double exploration_weight = 0.0;
  bool halve_c = false;

  double epsilon = 0.1;
  double l2 = 0.0;
  std::uint64_t grad_window = 1;
  std::uint64_t snapshot_every = 10000;
  std::uint64_t checkpoint_every = 0;
  std::string out = "run_out";

  // Parse and validate. Relative dataset paths resolve against base_dir.
  static RunConfig parse(const std::string& text, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  // Throws ValidationError naming the offending key.
  void validate() const;

  // Sorted `key = value` lines of every setting except `out`; doubles are
  // written with round-trip precision so parse(canonical()) is lossless.
  std::string canonical() const;
  std::uint64_t hash() const;

  bool uses_adaptive_policy() const noexcept {
    return algorithm == Algorithm::kSsgdScb || algorithm == Algorithm::kSgdScb;
  }
  PolicyParams policy_params(std::size_t actions) const;
};

}  // namespace sscb
