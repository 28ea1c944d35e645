#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "sscb/config.hpp"
#include "sscb/environment.hpp"
#include "sscb/metrics.hpp"
#include "sscb/model.hpp"
#include "sscb/optimizer.hpp"
#include "sscb/policy.hpp"
#include "sscb/rng.hpp"

namespace sscb {

inline constexpr int kCheckpointVersion = 1;

// Full mutable state of a run at a round boundary.
struct Checkpoint {
  int version = kCheckpointVersion;
  std::uint64_t config_hash = 0;
  std::string config_text;
  RoundCursor cursor;
  std::uint64_t rounds_done = 0;
  ParamVector params;
  VisitTable visits{2};
  std::array<std::string, 5> rng_states;
  double reward_sum = 0.0;
  ParamVector grad_accumulator;
  std::uint64_t grad_count = 0;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

std::shared_ptr<const Environment> make_environment(const RunConfig& config);
RewardModel make_model(const RunConfig& config, const Environment& env);

// One run of a bandit algorithm. Per round: draw a context, predict, pick the
// cluster, score and weight the actions, form the floored distribution,
// sample, observe the single reward, count the visit, build the IPS gradient,
// add stage noise and take the SGD step.
class Simulation {
 public:
  explicit Simulation(RunConfig config);
  // Shares an already built environment (sweeps reuse one per config).
  Simulation(RunConfig config, std::shared_ptr<const Environment> env);

  // Throws ConfigMismatch if the checkpoint was written under another config
  // or another checkpoint version.
  static Simulation resume(const Checkpoint& checkpoint, const RunConfig& config);

  bool finished() const noexcept;
  RoundRecord step();

  using RoundSink = std::function<void(const RoundRecord&, const Simulation&)>;
  // Steps until finished or until `until_round` rounds have been played.
  void run(const RoundSink& sink, std::optional<std::uint64_t> until_round = std::nullopt);

  Checkpoint checkpoint() const;

  const RunConfig& config() const noexcept { return config_; }
  const Environment& environment() const noexcept { return *env_; }
  std::shared_ptr<const Environment> shared_environment() const noexcept { return env_; }
  const RewardModel& model() const noexcept { return model_; }
  const ParamVector& params() const noexcept { return params_; }
  const VisitTable& visits() const noexcept { return visits_; }
  const RoundCursor& cursor() const noexcept { return cursor_; }
  std::uint64_t rounds_done() const noexcept { return rounds_done_; }
  double average_cumulative_regret() const noexcept;
  // Total rounds this run will play.
  std::uint64_t planned_rounds() const;

 private:
  ActionDistribution choose_distribution(std::span<const double> estimates, std::size_t cluster,
                                         std::uint64_t stage) const;

  RunConfig config_;
  std::shared_ptr<const Environment> env_;
  RewardModel model_;
  std::optional<PolicyParams> policy_;
  RngStreams rng_;
  ParamVector params_;
  VisitTable visits_;
  RoundCursor cursor_;
  std::uint64_t rounds_done_ = 0;
  double reward_sum_ = 0.0;
  ParamVector grad_accumulator_;
  std::uint64_t grad_count_ = 0;
};

// Metadata sidecar for a run: resolved config, seed, environment description
// and dataset relabeling.
nlohmann::json run_metadata(const Simulation& sim);

// Runs to completion keeping every round and periodic snapshots in memory.
RunLog run(const RunConfig& config);

}  // namespace sscb
