#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "sscb/environment.hpp"
#include "sscb/model.hpp"

namespace sscb {

// One logged round. Actions and context ids are zero-based.
struct RoundRecord {
  std::uint64_t round = 0;
  std::uint64_t stage = 0;
  std::uint32_t context_id = 0;
  std::uint32_t action = 0;
  double propensity = 0.0;
  double reward = 0.0;
  std::uint32_t greedy_action = 0;  // argmax_k f_k(d_t; x_t), also the cluster

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct Snapshot {
  std::uint64_t round = 0;
  std::uint64_t stage = 0;
  ParamVector params;
  double average_cumulative_regret = 0.0;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

class RunLog {
 public:
  // Throws ContractViolation unless rounds stay gap-free and increasing.
  void append(const RoundRecord& record);
  void add_snapshot(Snapshot snapshot) { snapshots_.push_back(std::move(snapshot)); }

  const std::vector<RoundRecord>& rounds() const noexcept { return rounds_; }
  const std::vector<Snapshot>& snapshots() const noexcept { return snapshots_; }
  std::size_t size() const noexcept { return rounds_.size(); }

  nlohmann::json& metadata() noexcept { return metadata_; }
  const nlohmann::json& metadata() const noexcept { return metadata_; }

 private:
  std::vector<RoundRecord> rounds_;
  std::vector<Snapshot> snapshots_;
  nlohmann::json metadata_ = nlohmann::json::object();
};

// Tab-separated round rows with a header line. Doubles are written with
// round-trip precision so a reread log compares equal.
void write_round_header(std::ostream& out);
void write_round(std::ostream& out, const RoundRecord& record);
void write_log_tsv(const std::filesystem::path& path, const RunLog& log);
std::vector<RoundRecord> read_log_tsv(const std::filesystem::path& path);

// 1 - mean reward over the first T rounds.
double average_cumulative_regret(std::span<const RoundRecord> log, std::size_t rounds);
// (1/T) sum (1 - r_t); identical to the regret proxy for {0, 1} rewards.
double progressive_validation_loss(std::span<const RoundRecord> log, std::size_t rounds);
// sum_t (mean reward of the best action at d_t - r_t).
double expected_regret(std::span<const RoundRecord> log, const Environment& env);

// Fraction of rounds whose action differs from argmax_k f_k(d_t; x_ref).
double mismatching_rate(std::span<const RoundRecord> log, const RewardModel& model,
                        const ParamVector& reference, const Environment& env);
// Smallest mismatching rate over a set of reference minimizers.
double mismatching_rate(std::span<const RoundRecord> log, const RewardModel& model,
                        std::span<const ParamVector> references, const Environment& env);

// sum ||f(d; x) - onehot(l)||^2 / (K |D|).
double out_of_sample_mse(const RewardModel& model, const ParamVector& x, const LabeledSet& test);
double top1_accuracy(const RewardModel& model, const ParamVector& x, const LabeledSet& test);

// Streaming mismatching rate against a fixed reference set, for runs too long
// to keep in memory. Greedy reference actions are precomputed per context.
class MismatchTracker {
 public:
  MismatchTracker(const RewardModel& model, const Environment& env,
                  std::span<const ParamVector> references);

  void observe(const RoundRecord& record);
  void reset();
  std::uint64_t rounds() const noexcept { return rounds_; }
  double rate() const;  // min over references; 0 for an empty window

 private:
  std::vector<std::vector<std::uint32_t>> greedy_;  // [reference][context]
  std::vector<std::uint64_t> mismatches_;
  std::uint64_t rounds_ = 0;
};

}  // namespace sscb
