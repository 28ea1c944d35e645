#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sscb/model.hpp"
#include "sscb/rng.hpp"

namespace sscb {

// A stationary bandit problem over a finite pool of contexts, each drawn
// uniformly per round. Rewards lie in [0, 1].
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t num_actions() const = 0;
  virtual std::size_t context_dim() const = 0;
  virtual std::size_t num_contexts() const = 0;
  virtual std::span<const double> context(std::size_t id) const = 0;
  virtual double sample_reward(std::size_t id, std::size_t action, Rng& rng) const = 0;

  // Analytic moments of the reward law, when known.
  virtual std::optional<double> mean_reward(std::size_t /*id*/, std::size_t /*action*/) const {
    return std::nullopt;
  }
  virtual std::optional<double> reward_variance(std::size_t /*id*/,
                                                std::size_t /*action*/) const {
    return std::nullopt;
  }
  virtual std::string describe() const = 0;

  std::size_t sample_context(Rng& rng) const { return rng.index(num_contexts()); }
  bool has_analytic_rewards() const;
  // Action with the largest mean reward (lowest index on ties).
  std::optional<std::size_t> optimal_action(std::size_t id) const;

 protected:
  void check_index(std::size_t id, std::size_t action) const;
};

// One round of bandit feedback: the context is visible, and the reward of
// exactly one action may be revealed.
class BanditRound {
 public:
  BanditRound(const Environment& env, std::size_t context_id, Rng& reward_rng)
      : env_(&env), context_id_(context_id), reward_rng_(&reward_rng) {}

  std::size_t context_id() const noexcept { return context_id_; }
  std::span<const double> context() const { return env_->context(context_id_); }
  // Throws ContractViolation on a second call.
  double reward(std::size_t action);

 private:
  const Environment* env_;
  std::size_t context_id_;
  Rng* reward_rng_;
  bool revealed_ = false;
};

BanditRound sample_round(const Environment& env, Rng& context_rng, Rng& reward_rng);

// Two contexts {2, 5}; rewards uniform on
//   d=2: a1 ~ U(0.2, 0.8), a2 ~ U(0.55, 0.85)
//   d=5: a1 ~ U(0.3, 0.9), a2 ~ U(0, 0.2)
class ToyEnvironment final : public Environment {
 public:
  ToyEnvironment();

  std::size_t num_actions() const override { return 2; }
  std::size_t context_dim() const override { return 1; }
  std::size_t num_contexts() const override { return 2; }
  std::span<const double> context(std::size_t id) const override;
  double sample_reward(std::size_t id, std::size_t action, Rng& rng) const override;
  std::optional<double> mean_reward(std::size_t id, std::size_t action) const override;
  std::optional<double> reward_variance(std::size_t id, std::size_t action) const override;
  std::string describe() const override { return "toy"; }

 private:
  struct Interval {
    double lo, hi;
  };
  std::vector<std::vector<double>> contexts_;
  Interval laws_[2][2];
};

// Synthetic linear problem: a pool of contexts whose last feature is the
// constant 1, and Bernoulli rewards with mean logistic(theta_a . d).
class SyntheticLinearEnvironment final : public Environment {
 public:
  SyntheticLinearEnvironment(std::size_t contexts, std::size_t context_dim, std::size_t actions,
                             std::uint64_t seed);

  std::size_t num_actions() const override { return actions_; }
  std::size_t context_dim() const override { return dim_; }
  std::size_t num_contexts() const override { return contexts_.size(); }
  std::span<const double> context(std::size_t id) const override;
  double sample_reward(std::size_t id, std::size_t action, Rng& rng) const override;
  std::optional<double> mean_reward(std::size_t id, std::size_t action) const override;
  std::optional<double> reward_variance(std::size_t id, std::size_t action) const override;
  std::string describe() const override;

 private:
  std::size_t dim_;
  std::size_t actions_;
  std::vector<std::vector<double>> contexts_;
  std::vector<std::vector<double>> means_;  // [context][action]
};

// Rows of (features, label) with zero-based labels.
struct LabeledSet {
  std::vector<std::vector<double>> features;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
};

// CSV with a header row, numeric feature columns and one integer label column
// holding values 1..K. When num_classes is 0 it is taken as the largest label.
// Throws ParseError (with line number) or ValidationError.
LabeledSet load_labeled_csv(const std::filesystem::path& path, const std::string& label_column,
                            std::size_t num_classes = 0);

// Multiclass data as a bandit: reward 1 iff the action equals the row label.
// With noise fraction p, exactly floor(p * rows) rows get a uniformly redrawn
// label, chosen once at construction from the seed.
class DatasetEnvironment final : public Environment {
 public:
  DatasetEnvironment(LabeledSet data, double noise_fraction, std::uint64_t seed);

  std::size_t num_actions() const override { return data_.num_classes; }
  std::size_t context_dim() const override;
  std::size_t num_contexts() const override { return data_.size(); }
  std::span<const double> context(std::size_t id) const override;
  double sample_reward(std::size_t id, std::size_t action, Rng& rng) const override;
  std::optional<double> mean_reward(std::size_t id, std::size_t action) const override;
  std::optional<double> reward_variance(std::size_t id, std::size_t action) const override;
  std::string describe() const override;

  const std::vector<std::size_t>& labels() const noexcept { return data_.labels; }
  const std::vector<std::size_t>& original_labels() const noexcept { return original_; }
  // Rows whose label was redrawn, ascending.
  const std::vector<std::size_t>& relabeled_rows() const noexcept { return relabeled_; }

 private:
  LabeledSet data_;
  std::vector<std::size_t> original_;
  std::vector<std::size_t> relabeled_;
};

DatasetEnvironment load_dataset_env(const std::filesystem::path& path,
                                    const std::string& label_column, double noise_fraction,
                                    std::uint64_t seed, std::size_t num_classes = 0);

// Full-feedback objective sum_d p(d) sum_a [(f_a(d; x) - mu_{d,a})^2 + Var_{d,a}].
// Requires analytic reward moments; throws ValidationError otherwise.
double true_objective(const Environment& env, const RewardModel& model, const ParamVector& x);

// Gradient of true_objective by enumerating every context and action.
ParamVector true_objective_gradient(const Environment& env, const RewardModel& model,
                                    const ParamVector& x);

// Sum over contexts of p(d) sum_a Var_{d,a}: the smallest value the
// objective can take.
double objective_variance_floor(const Environment& env);

}  // namespace sscb
