#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sscb/rng.hpp"

namespace sscb {

// Learnable parameters of a reward model. Length is fixed at construction.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t n, double fill = 0.0) : values_(n, fill) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> view() const noexcept { return values_; }
  std::span<double> view() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool all_finite() const noexcept;
  double norm() const noexcept;
  double squared_distance(const ParamVector& other) const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

enum class ModelFamily { kToyTrig, kLinear, kMlp };
enum class OutputSquash { kLogistic, kIdentity };

std::string to_string(ModelFamily family);
ModelFamily parse_model_family(const std::string& name);

// Two-action toy model: f1 = 0.2 sin^2(dx) + 0.8 exp(-(dx)^2),
// f2 = 0.8 sin^2(dx) + 0.2 exp(-(dx)^2), with scalar x and scalar context d.
struct ToyTrig {
  static constexpr std::size_t kActions = 2;
};

// Per-action weight rows over a shared feature vector, plus one bias per
// action. Parameter layout is row-major: [w_0 (n_d), b_0, w_1, b_1, ...].
struct Linear {
  std::size_t actions;
  std::size_t context_dim;
  OutputSquash output;
};

// Fully connected tanh network with a logistic output layer. Parameters are
// stored layer by layer, each as a row-major weight matrix then its bias.
struct Mlp {
  std::size_t actions;
  std::size_t context_dim;
  std::vector<std::size_t> hidden;
};

class RewardModel {
 public:
  static RewardModel toy_trig();
  static RewardModel linear(std::size_t actions, std::size_t context_dim,
                            OutputSquash output = OutputSquash::kLogistic);
  static RewardModel mlp(std::size_t actions, std::size_t context_dim,
                         std::vector<std::size_t> hidden = {32});

  ModelFamily family() const noexcept;
  std::size_t num_actions() const noexcept;
  std::size_t context_dim() const noexcept;
  std::size_t num_params() const noexcept;
  // False only for an identity-output linear model, whose predictions are not
  // confined to [0, 1].
  bool bounded_output() const noexcept;
  std::string describe() const;

  // Estimated reward of every action. Throws ShapeError on length mismatch.
  std::vector<double> predict(const ParamVector& x, std::span<const double> d) const;

  // Returns f_a(d; x) and writes its gradient with respect to x into grad
  // (which must have num_params() entries).
  double output_gradient(const ParamVector& x, std::span<const double> d, std::size_t a,
                         std::span<double> grad) const;

  // Squared loss (f_a - r)^2 of the played action.
  double loss(const ParamVector& x, std::span<const double> d, std::size_t a, double r) const;
  ParamVector loss_gradient(const ParamVector& x, std::span<const double> d, std::size_t a,
                            double r) const;

  // Linear: zeros. MLP: uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) from init.
  // Toy: the scalar toy_start.
  ParamVector initial_params(Rng& init, double toy_start = 0.0) const;

 private:
  using Arch = std::variant<ToyTrig, Linear, Mlp>;
  explicit RewardModel(Arch arch);
  void check_shapes(const ParamVector& x, std::span<const double> d) const;
  void check_action(std::size_t a) const;

  Arch arch_;
  std::size_t num_params_;
};

// Central-difference gradient of RewardModel::loss, coordinate by coordinate.
// Used as an independent check on loss_gradient.
ParamVector fd_loss_gradient(const RewardModel& model, const ParamVector& x,
                             std::span<const double> d, std::size_t a, double r,
                             double h = 1e-5);

}  // namespace sscb
