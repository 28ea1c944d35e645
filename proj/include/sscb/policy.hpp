#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sscb/rng.hpp"

namespace sscb {

// K x K visit counters, counts(a, c) = visits of action a while the context
// was in cluster c. Every entry starts at 1 so the visit bonus is defined.
class VisitTable {
 public:
  explicit VisitTable(std::size_t actions);

  std::size_t num_actions() const noexcept { return actions_; }
  std::uint64_t count(std::size_t action, std::size_t cluster) const;
  std::uint64_t cluster_total(std::size_t cluster) const;
  std::uint64_t total() const noexcept;

  void record_visit(std::size_t action, std::size_t cluster);

  // Row-major by action; used by checkpoints.
  const std::vector<std::uint64_t>& raw() const noexcept { return counts_; }
  static VisitTable from_raw(std::size_t actions, std::vector<std::uint64_t> counts);

  friend bool operator==(const VisitTable&, const VisitTable&) = default;

 private:
  void check(std::size_t action, std::size_t cluster) const;

  std::size_t actions_;
  std::vector<std::uint64_t> counts_;
};

// kappa in (0, upsilon), omega > kappa/2, C >= 0, beta in (0, 0.5).
// Construction throws ValidationError when any bound is violated.
class PolicyParams {
 public:
  PolicyParams(std::size_t actions, double kappa, double omega, double exploration_weight,
               double beta, double upsilon = 1.0);

  std::size_t actions() const noexcept { return actions_; }
  double kappa() const noexcept { return kappa_; }
  double omega() const noexcept { return omega_; }
  double exploration_weight() const noexcept { return c_; }
  double beta() const noexcept { return beta_; }
  double upsilon() const noexcept { return upsilon_; }

  PolicyParams with_exploration_weight(double c) const;

 private:
  std::size_t actions_;
  double kappa_;
  double omega_;
  double c_;
  double beta_;
  double upsilon_;
};

// Minimum probability any action receives at stage s: 0.05 / (K s^{kappa/2}).
double exploration_floor(std::size_t actions, std::uint64_t stage, double kappa);

class ActionDistribution {
 public:
  ActionDistribution(std::vector<double> probs, double floor)
      : probs_(std::move(probs)), floor_(floor) {}

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t a) const { return probs_[a]; }
  std::span<const double> probs() const noexcept { return probs_; }
  double floor() const noexcept { return floor_; }

 private:
  std::vector<double> probs_;
  double floor_;
};

// Cluster of a context: argmax of the reward estimates, lowest index on ties.
std::size_t assign_cluster(std::span<const double> estimates);

// U[a] = estimates[a] + C (sum_k N[k][c])^beta / sqrt(N[a][c]).
std::vector<double> exploitation_scores(std::span<const double> estimates,
                                        const VisitTable& visits, std::size_t cluster,
                                        const PolicyParams& params);

// Keeps the (first) largest score and divides the others by s^omega.
std::vector<double> weight_vector(std::span<const double> scores, std::uint64_t stage,
                                  double omega);

// Floor plus the (1 - K * floor) share split in proportion to W. A zero W sum
// falls back to the uniform distribution.
ActionDistribution action_distribution(std::span<const double> weights, std::uint64_t stage,
                                       const PolicyParams& params);

// Inverse-CDF draw, cumulative left to right. One uniform per call.
std::size_t sample_action(const ActionDistribution& dist, Rng& rng);

}  // namespace sscb
