#include "sscb/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sscb/error.hpp"

namespace sscb {

namespace {

std::size_t first_argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

}  // namespace

VisitTable::VisitTable(std::size_t actions) : actions_(actions), counts_(actions * actions, 1) {
  if (actions == 0) throw ValidationError("visit table needs at least one action");
}

void VisitTable::check(std::size_t action, std::size_t cluster) const {
  if (action >= actions_ || cluster >= actions_)
    throw IndexError("visit table index (" + std::to_string(action) + ", " +
                     std::to_string(cluster) + ") out of range for K=" + std::to_string(actions_));
}

std::uint64_t VisitTable::count(std::size_t action, std::size_t cluster) const {
  check(action, cluster);
  return counts_[action * actions_ + cluster];
}

std::uint64_t VisitTable::cluster_total(std::size_t cluster) const {
  check(0, cluster);
  std::uint64_t sum = 0;
  for (std::size_t a = 0; a < actions_; ++a) sum += counts_[a * actions_ + cluster];
  return sum;
}

std::uint64_t VisitTable::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

void VisitTable::record_visit(std::size_t action, std::size_t cluster) {
  check(action, cluster);
  ++counts_[action * actions_ + cluster];
}

VisitTable VisitTable::from_raw(std::size_t actions, std::vector<std::uint64_t> counts) {
  if (counts.size() != actions * actions) throw ShapeError("visit table has wrong entry count");
  if (std::any_of(counts.begin(), counts.end(), [](std::uint64_t n) { return n == 0; }))
    throw ValidationError("visit counts must be at least 1");
  VisitTable table(actions);
  table.counts_ = std::move(counts);
  return table;
}

PolicyParams::PolicyParams(std::size_t actions, double kappa, double omega,
                           double exploration_weight, double beta, double upsilon)
    : actions_(actions),
      kappa_(kappa),
      omega_(omega),
      c_(exploration_weight),
      beta_(beta),
      upsilon_(upsilon) {
  if (actions < 2) throw ValidationError("policy needs K >= 2 actions");
  if (!(kappa > 0.0 && kappa < upsilon))
    throw ValidationError("kappa must lie in (0, upsilon); got kappa=" + std::to_string(kappa) +
                          ", upsilon=" + std::to_string(upsilon));
  if (!(omega > kappa / 2.0))
    throw ValidationError("omega must exceed kappa/2; got omega=" + std::to_string(omega));
  if (!(exploration_weight >= 0.0))
    throw ValidationError("exploration weight C must be >= 0");
  if (!(beta > 0.0 && beta < 0.5))
    throw ValidationError("beta must lie in (0, 0.5); got " + std::to_string(beta));
}

PolicyParams PolicyParams::with_exploration_weight(double c) const {
  return PolicyParams(actions_, kappa_, omega_, c, beta_, upsilon_);
}

double exploration_floor(std::size_t actions, std::uint64_t stage, double kappa) {
  return 0.05 / (static_cast<double>(actions) * std::pow(static_cast<double>(stage), 0.5 * kappa));
}

std::size_t assign_cluster(std::span<const double> estimates) {
  if (estimates.empty()) throw ShapeError("cannot assign a cluster from an empty estimate vector");
  return first_argmax(estimates);
}

std::vector<double> exploitation_scores(std::span<const double> estimates,
                                        const VisitTable& visits, std::size_t cluster,
                                        const PolicyParams& params) {
  if (estimates.size() != visits.num_actions())
    throw ShapeError("estimate vector and visit table disagree on K");
  std::vector<double> scores(estimates.begin(), estimates.end());
  const double c = params.exploration_weight();
  if (c == 0.0) return scores;
  const double mass = std::pow(static_cast<double>(visits.cluster_total(cluster)), params.beta());
  for (std::size_t a = 0; a < scores.size(); ++a)
    scores[a] += c * mass / std::sqrt(static_cast<double>(visits.count(a, cluster)));
  return scores;
}

std::vector<double> weight_vector(std::span<const double> scores, std::uint64_t stage,
                                  double omega) {
  if (scores.empty()) throw ShapeError("empty score vector");
  if (stage == 0) throw ValidationError("stage index starts at 1");
  const std::size_t best = first_argmax(scores);
  const double decay = std::pow(static_cast<double>(stage), omega);
  std::vector<double> weights(scores.begin(), scores.end());
  for (std::size_t a = 0; a < weights.size(); ++a)
    if (a != best) weights[a] /= decay;
  return weights;
}

ActionDistribution action_distribution(std::span<const double> weights, std::uint64_t stage,
                                       const PolicyParams& params) {
  const std::size_t k = weights.size();
  if (k != params.actions()) throw ShapeError("weight vector length differs from K");
  if (stage == 0) throw ValidationError("stage index starts at 1");
  if (std::any_of(weights.begin(), weights.end(), [](double w) { return !(w >= 0.0); }))
    throw ContractViolation("action weights must be non-negative");

  const double floor = exploration_floor(k, stage, params.kappa());
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> probs(k, 1.0 / static_cast<double>(k));
  if (sum > 0.0) {
    const double greedy_share = 1.0 - floor * static_cast<double>(k);
    for (std::size_t a = 0; a < k; ++a) probs[a] = floor + greedy_share * weights[a] / sum;
  }
  return ActionDistribution(std::move(probs), floor);
}

std::size_t sample_action(const ActionDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t a = 0; a + 1 < dist.size(); ++a) {
    cumulative += dist[a];
    if (u < cumulative) return a;
  }
  return dist.size() - 1;
}

}  // namespace sscb
