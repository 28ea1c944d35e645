#include "sscb/environment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sscb/error.hpp"

namespace sscb {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

bool Environment::has_analytic_rewards() const {
  return mean_reward(0, 0).has_value() && reward_variance(0, 0).has_value();
}

std::optional<std::size_t> Environment::optimal_action(std::size_t id) const {
  std::optional<std::size_t> best;
  double best_mean = 0.0;
  for (std::size_t a = 0; a < num_actions(); ++a) {
    const auto mean = mean_reward(id, a);
    if (!mean) return std::nullopt;
    if (!best || *mean > best_mean) {
      best = a;
      best_mean = *mean;
    }
  }
  return best;
}

void Environment::check_index(std::size_t id, std::size_t action) const {
  if (id >= num_contexts()) throw IndexError("context id " + std::to_string(id) + " out of range");
  if (action >= num_actions()) throw IndexError("action " + std::to_string(action) + " out of range");
}

double BanditRound::reward(std::size_t action) {
  if (revealed_) throw ContractViolation("bandit feedback reveals one reward per round");
  revealed_ = true;
  return env_->sample_reward(context_id_, action, *reward_rng_);
}

BanditRound sample_round(const Environment& env, Rng& context_rng, Rng& reward_rng) {
  return BanditRound(env, env.sample_context(context_rng), reward_rng);
}

// ---------------------------------------------------------------------------

ToyEnvironment::ToyEnvironment()
    : contexts_{{2.0}, {5.0}},
      laws_{{{0.2, 0.8}, {0.55, 0.85}}, {{0.3, 0.9}, {0.0, 0.2}}} {}

std::span<const double> ToyEnvironment::context(std::size_t id) const {
  check_index(id, 0);
  return contexts_[id];
}

double ToyEnvironment::sample_reward(std::size_t id, std::size_t action, Rng& rng) const {
  check_index(id, action);
  const Interval law = laws_[id][action];
  return law.lo + (law.hi - law.lo) * rng.uniform();
}

std::optional<double> ToyEnvironment::mean_reward(std::size_t id, std::size_t action) const {
  check_index(id, action);
  const Interval law = laws_[id][action];
  return 0.5 * (law.lo + law.hi);
}

std::optional<double> ToyEnvironment::reward_variance(std::size_t id, std::size_t action) const {
  check_index(id, action);
  const Interval law = laws_[id][action];
  return (law.hi - law.lo) * (law.hi - law.lo) / 12.0;
}

// ---------------------------------------------------------------------------

SyntheticLinearEnvironment::SyntheticLinearEnvironment(std::size_t contexts,
                                                       std::size_t context_dim,
                                                       std::size_t actions, std::uint64_t seed)
    : dim_(context_dim), actions_(actions) {
  if (contexts == 0 || context_dim < 2 || actions < 2)
    throw ValidationError("synthetic linear environment needs >= 1 context, n_d >= 2, K >= 2");
  Rng rng(seed, 0x11a3);
  contexts_.resize(contexts);
  for (auto& d : contexts_) {
    d.resize(dim_);
    for (std::size_t i = 0; i + 1 < dim_; ++i) d[i] = 2.0 * rng.uniform() - 1.0;
    d[dim_ - 1] = 1.0;
  }
  std::vector<std::vector<double>> theta(actions_, std::vector<double>(dim_));
  for (auto& row : theta)
    for (double& v : row) v = rng.normal();
  means_.assign(contexts, std::vector<double>(actions_));
  for (std::size_t c = 0; c < contexts; ++c)
    for (std::size_t a = 0; a < actions_; ++a)
      means_[c][a] = logistic(std::inner_product(theta[a].begin(), theta[a].end(),
                                                 contexts_[c].begin(), 0.0));
}

std::span<const double> SyntheticLinearEnvironment::context(std::size_t id) const {
  check_index(id, 0);
  return contexts_[id];
}

double SyntheticLinearEnvironment::sample_reward(std::size_t id, std::size_t action,
                                                 Rng& rng) const {
  check_index(id, action);
  return rng.uniform() < means_[id][action] ? 1.0 : 0.0;
}

std::optional<double> SyntheticLinearEnvironment::mean_reward(std::size_t id,
                                                              std::size_t action) const {
  check_index(id, action);
  return means_[id][action];
}

std::optional<double> SyntheticLinearEnvironment::reward_variance(std::size_t id,
                                                                  std::size_t action) const {
  check_index(id, action);
  const double p = means_[id][action];
  return p * (1.0 - p);
}

std::string SyntheticLinearEnvironment::describe() const {
  return "linear(contexts=" + std::to_string(contexts_.size()) + ", n_d=" + std::to_string(dim_) +
         ", K=" + std::to_string(actions_) + ")";
}

// ---------------------------------------------------------------------------

LabeledSet load_labeled_csv(const std::filesystem::path& path, const std::string& label_column,
                            std::size_t num_classes) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset '" + path.string() + "'", 0);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("dataset '" + path.string() + "' is empty", 1);
  const auto header = split_csv_line(line);
  std::size_t label_idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (trim(header[i]) == label_column) label_idx = i;
  if (label_idx == header.size())
    throw ParseError("label column '" + label_column + "' not found in header", 1);

  LabeledSet set;
  std::size_t max_label = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " columns, found " +
                           std::to_string(cells.size()),
                       line_no);
    std::vector<double> features;
    features.reserve(cells.size() - 1);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string cell = trim(cells[i]);
      if (i == label_idx) {
        long long label = 0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
        if (ec != std::errc() || ptr != cell.data() + cell.size())
          throw ParseError("label '" + cell + "' is not an integer", line_no);
        if (label < 1)
          throw ValidationError("label " + cell + " on line " + std::to_string(line_no) +
                                " is outside 1..K");
        set.labels.push_back(static_cast<std::size_t>(label - 1));
        max_label = std::max(max_label, static_cast<std::size_t>(label));
      } else {
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
        if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value))
          throw ParseError("feature '" + cell + "' is not a finite number", line_no);
        features.push_back(value);
      }
    }
    set.features.push_back(std::move(features));
  }
  if (set.labels.empty()) throw ParseError("dataset '" + path.string() + "' has no rows", line_no);

  set.num_classes = num_classes ? num_classes : max_label;
  if (max_label > set.num_classes)
    throw ValidationError("label " + std::to_string(max_label) + " exceeds K=" +
                          std::to_string(set.num_classes));
  if (set.num_classes < 2) throw ValidationError("dataset needs at least two classes");
  return set;
}

DatasetEnvironment::DatasetEnvironment(LabeledSet data, double noise_fraction,
                                       std::uint64_t seed)
    : data_(std::move(data)), original_(data_.labels) {
  if (data_.size() == 0) throw ValidationError("dataset environment needs at least one row");
  if (!(noise_fraction >= 0.0 && noise_fraction <= 1.0))
    throw ValidationError("noise fraction must lie in [0, 1]");
  if (data_.num_classes < 2) throw ValidationError("dataset needs at least two classes");
  for (const auto& row : data_.features)
    if (row.size() != data_.features.front().size()) throw ShapeError("ragged feature rows");

  const auto count =
      static_cast<std::size_t>(std::floor(noise_fraction * static_cast<double>(data_.size())));
  if (count == 0) return;
  Rng rng(seed, 0xda7a);
  std::vector<std::size_t> order(data_.size());
  std::iota(order.begin(), order.end(), 0);
  // Partial Fisher-Yates: the first `count` slots become a uniform subset.
  for (std::size_t i = 0; i < count; ++i) std::swap(order[i], order[i + rng.index(order.size() - i)]);
  relabeled_.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(relabeled_.begin(), relabeled_.end());
  for (std::size_t row : relabeled_) data_.labels[row] = rng.index(data_.num_classes);
}

std::size_t DatasetEnvironment::context_dim() const { return data_.features.front().size(); }

std::span<const double> DatasetEnvironment::context(std::size_t id) const {
  check_index(id, 0);
  return data_.features[id];
}

double DatasetEnvironment::sample_reward(std::size_t id, std::size_t action, Rng&) const {
  check_index(id, action);
  return data_.labels[id] == action ? 1.0 : 0.0;
}

std::optional<double> DatasetEnvironment::mean_reward(std::size_t id, std::size_t action) const {
  check_index(id, action);
  return data_.labels[id] == action ? 1.0 : 0.0;
}

std::optional<double> DatasetEnvironment::reward_variance(std::size_t id,
                                                          std::size_t action) const {
  check_index(id, action);
  return 0.0;
}

std::string DatasetEnvironment::describe() const {
  return "dataset(rows=" + std::to_string(data_.size()) + ", n_d=" +
         std::to_string(context_dim()) + ", K=" + std::to_string(data_.num_classes) +
         ", relabeled=" + std::to_string(relabeled_.size()) + ")";
}

DatasetEnvironment load_dataset_env(const std::filesystem::path& path,
                                    const std::string& label_column, double noise_fraction,
                                    std::uint64_t seed, std::size_t num_classes) {
  return DatasetEnvironment(load_labeled_csv(path, label_column, num_classes), noise_fraction,
                            seed);
}

// ---------------------------------------------------------------------------

namespace {

void require_analytic(const Environment& env, const RewardModel& model) {
  if (!env.has_analytic_rewards())
    throw ValidationError("environment '" + env.describe() + "' has no analytic reward moments");
  if (model.num_actions() != env.num_actions() || model.context_dim() != env.context_dim())
    throw ShapeError("model " + model.describe() + " does not fit environment " + env.describe());
}

}  // namespace

double true_objective(const Environment& env, const RewardModel& model, const ParamVector& x) {
  require_analytic(env, model);
  const double weight = 1.0 / static_cast<double>(env.num_contexts());
  double total = 0.0;
  for (std::size_t id = 0; id < env.num_contexts(); ++id) {
    const auto f = model.predict(x, env.context(id));
    for (std::size_t a = 0; a < env.num_actions(); ++a) {
      const double bias = f[a] - *env.mean_reward(id, a);
      total += weight * (bias * bias + *env.reward_variance(id, a));
    }
  }
  return total;
}

ParamVector true_objective_gradient(const Environment& env, const RewardModel& model,
                                    const ParamVector& x) {
  require_analytic(env, model);
  const double weight = 1.0 / static_cast<double>(env.num_contexts());
  ParamVector grad(x.size());
  // E_r[2 (f - r) grad f] = 2 (f - mu) grad f, i.e. the loss gradient at r = mu.
  for (std::size_t id = 0; id < env.num_contexts(); ++id)
    for (std::size_t a = 0; a < env.num_actions(); ++a) {
      const ParamVector g = model.loss_gradient(x, env.context(id), a, *env.mean_reward(id, a));
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += weight * g[i];
    }
  return grad;
}

double objective_variance_floor(const Environment& env) {
  if (!env.has_analytic_rewards())
    throw ValidationError("environment '" + env.describe() + "' has no analytic reward moments");
  const double weight = 1.0 / static_cast<double>(env.num_contexts());
  double total = 0.0;
  for (std::size_t id = 0; id < env.num_contexts(); ++id)
    for (std::size_t a = 0; a < env.num_actions(); ++a) total += weight * *env.reward_variance(id, a);
  return total;
}

}  // namespace sscb
