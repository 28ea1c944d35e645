#include "sscb/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sscb/error.hpp"

namespace sscb {

namespace {

std::string hex(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << v;
  return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Checkpoint files

void Checkpoint::save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["version"] = version;
  j["config_hash"] = hex(config_hash);
  j["config"] = config_text;
  j["cursor"] = {{"stage", cursor.stage}, {"index", cursor.index}, {"global", cursor.global}};
  j["rounds_done"] = rounds_done;
  j["params"] = params.values();
  j["visits"] = {{"actions", visits.num_actions()}, {"counts", visits.raw()}};
  j["rng"] = rng_states;
  j["reward_sum"] = reward_sum;
  j["grad_accumulator"] = grad_accumulator.values();
  j["grad_count"] = grad_count;

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + path.string() + "'");
    out << j.dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint '" + path.string() + "'", 0);
  nlohmann::json j;
  try {
    in >> j;
    Checkpoint c;
    c.version = j.at("version").get<int>();
    c.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
    c.config_text = j.at("config").get<std::string>();
    const auto& cur = j.at("cursor");
    c.cursor = {cur.at("stage").get<std::uint64_t>(), cur.at("index").get<std::uint64_t>(),
                cur.at("global").get<std::uint64_t>()};
    c.rounds_done = j.at("rounds_done").get<std::uint64_t>();
    c.params = ParamVector(j.at("params").get<std::vector<double>>());
    c.visits = VisitTable::from_raw(j.at("visits").at("actions").get<std::size_t>(),
                                    j.at("visits").at("counts").get<std::vector<std::uint64_t>>());
    c.rng_states = j.at("rng").get<std::array<std::string, 5>>();
    c.reward_sum = j.at("reward_sum").get<double>();
    c.grad_accumulator = ParamVector(j.at("grad_accumulator").get<std::vector<double>>());
    c.grad_count = j.at("grad_count").get<std::uint64_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("corrupt checkpoint '" + path.string() + "': " + e.what(), 0);
  }
}

// ---------------------------------------------------------------------------
// Construction

std::shared_ptr<const Environment> make_environment(const RunConfig& config) {
  switch (config.env) {
    case EnvironmentKind::kToy:
      return std::make_shared<ToyEnvironment>();
    case EnvironmentKind::kLinear:
      return std::make_shared<SyntheticLinearEnvironment>(config.env_contexts, config.env_dim,
                                                          config.env_actions, config.env_seed);
    case EnvironmentKind::kDataset:
      return std::make_shared<DatasetEnvironment>(
          load_dataset_env(config.env_csv, config.env_label_column, config.env_noise,
                           config.env_seed, config.env_classes));
  }
  throw ValidationError("unknown environment kind");
}

RewardModel make_model(const RunConfig& config, const Environment& env) {
  switch (config.model) {
    case ModelFamily::kToyTrig:
      return RewardModel::toy_trig();
    case ModelFamily::kLinear:
      return RewardModel::linear(env.num_actions(), env.context_dim(), config.model_output);
    case ModelFamily::kMlp:
      return RewardModel::mlp(env.num_actions(), env.context_dim(), config.model_hidden);
  }
  throw ValidationError("unknown model family");
}

Simulation::Simulation(RunConfig config) : Simulation(config, make_environment(config)) {}

Simulation::Simulation(RunConfig config, std::shared_ptr<const Environment> env)
    : config_(std::move(config)),
      env_(std::move(env)),
      model_(make_model(config_, *env_)),
      rng_(config_.seed),
      visits_(env_->num_actions()),
      grad_accumulator_(model_.num_params()) {
  config_.validate();
  if (model_.num_actions() != env_->num_actions() || model_.context_dim() != env_->context_dim())
    throw ShapeError("model " + model_.describe() + " does not fit " + env_->describe());
  if (config_.uses_adaptive_policy()) policy_ = config_.policy_params(env_->num_actions());
  params_ = model_.initial_params(rng_.init, config_.model_init);
}

Simulation Simulation::resume(const Checkpoint& checkpoint, const RunConfig& config) {
  if (checkpoint.version != kCheckpointVersion)
    throw ConfigMismatch("checkpoint version " + std::to_string(checkpoint.version) +
                         " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  if (checkpoint.config_hash != config.hash())
    throw ConfigMismatch("checkpoint config hash " + hex(checkpoint.config_hash) +
                         " differs from the supplied config (" + hex(config.hash()) + ")");

  Simulation sim(config);
  if (checkpoint.params.size() != sim.model_.num_params() ||
      checkpoint.grad_accumulator.size() != sim.model_.num_params() ||
      checkpoint.visits.num_actions() != sim.env_->num_actions())
    throw ConfigMismatch("checkpoint state does not fit the configured model");
  sim.cursor_ = checkpoint.cursor;
  sim.rounds_done_ = checkpoint.rounds_done;
  sim.params_ = checkpoint.params;
  sim.visits_ = checkpoint.visits;
  sim.rng_.context.restore(checkpoint.rng_states[0]);
  sim.rng_.reward.restore(checkpoint.rng_states[1]);
  sim.rng_.policy.restore(checkpoint.rng_states[2]);
  sim.rng_.noise.restore(checkpoint.rng_states[3]);
  sim.rng_.init.restore(checkpoint.rng_states[4]);
  sim.reward_sum_ = checkpoint.reward_sum;
  sim.grad_accumulator_ = checkpoint.grad_accumulator;
  sim.grad_count_ = checkpoint.grad_count;
  return sim;
}

Checkpoint Simulation::checkpoint() const {
  Checkpoint c;
  c.config_hash = config_.hash();
  c.config_text = config_.canonical();
  c.cursor = cursor_;
  c.rounds_done = rounds_done_;
  c.params = params_;
  c.visits = visits_;
  c.rng_states = {rng_.context.serialize(), rng_.reward.serialize(), rng_.policy.serialize(),
                  rng_.noise.serialize(), rng_.init.serialize()};
  c.reward_sum = reward_sum_;
  c.grad_accumulator = grad_accumulator_;
  c.grad_count = grad_count_;
  return c;
}

// ---------------------------------------------------------------------------
// The round loop

bool Simulation::finished() const noexcept {
  if (config_.max_rounds != 0 && rounds_done_ >= config_.max_rounds) return true;
  return schedule_finished(cursor_, config_.schedule);
}

std::uint64_t Simulation::planned_rounds() const {
  const std::uint64_t full = cumulative_rounds(config_.schedule, config_.schedule.stages);
  return config_.max_rounds ? std::min(full, config_.max_rounds) : full;
}

double Simulation::average_cumulative_regret() const noexcept {
  return rounds_done_ ? 1.0 - reward_sum_ / static_cast<double>(rounds_done_) : 0.0;
}

ActionDistribution Simulation::choose_distribution(std::span<const double> estimates,
                                                   std::size_t cluster,
                                                   std::uint64_t stage) const {
  const std::size_t k = estimates.size();
  switch (config_.algorithm) {
    case Algorithm::kSsgdScb:
    case Algorithm::kSgdScb: {
      PolicyParams params = *policy_;
      if (config_.halve_c) {
        const auto halvings = std::min<std::uint64_t>(cursor_.stage - 1, 10);
        params = params.with_exploration_weight(params.exploration_weight() /
                                                std::exp2(static_cast<double>(halvings)));
      }
      const auto scores = exploitation_scores(estimates, visits_, cluster, params);
      const auto weights = weight_vector(scores, stage, params.omega());
      return action_distribution(weights, stage, params);
    }
    case Algorithm::kEpsilonGreedy: {
      const double floor = config_.epsilon / static_cast<double>(k);
      std::vector<double> probs(k, floor);
      probs[cluster] += 1.0 - config_.epsilon;
      return ActionDistribution(std::move(probs), floor);
    }
    case Algorithm::kGreedy: {
      std::vector<double> probs(k, 0.0);
      probs[cluster] = 1.0;
      return ActionDistribution(std::move(probs), 0.0);
    }
  }
  throw ContractViolation("unknown algorithm");
}

RoundRecord Simulation::step() {
  if (finished()) throw ContractViolation("run already finished");
  const std::uint64_t stage = effective_stage(config_.schedule, cursor_);

  BanditRound round = sample_round(*env_, rng_.context, rng_.reward);
  const auto d = round.context();
  std::vector<double> estimates = model_.predict(params_, d);
  const std::size_t cluster = assign_cluster(estimates);
  if (!model_.bounded_output())
    for (double& e : estimates) e = std::clamp(e, 0.0, 1.0);

  const ActionDistribution dist = choose_distribution(estimates, cluster, stage);
  const std::size_t action = sample_action(dist, rng_.policy);
  const double propensity = config_.algorithm == Algorithm::kGreedy ? 1.0 : dist[action];
  if (propensity < dist.floor() - 1e-12)
    throw ContractViolation("exploration floor violated: propensity " + std::to_string(propensity) +
                            " < " + std::to_string(dist.floor()));

  const double reward = round.reward(action);
  visits_.record_visit(action, cluster);

  ParamVector grad = ips_gradient(model_.loss_gradient(params_, d, action, reward), propensity);
  add_l2_gradient(grad, params_, config_.l2);
  ParamVector noise(params_.size());
  if (config_.schedule.mode == ScheduleMode::kStaged)
    noise = sample_noise(params_.size(), stage, config_.schedule.kappa, config_.schedule.noise0,
                         rng_.noise);
  const double eta = learning_rate(config_.schedule, stage);

  if (config_.grad_window == 1) {
    params_ = sgd_step(params_, grad, noise, eta);
  } else {
    for (std::size_t i = 0; i < grad.size(); ++i) grad_accumulator_[i] += grad[i] + noise[i];
    if (++grad_count_ == config_.grad_window) {
      for (double& g : grad_accumulator_.view()) g /= static_cast<double>(config_.grad_window);
      params_ = sgd_step(params_, grad_accumulator_, ParamVector(params_.size()), eta);
      grad_accumulator_ = ParamVector(params_.size());
      grad_count_ = 0;
    }
  }

  RoundRecord record;
  record.round = cursor_.global;
  record.stage = cursor_.stage;
  record.context_id = static_cast<std::uint32_t>(round.context_id());
  record.action = static_cast<std::uint32_t>(action);
  record.propensity = propensity;
  record.reward = reward;
  record.greedy_action = static_cast<std::uint32_t>(cluster);

  advance(cursor_, config_.schedule);
  ++rounds_done_;
  reward_sum_ += reward;
  return record;
}

void Simulation::run(const RoundSink& sink, std::optional<std::uint64_t> until_round) {
  while (!finished() && (!until_round || rounds_done_ < *until_round)) {
    const RoundRecord record = step();
    if (sink) sink(record, *this);
  }
}

// ---------------------------------------------------------------------------

nlohmann::json run_metadata(const Simulation& sim) {
  const RunConfig& config = sim.config();
  nlohmann::json meta;
  meta["config"] = config.canonical();
  meta["config_hash"] = hex(config.hash());
  meta["seed"] = config.seed;
  meta["algorithm"] = to_string(config.algorithm);
  meta["environment"] = sim.environment().describe();
  meta["model"] = sim.model().describe();
  meta["planned_rounds"] = sim.planned_rounds();
  meta["checkpoint_version"] = kCheckpointVersion;
  meta["action_indexing"] = "zero-based";
  if (const auto* data = dynamic_cast<const DatasetEnvironment*>(&sim.environment()))
    meta["relabeled_rows"] = data->relabeled_rows();
  return meta;
}

RunLog run(const RunConfig& config) {
  Simulation sim(config);
  RunLog log;
  log.metadata() = run_metadata(sim);
  const std::uint64_t every = config.snapshot_every;
  sim.run([&](const RoundRecord& record, const Simulation& s) {
    log.append(record);
    if (every != 0 && s.rounds_done() % every == 0)
      log.add_snapshot({s.rounds_done(), record.stage, s.params(), s.average_cumulative_regret()});
  });
  if (log.snapshots().empty() || log.snapshots().back().round != sim.rounds_done())
    log.add_snapshot({sim.rounds_done(), sim.cursor().stage, sim.params(),
                      sim.average_cumulative_regret()});
  return log;
}

}  // namespace sscb
