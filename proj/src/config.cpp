#include "sscb/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "sscb/error.hpp"

namespace sscb {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ValidationError("config key '" + key + "' expects a number, got '" + value + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ValidationError("config key '" + key + "' expects a non-negative integer, got '" +
                          value + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ValidationError("config key '" + key + "' expects true/false, got '" + value + "'");
}

Algorithm parse_algorithm(const std::string& value) {
  if (value == "ssgd-scb") return Algorithm::kSsgdScb;
  if (value == "sgd-scb") return Algorithm::kSgdScb;
  if (value == "epsilon-greedy") return Algorithm::kEpsilonGreedy;
  if (value == "greedy") return Algorithm::kGreedy;
  throw ValidationError("unknown algorithm '" + value + "'");
}

EnvironmentKind parse_env(const std::string& value) {
  if (value == "toy") return EnvironmentKind::kToy;
  if (value == "linear") return EnvironmentKind::kLinear;
  if (value == "dataset") return EnvironmentKind::kDataset;
  throw ValidationError("unknown environment '" + value + "'");
}

std::vector<std::size_t> parse_widths(const std::string& key, const std::string& value) {
  std::vector<std::size_t> widths;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) widths.push_back(static_cast<std::size_t>(to_uint(key, item)));
  }
  return widths;
}

std::string resolve_path(const std::string& value, const std::filesystem::path& base) {
  if (value.empty() || base.empty()) return value;
  const std::filesystem::path p(value);
  return p.is_absolute() ? value : (base / p).lexically_normal().string();
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::filesystem::path&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    using P = const std::filesystem::path&;
    t["name"] = [](RunConfig& c, const std::string& v, P) { c.name = v; };
    t["algorithm"] = [](RunConfig& c, const std::string& v, P) { c.algorithm = parse_algorithm(v); };
    t["seed"] = [](RunConfig& c, const std::string& v, P) { c.seed = to_uint("seed", v); };
    t["env"] = [](RunConfig& c, const std::string& v, P) { c.env = parse_env(v); };
    t["env.contexts"] = [](RunConfig& c, const std::string& v, P) { c.env_contexts = to_uint("env.contexts", v); };
    t["env.dim"] = [](RunConfig& c, const std::string& v, P) { c.env_dim = to_uint("env.dim", v); };
    t["env.actions"] = [](RunConfig& c, const std::string& v, P) { c.env_actions = to_uint("env.actions", v); };
    t["env.seed"] = [](RunConfig& c, const std::string& v, P) { c.env_seed = to_uint("env.seed", v); };
    t["env.csv"] = [](RunConfig& c, const std::string& v, P b) { c.env_csv = resolve_path(v, b); };
    t["env.label_column"] = [](RunConfig& c, const std::string& v, P) { c.env_label_column = v; };
    t["env.noise"] = [](RunConfig& c, const std::string& v, P) { c.env_noise = to_double("env.noise", v); };
    t["env.classes"] = [](RunConfig& c, const std::string& v, P) { c.env_classes = to_uint("env.classes", v); };
    t["env.test_csv"] = [](RunConfig& c, const std::string& v, P b) { c.env_test_csv = resolve_path(v, b); };
    t["model"] = [](RunConfig& c, const std::string& v, P) { c.model = parse_model_family(v); };
    t["model.hidden"] = [](RunConfig& c, const std::string& v, P) { c.model_hidden = parse_widths("model.hidden", v); };
    t["model.output"] = [](RunConfig& c, const std::string& v, P) {
      if (v == "logistic") c.model_output = OutputSquash::kLogistic;
      else if (v == "identity") c.model_output = OutputSquash::kIdentity;
      else throw ValidationError("model.output must be logistic or identity");
    };
    t["model.init"] = [](RunConfig& c, const std::string& v, P) { c.model_init = to_double("model.init", v); };
    t["schedule.T0"] = [](RunConfig& c, const std::string& v, P) { c.schedule.initial_rounds = to_uint("schedule.T0", v); };
    t["schedule.upsilon"] = [](RunConfig& c, const std::string& v, P) { c.schedule.upsilon = to_double("schedule.upsilon", v); };
    t["schedule.stages"] = [](RunConfig& c, const std::string& v, P) { c.schedule.stages = to_uint("schedule.stages", v); };
    t["schedule.eta0"] = [](RunConfig& c, const std::string& v, P) { c.schedule.eta0 = to_double("schedule.eta0", v); };
    t["schedule.noise0"] = [](RunConfig& c, const std::string& v, P) { c.schedule.noise0 = to_double("schedule.noise0", v); };
    t["schedule.max_rounds"] = [](RunConfig& c, const std::string& v, P) { c.max_rounds = to_uint("schedule.max_rounds", v); };
    t["policy.kappa"] = [](RunConfig& c, const std::string& v, P) { c.kappa = to_double("policy.kappa", v); };
    t["policy.beta"] = [](RunConfig& c, const std::string& v, P) { c.beta = to_double("policy.beta", v); };
    t["policy.omega"] = [](RunConfig& c, const std::string& v, P) { c.omega = to_double("policy.omega", v); };
    t["policy.C"] = [](RunConfig& c, const std::string& v, P) { c.exploration_weight = to_double("policy.C", v); };
    t["policy.halve_C"] = [](RunConfig& c, const std::string& v, P) { c.halve_c = to_bool("policy.halve_C", v); };
    t["epsilon"] = [](RunConfig& c, const std::string& v, P) { c.epsilon = to_double("epsilon", v); };
    t["l2"] = [](RunConfig& c, const std::string& v, P) { c.l2 = to_double("l2", v); };
    t["grad_window"] = [](RunConfig& c, const std::string& v, P) { c.grad_window = to_uint("grad_window", v); };
    t["snapshot_every"] = [](RunConfig& c, const std::string& v, P) { c.snapshot_every = to_uint("snapshot_every", v); };
    t["checkpoint_every"] = [](RunConfig& c, const std::string& v, P) { c.checkpoint_every = to_uint("checkpoint_every", v); };
    t["out"] = [](RunConfig& c, const std::string& v, P) { c.out = v; };
    return t;
  }();
  return table;
}

}  // namespace

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kSsgdScb: return "ssgd-scb";
    case Algorithm::kSgdScb: return "sgd-scb";
    case Algorithm::kEpsilonGreedy: return "epsilon-greedy";
    case Algorithm::kGreedy: return "greedy";
  }
  return "?";
}

std::string to_string(EnvironmentKind kind) {
  switch (kind) {
    case EnvironmentKind::kToy: return "toy";
    case EnvironmentKind::kLinear: return "linear";
    case EnvironmentKind::kDataset: return "dataset";
  }
  return "?";
}

RunConfig RunConfig::parse(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig config;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ParseError("unknown config key '" + key + "'", line_no);
    if (!seen.insert(key).second) throw ParseError("duplicate config key '" + key + "'", line_no);
    it->second(config, value, base_dir);
  }

  config.schedule.kappa = config.kappa;
  config.schedule.mode = config.algorithm == Algorithm::kSgdScb ? ScheduleMode::kSingleRound
                                                                : ScheduleMode::kStaged;
  std::vector<std::string> required = {"schedule.eta0", "schedule.noise0"};
  if (config.algorithm != Algorithm::kSgdScb) required.push_back("schedule.T0");
  if (config.uses_adaptive_policy()) {
    required.push_back("policy.omega");
    required.push_back("policy.C");
  }
  for (const auto& key : required)
    if (!seen.contains(key)) throw ValidationError("config key '" + key + "' is required");
  config.validate();
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path.string() + "'", 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), std::filesystem::absolute(path).parent_path());
}

void RunConfig::validate() const {
  schedule.validate();
  if (algorithm == Algorithm::kSgdScb && schedule.noise0 != 0.0)
    throw ValidationError("sgd-scb runs without injected noise; set schedule.noise0 = 0");
  if (uses_adaptive_policy()) (void)policy_params(2);
  if (algorithm == Algorithm::kEpsilonGreedy && !(epsilon > 0.0 && epsilon <= 1.0))
    throw ValidationError("epsilon must lie in (0, 1]");
  if (!(l2 >= 0.0)) throw ValidationError("l2 must be non-negative");
  if (grad_window == 0) throw ValidationError("grad_window must be at least 1");
  if (env == EnvironmentKind::kDataset && env_csv.empty())
    throw ValidationError("env = dataset needs env.csv");
  if (env == EnvironmentKind::kToy && model != ModelFamily::kToyTrig)
    throw ValidationError("env = toy pairs with model = toy-trig");
  if (env != EnvironmentKind::kToy && model == ModelFamily::kToyTrig)
    throw ValidationError("model = toy-trig only fits env = toy");
  if (model == ModelFamily::kMlp && model_hidden.empty())
    throw ValidationError("model.hidden needs at least one width");
}

PolicyParams RunConfig::policy_params(std::size_t actions) const {
  return PolicyParams(actions, kappa, omega, exploration_weight, beta, schedule.upsilon);
}

std::string RunConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["name"] = name;
  kv["algorithm"] = to_string(algorithm);
  kv["seed"] = std::to_string(seed);
  kv["env"] = to_string(env);
  kv["env.contexts"] = std::to_string(env_contexts);
  kv["env.dim"] = std::to_string(env_dim);
  kv["env.actions"] = std::to_string(env_actions);
  kv["env.seed"] = std::to_string(env_seed);
  kv["env.csv"] = env_csv;
  kv["env.label_column"] = env_label_column;
  kv["env.noise"] = format_double(env_noise);
  kv["env.classes"] = std::to_string(env_classes);
  kv["env.test_csv"] = env_test_csv;
  kv["model"] = to_string(model);
  std::string widths;
  for (std::size_t i = 0; i < model_hidden.size(); ++i)
    widths += (i ? "," : "") + std::to_string(model_hidden[i]);
  kv["model.hidden"] = widths;
  kv["model.output"] = model_output == OutputSquash::kLogistic ? "logistic" : "identity";
  kv["model.init"] = format_double(model_init);
  kv["schedule.T0"] = std::to_string(schedule.initial_rounds);
  kv["schedule.upsilon"] = format_double(schedule.upsilon);
  kv["schedule.stages"] = std::to_string(schedule.stages);
  kv["schedule.eta0"] = format_double(schedule.eta0);
  kv["schedule.noise0"] = format_double(schedule.noise0);
  kv["schedule.max_rounds"] = std::to_string(max_rounds);
  kv["policy.kappa"] = format_double(kappa);
  kv["policy.beta"] = format_double(beta);
  kv["policy.omega"] = format_double(omega);
  kv["policy.C"] = format_double(exploration_weight);
  kv["policy.halve_C"] = halve_c ? "true" : "false";
  kv["epsilon"] = format_double(epsilon);
  kv["l2"] = format_double(l2);
  kv["grad_window"] = std::to_string(grad_window);
  kv["snapshot_every"] = std::to_string(snapshot_every);
  kv["checkpoint_every"] = std::to_string(checkpoint_every);

  std::string text;
  for (const auto& [k, v] : kv) text += k + " = " + v + "\n";
  return text;
}

std::uint64_t RunConfig::hash() const {
  // FNV-1a over the canonical text.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace sscb
