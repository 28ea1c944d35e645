// sscb: run, sweep, resume and score contextual bandit experiments.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sscb/error.hpp"
#include "sscb/metrics.hpp"
#include "sscb/simulation.hpp"
#include "sscb/sweep.hpp"

namespace fs = std::filesystem;
using namespace sscb;

namespace {

constexpr const char* kLogName = "run_log.tsv";
constexpr const char* kMetaName = "run_meta.json";
constexpr const char* kSnapName = "snapshots.tsv";
constexpr const char* kCheckpointName = "checkpoint.json";

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad json in '" + path.string() + "': " + e.what(), 0);
  }
}

// Drops rows whose first column exceeds max_round. Missing files are created
// with `header`.
void truncate_tsv(const fs::path& path, std::uint64_t max_round, const std::string& header) {
  std::vector<std::string> keep{header};
  if (std::ifstream in(path); in) {
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (std::stoull(line.substr(0, line.find('\t'))) > max_round) break;
      keep.push_back(line);
    }
  }
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : keep) out << l << '\n';
}

void write_snapshot(std::ostream& out, const Simulation& sim) {
  out << sim.rounds_done() << '\t' << sim.cursor().stage << '\t'
      << sim.average_cumulative_regret() << '\t';
  const auto& x = sim.params();
  for (std::size_t i = 0; i < x.size(); ++i) out << (i ? "," : "") << x[i];
  out << '\n';
}

const char* kSnapHeader = "round\tstage\tacr\tparams";

std::string round_header() {
  std::ostringstream s;
  write_round_header(s);
  auto h = s.str();
  h.pop_back();
  return h;
}

// Plays the simulation to the end, streaming rounds, snapshots and
// checkpoints into `out`.
void drive(Simulation& sim, const fs::path& out) {
  const auto& config = sim.config();
  std::ofstream log(out / kLogName, std::ios::app);
  std::ofstream snaps(out / kSnapName, std::ios::app);
  snaps.precision(17);
  if (!log || !snaps) throw std::runtime_error("cannot open outputs in '" + out.string() + "'");
  sim.run([&](const RoundRecord& r, const Simulation& s) {
    write_round(log, r);
    const auto done = s.rounds_done();
    if (config.snapshot_every && done % config.snapshot_every == 0) write_snapshot(snaps, s);
    if (config.checkpoint_every && done % config.checkpoint_every == 0)
      s.checkpoint().save(out / ("checkpoint_" + std::to_string(done) + ".json"));
  });
  sim.checkpoint().save(out / kCheckpointName);

  auto meta = run_metadata(sim);
  meta["rounds_done"] = sim.rounds_done();
  meta["final_acr"] = sim.average_cumulative_regret();
  write_json(out / kMetaName, meta);
  std::cout << "rounds\t" << sim.rounds_done() << "\nfinal_acr\t"
            << sim.average_cumulative_regret() << "\nout\t" << out.string() << '\n';
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out_arg) {
  RunConfig config = RunConfig::load(config_path);
  if (seed) config.seed = *seed;
  const fs::path out = out_arg.empty() ? fs::path(config.out) : fs::path(out_arg);
  fs::create_directories(out);
  Simulation sim(config);
  write_json(out / kMetaName, run_metadata(sim));
  truncate_tsv(out / kLogName, 0, round_header());
  truncate_tsv(out / kSnapName, 0, kSnapHeader);
  drive(sim, out);
  return 0;
}

int cmd_resume(const std::string& checkpoint_path, const std::string& config_path,
               const std::string& out_arg) {
  const Checkpoint ckpt = Checkpoint::load(checkpoint_path);
  const RunConfig config =
      config_path.empty() ? RunConfig::parse(ckpt.config_text) : RunConfig::load(config_path);
  Simulation sim = Simulation::resume(ckpt, config);
  const fs::path out = out_arg.empty() ? fs::absolute(checkpoint_path).parent_path()
                                       : fs::path(out_arg);
  fs::create_directories(out);
  if (sim.finished()) {
    std::cout << "run already finished at round " << sim.rounds_done() << "; nothing to do\n";
    return 0;
  }
  truncate_tsv(out / kLogName, ckpt.rounds_done, round_header());
  truncate_tsv(out / kSnapName, ckpt.rounds_done, kSnapHeader);
  drive(sim, out);
  return 0;
}

int cmd_sweep(const std::vector<std::string>& config_paths, std::size_t replicates,
              std::size_t jobs, const std::string& out_arg) {
  std::vector<RunConfig> configs;
  for (const auto& p : config_paths) configs.push_back(RunConfig::load(p));
  const auto rows = sweep(configs, replicates, jobs);
  const fs::path out = out_arg.empty() ? fs::path(configs.front().out) : fs::path(out_arg);
  fs::create_directories(out);
  std::ofstream summary(out / "summary.tsv");
  write_summary_tsv(summary, rows);
  write_summary_tsv(std::cout, rows);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.status != "ok";
  if (failed) {
    std::cerr << "error: " << failed << " of " << rows.size() << " runs failed\n";
    return 5;
  }
  return 0;
}

int cmd_metrics(const std::string& log_path, const std::string& ref_path) {
  const auto rounds = read_log_tsv(log_path);
  if (rounds.empty()) throw ValidationError("log '" + log_path + "' holds no rounds");
  nlohmann::json report;
  report["rounds"] = rounds.size();
  report["acr"] = average_cumulative_regret(rounds, rounds.size());
  report["pvl"] = progressive_validation_loss(rounds, rounds.size());
  std::uint64_t floor_violations = 0;
  for (const auto& r : rounds) floor_violations += !(r.propensity > 0.0);
  report["nonpositive_propensities"] = floor_violations;

  const fs::path meta_path = fs::absolute(log_path).parent_path() / kMetaName;
  if (fs::exists(meta_path)) {
    const auto meta = read_json(meta_path);
    const RunConfig config = RunConfig::parse(meta.at("config").get<std::string>());
    const auto env = make_environment(config);
    const auto model = make_model(config, *env);
    if (env->has_analytic_rewards()) report["expected_regret"] = expected_regret(rounds, *env);

    std::vector<ParamVector> refs;
    std::string ref_source;
    if (!ref_path.empty()) {
      refs.push_back(Checkpoint::load(ref_path).params);
      ref_source = ref_path;
    } else if (model.num_params() == 1) {
      refs = grid_scan_references(*env, model);
      ref_source = "grid-scan";
    }
    if (!refs.empty()) {
      report["mismatching_rate"] = mismatching_rate(rounds, model, refs, *env);
      report["mismatch_reference"] = ref_source;
    }
    if (!config.env_test_csv.empty() && !refs.empty() && !ref_path.empty()) {
      const auto test =
          load_labeled_csv(config.env_test_csv, config.env_label_column, env->num_actions());
      report["oos_mse"] = out_of_sample_mse(model, refs.front(), test);
      report["top1_accuracy"] = top1_accuracy(model, refs.front(), test);
    }
  }
  std::cout << report.dump(2) << '\n';
  return 0;
}

int fail(const char* contract, const std::exception& e, int code) {
  std::cerr << "error: " << contract << ": " << e.what() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staged stochastic-gradient contextual bandit experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint_path, log_path, ref_path;
  std::vector<std::string> sweep_configs;
  std::uint64_t seed = 0;
  std::size_t replicates = 1, jobs = 1;

  auto* run = app.add_subcommand("run", "play one run to completion");
  run->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_dir, "output directory (default: config `out`)");

  auto* sw = app.add_subcommand("sweep", "replicate one or more configs");
  sw->add_option("--config", sweep_configs, "config file(s)")->required()->check(CLI::ExistingFile);
  sw->add_option("--replicates", replicates, "seeds per config")->required()->check(CLI::PositiveNumber);
  sw->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);
  sw->add_option("--out", out_dir, "directory for summary.tsv");

  auto* met = app.add_subcommand("metrics", "score a run log");
  met->add_option("--log", log_path, "run_log.tsv")->required()->check(CLI::ExistingFile);
  met->add_option("--ref-checkpoint", ref_path, "reference checkpoint for mismatching rate")
      ->check(CLI::ExistingFile);

  auto* res = app.add_subcommand("resume", "continue a run from a checkpoint");
  res->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required()->check(CLI::ExistingFile);
  res->add_option("--config", config_path, "config to verify against (default: embedded)");
  res->add_option("--out", out_dir, "output directory (default: checkpoint directory)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, seed_opt->count() ? std::optional(seed) : std::nullopt, out_dir);
    if (*sw) return cmd_sweep(sweep_configs, replicates, jobs, out_dir);
    if (*met) return cmd_metrics(log_path, ref_path);
    if (*res) return cmd_resume(checkpoint_path, config_path, out_dir);
  } catch (const ConfigMismatch& e) {
    return fail("ConfigMismatch", e, 3);
  } catch (const ContractViolation& e) {
    return fail("ContractViolation", e, 4);
  } catch (const ParseError& e) {
    return fail("ParseError", e, 2);
  } catch (const ValidationError& e) {
    return fail("ValidationError", e, 2);
  } catch (const ShapeError& e) {
    return fail("ShapeError", e, 2);
  } catch (const IndexError& e) {
    return fail("IndexError", e, 2);
  } catch (const std::exception& e) {
    return fail("runtime", e, 1);
  }
  return 1;
}
