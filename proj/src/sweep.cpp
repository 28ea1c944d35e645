#include "sscb/sweep.hpp"

#include <chrono>
#include <charconv>
#include <exception>

#include <omp.h>

#include "sscb/error.hpp"
#include "sscb/simulation.hpp"

namespace sscb {

std::vector<ParamVector> grid_scan_references(const Environment& env, const RewardModel& model,
                                              double lo, double hi, double step, par::Exec exec) {
  if (model.num_params() != 1) throw ShapeError("grid scan needs a one-parameter model");
  const auto values = par::evaluate_grid(
      [&](double x) { return true_objective(env, model, ParamVector(std::vector<double>{x})); },
      lo, hi, step, exec);
  std::vector<ParamVector> refs;
  for (const auto& m : par::grid_local_minima(values, lo, step))
    refs.emplace_back(std::vector<double>{m.x});
  if (refs.empty()) throw ContractViolation("grid scan found no interior minimum");
  return refs;
}

namespace {

SweepRow run_one(const RunConfig& base, std::size_t replicate) {
  SweepRow row;
  row.name = base.name;
  row.replicate = replicate;
  row.seed = base.seed + replicate;
  const auto start = std::chrono::steady_clock::now();
  try {
    RunConfig config = base;
    config.seed = row.seed;
    Simulation sim(config);

    const bool single = config.schedule.mode == ScheduleMode::kSingleRound;
    const std::uint64_t planned = sim.planned_rounds();
    const std::uint64_t tail_start = planned - planned / 10;
    std::uint64_t tail_stage = 0;
    std::vector<RoundRecord> tail;
    sim.run([&](const RoundRecord& r, const Simulation&) {
      if (single) {
        if (r.round > tail_start || planned < 10) tail.push_back(r);
        return;
      }
      if (r.stage != tail_stage) {
        tail.clear();
        tail_stage = r.stage;
      }
      tail.push_back(r);
    });

    std::vector<ParamVector> refs;
    if (sim.model().num_params() == 1)
      refs = grid_scan_references(sim.environment(), sim.model(), -3.0, 3.0, 1e-4,
                                  par::Exec::kSerial);
    else
      refs.push_back(sim.params());
    row.rounds = sim.rounds_done();
    row.final_acr = sim.average_cumulative_regret();
    row.final_mismatch = mismatching_rate(tail, sim.model(), refs, sim.environment());
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
  }
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::string num(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<SweepRow> sweep(std::span<const RunConfig> configs, std::size_t replicates,
                            std::size_t jobs) {
  if (replicates == 0) throw ValidationError("replicates must be positive");
  if (jobs == 0) throw ValidationError("jobs must be positive");
  const auto total = static_cast<std::int64_t>(configs.size() * replicates);
  std::vector<SweepRow> rows(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(jobs))
  for (std::int64_t i = 0; i < total; ++i)
    rows[i] = run_one(configs[i / replicates], static_cast<std::size_t>(i) % replicates);
  return rows;
}

void write_summary_tsv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "name\treplicate\tseed\trounds\tfinal_acr\tfinal_mismatch\twall_seconds\tstatus\n";
  for (const auto& r : rows)
    out << r.name << '\t' << r.replicate << '\t' << r.seed << '\t' << r.rounds << '\t'
        << num(r.final_acr) << '\t' << num(r.final_mismatch) << '\t' << num(r.wall_seconds)
        << '\t' << r.status << '\n';
}

}  // namespace sscb
