#include <doctest.h>

#include <sstream>

#include "sscb/simulation.hpp"
#include "sscb/sweep.hpp"

using namespace sscb;

namespace {

RunConfig toy(const std::string& name, std::uint64_t seed) {
  return RunConfig::parse("name = " + name + "\nseed = " + std::to_string(seed) +
                          "\nenv = toy\nmodel = toy-trig\nschedule.T0 = 20\nschedule.stages = 4\n"
                          "schedule.eta0 = 0.01\nschedule.noise0 = 1e-3\npolicy.omega = 1\n"
                          "policy.C = 0\n");
}

}  // namespace

TEST_CASE("grid-scan references for the toy problem") {
  ToyEnvironment env;
  const auto refs = grid_scan_references(env, RewardModel::toy_trig());
  bool near_small = false, near_mid = false;
  for (const auto& r : refs) {
    near_small |= std::abs(r[0] - 0.0903) < 2e-4;
    near_mid |= std::abs(r[0] + 0.5123) < 2e-4;
  }
  CHECK(near_small);
  CHECK(near_mid);
  CHECK(refs.size() % 2 == 0);  // F is even
  CHECK(refs == grid_scan_references(env, RewardModel::toy_trig(), -3, 3, 1e-4, par::Exec::kSerial));
}

TEST_CASE("sweep counts, seeds and determinism") {
  const std::vector<RunConfig> configs{toy("a", 10), toy("b", 20)};
  const auto rows = sweep(configs, 3, 2);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].name == "a");
  CHECK(rows[4].name == "b");
  CHECK(rows[4].seed == 21);
  for (const auto& r : rows) {
    CHECK(r.status == "ok");
    CHECK(r.rounds == 600);
  }
  const auto again = sweep(configs, 3, 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].final_acr == again[i].final_acr);
    CHECK(rows[i].final_mismatch == again[i].final_mismatch);
  }
}

TEST_CASE("single replicate equals a plain run") {
  const auto config = toy("one", 5);
  const auto rows = sweep(std::vector<RunConfig>{config}, 1, 1);
  Simulation sim(config);
  sim.run(nullptr);
  CHECK(rows[0].final_acr == sim.average_cumulative_regret());
  CHECK(rows[0].rounds == sim.rounds_done());
}

TEST_CASE("failed runs are recorded and the sweep continues") {
  auto bad = toy("bad", 1);
  bad.schedule.eta0 = 1e300;  // first update overflows
  bad.schedule.noise0 = 1e300;
  const auto rows = sweep(std::vector<RunConfig>{bad, toy("good", 1)}, 1, 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].status.rfind("error:", 0) == 0);
  CHECK(rows[1].status == "ok");
  std::ostringstream out;
  write_summary_tsv(out, rows);
  CHECK(out.str().find("final_mismatch") != std::string::npos);
}
