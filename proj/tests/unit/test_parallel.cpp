#include <doctest.h>

#include <cmath>

#include "sscb/parallel.hpp"

using namespace sscb;
using par::Exec;

TEST_CASE("grid evaluation is identical serial and parallel") {
  auto f = [](double x) { return std::sin(3 * x) * std::exp(-x * x); };
  const auto s = par::evaluate_grid(f, -3, 3, 1e-3, Exec::kSerial);
  const auto p = par::evaluate_grid(f, -3, 3, 1e-3, Exec::kOpenMP);
  CHECK(s.size() == 6001);
  CHECK(s == p);
}

TEST_CASE("grid local minima") {
  const std::vector<double> v{3, 1, 2, 2, 0, 0, 5, 4};
  const auto m = par::grid_local_minima(v, 10.0, 0.5);
  REQUIRE(m.size() == 2);
  CHECK(m[0].index == 1);
  CHECK(m[0].x == 10.5);
  CHECK(m[1].index == 4);
  CHECK(m[1].value == 0.0);
  // x^2 on a grid: the single minimum sits at 0.
  const auto q = par::evaluate_grid([](double x) { return x * x; }, -1, 1, 0.01, Exec::kSerial);
  const auto qm = par::grid_local_minima(q, -1, 0.01);
  REQUIRE(qm.size() == 1);
  CHECK(std::abs(qm[0].x) < 1e-12);
}

TEST_CASE("moments merge matches one pass") {
  Rng rng(1, 0);
  par::Moments all(2), a(2), b(2);
  for (int i = 0; i < 1000; ++i) {
    const double s[2] = {rng.normal(), 3 * rng.uniform()};
    all.add(s);
    (i < 371 ? a : b).add(s);
  }
  a.merge(b);
  CHECK(a.count == all.count);
  for (int k = 0; k < 2; ++k) {
    CHECK(a.mean[k] == doctest::Approx(all.mean[k]).epsilon(1e-12));
    CHECK(a.variance()[k] == doctest::Approx(all.variance()[k]).epsilon(1e-10));
  }
  CHECK(all.variance()[1] == doctest::Approx(0.75).epsilon(0.1));
}

TEST_CASE("monte carlo moments are identical serial and parallel") {
  auto draw = [](Rng& rng, std::span<double> out) {
    out[0] = rng.normal();
    out[1] = rng.uniform();
    return out[1] < 0.8;
  };
  const auto s = par::monte_carlo_moments(2, 100000, 17, draw, Exec::kSerial, 1000);
  const auto p = par::monte_carlo_moments(2, 100000, 17, draw, Exec::kOpenMP, 1000);
  CHECK(s.count == p.count);
  CHECK(s.mean == p.mean);
  CHECK(s.m2 == p.m2);
  CHECK(s.count == doctest::Approx(80000).epsilon(0.02));
  CHECK(std::abs(s.mean[0]) < 4 / std::sqrt(80000.0));
}

TEST_CASE("mismatch fold") {
  std::vector<RoundRecord> log(1000);
  Rng rng(2, 0);
  std::uint64_t expect = 0;
  const std::vector<std::uint32_t> greedy{1, 0, 2};
  for (std::size_t i = 0; i < log.size(); ++i) {
    log[i].context_id = static_cast<std::uint32_t>(rng.index(3));
    log[i].action = static_cast<std::uint32_t>(rng.index(3));
    expect += log[i].action != greedy[log[i].context_id];
  }
  CHECK(par::count_mismatches(log, greedy, Exec::kSerial) == expect);
  CHECK(par::count_mismatches(log, greedy, Exec::kOpenMP) == expect);
  log[5].context_id = 9;
  CHECK_THROWS(par::count_mismatches(log, greedy, Exec::kSerial));
}
