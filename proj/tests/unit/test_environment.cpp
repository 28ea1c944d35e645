#include <doctest.h>

#include <cmath>
#include <set>

#include "sscb/environment.hpp"
#include "sscb/error.hpp"

using namespace sscb;

namespace {

const std::string kData = SSCB_TEST_DATA;

// Toy objective written out directly from the reward laws.
double toy_F(double x) {
  const double mu[2][2] = {{0.5, 0.7}, {0.6, 0.1}};
  const double var[2][2] = {{0.36 / 12, 0.09 / 12}, {0.36 / 12, 0.04 / 12}};
  const double ds[2] = {2.0, 5.0};
  double total = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double s = std::sin(ds[c] * x), e = std::exp(-ds[c] * x * ds[c] * x);
    const double f[2] = {0.2 * s * s + 0.8 * e, 0.8 * s * s + 0.2 * e};
    for (int a = 0; a < 2; ++a) total += 0.5 * ((f[a] - mu[c][a]) * (f[a] - mu[c][a]) + var[c][a]);
  }
  return total;
}

ParamVector scalar(double x) { return ParamVector(std::vector<double>{x}); }

}  // namespace

TEST_CASE("toy environment laws") {
  ToyEnvironment env;
  Rng ctx(1, 0), rew(1, 1);
  int first = 0;
  const int n = 100000;
  double sum[2][2] = {}, lo[2][2], hi[2][2];
  int cnt[2][2] = {};
  for (auto& row : lo) row[0] = row[1] = 1e9;
  for (auto& row : hi) row[0] = row[1] = -1e9;
  for (int i = 0; i < n; ++i) {
    const auto id = env.sample_context(ctx);
    first += id == 0;
    const std::size_t a = i % 2;
    const double r = env.sample_reward(id, a, rew);
    sum[id][a] += r;
    ++cnt[id][a];
    lo[id][a] = std::min(lo[id][a], r);
    hi[id][a] = std::max(hi[id][a], r);
  }
  CHECK(first / double(n) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(env.context(0)[0] == 2.0);
  CHECK(env.context(1)[0] == 5.0);
  CHECK(lo[1][1] >= 0.0);
  CHECK(hi[1][1] <= 0.2);
  CHECK(lo[0][0] >= 0.2);
  CHECK(hi[0][1] <= 0.85);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t a = 0; a < 2; ++a)
      CHECK(sum[c][a] / cnt[c][a] == doctest::Approx(*env.mean_reward(c, a)).epsilon(0.01));
  CHECK(*env.reward_variance(1, 1) == doctest::Approx(1.0 / 300.0));
  CHECK(*env.optimal_action(0) == 1);
  CHECK(*env.optimal_action(1) == 0);
}

TEST_CASE("a bandit round reveals one reward") {
  ToyEnvironment env;
  Rng ctx(2, 0), rew(2, 1);
  auto round = sample_round(env, ctx, rew);
  CHECK_NOTHROW(round.reward(0));
  CHECK_THROWS_AS(round.reward(1), ContractViolation);
}

TEST_CASE("toy objective") {
  ToyEnvironment env;
  const auto m = RewardModel::toy_trig();
  CHECK(objective_variance_floor(env) == doctest::Approx(0.0354166666666667).epsilon(1e-12));
  for (double x : {-2.1, -0.5, 0.0, 0.09, 0.3, 1.7}) {
    CHECK(true_objective(env, m, scalar(x)) == doctest::Approx(toy_F(x)).epsilon(1e-12));
    CHECK(true_objective(env, m, scalar(x)) == doctest::Approx(true_objective(env, m, scalar(-x))));
    CHECK(true_objective(env, m, scalar(x)) >= objective_variance_floor(env));
    const double h = 1e-6;
    CHECK(true_objective_gradient(env, m, scalar(x))[0] ==
          doctest::Approx((toy_F(x + h) - toy_F(x - h)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("toy objective has local minima near 0.0903 and 0.5123") {
  for (double x : {0.0903, 0.5123, -0.0903, -0.5123}) {
    CHECK(toy_F(x) < toy_F(x - 1e-3));
    CHECK(toy_F(x) < toy_F(x + 1e-3));
  }
  CHECK(toy_F(0.0) > toy_F(1e-3));
}

TEST_CASE("synthetic linear environment") {
  SyntheticLinearEnvironment env(20, 4, 3, 9);
  CHECK(env.num_contexts() == 20);
  for (std::size_t id = 0; id < 20; ++id) {
    const auto d = env.context(id);
    CHECK(d[3] == 1.0);
    for (std::size_t a = 0; a < 3; ++a) {
      const double p = *env.mean_reward(id, a);
      CHECK(p > 0.0);
      CHECK(p < 1.0);
      CHECK(*env.reward_variance(id, a) == doctest::Approx(p * (1 - p)));
    }
  }
  SyntheticLinearEnvironment same(20, 4, 3, 9);
  CHECK(*same.mean_reward(7, 2) == *env.mean_reward(7, 2));
  Rng rng(1, 1);
  for (int i = 0; i < 100; ++i) {
    const double r = env.sample_reward(i % 20, i % 3, rng);
    CHECK((r == 0.0 || r == 1.0));
  }
}

TEST_CASE("csv datasets") {
  const auto data = load_labeled_csv(kData + "/small.csv", "label");
  CHECK(data.size() == 6);
  CHECK(data.num_classes == 3);
  CHECK(data.labels[2] == 2);
  CHECK(data.features[1][1] == doctest::Approx(-0.3));

  try {
    load_labeled_csv(kData + "/bad_row.csv", "label");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(load_labeled_csv(kData + "/bad_label.csv", "label"), ValidationError);
  CHECK_THROWS_AS(load_labeled_csv(kData + "/small.csv", "label", 2), ValidationError);
  CHECK_THROWS_AS(load_labeled_csv(kData + "/small.csv", "class"), ParseError);
}

TEST_CASE("dataset environment") {
  const auto clean = load_dataset_env(kData + "/small.csv", "label", 0.0, 5);
  CHECK(clean.labels() == clean.original_labels());
  CHECK(clean.relabeled_rows().empty());
  Rng rng(1, 1);
  CHECK(clean.sample_reward(2, 2, rng) == 1.0);
  CHECK(clean.sample_reward(2, 0, rng) == 0.0);
  CHECK(*clean.optimal_action(2) == 2);

  const auto one = load_dataset_env(kData + "/one_row.csv", "label", 0.0, 1);
  Rng ctx(3, 0);
  for (int i = 0; i < 10; ++i) {
    const auto id = one.sample_context(ctx);
    CHECK(one.context(id)[0] == 1.5);
    CHECK(one.context(id)[1] == -1.0);
  }

  const auto a = load_dataset_env(kData + "/small.csv", "label", 0.5, 11);
  const auto b = load_dataset_env(kData + "/small.csv", "label", 0.5, 11);
  CHECK(a.labels() == b.labels());
  CHECK(a.relabeled_rows().size() == 3);
}

TEST_CASE("full relabeling agrees with the original about 1/K of the time") {
  LabeledSet data;
  data.num_classes = 2;
  Rng rng(5, 0);
  for (int i = 0; i < 20000; ++i) {
    data.features.push_back({double(i)});
    data.labels.push_back(rng.index(2));
  }
  DatasetEnvironment env(data, 1.0, 3);
  CHECK(env.relabeled_rows().size() == 20000);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < 20000; ++i) agree += env.labels()[i] == env.original_labels()[i];
  const double se = std::sqrt(0.25 / 20000);
  CHECK(std::abs(agree / 20000.0 - 0.5) < 3 * se);
}
