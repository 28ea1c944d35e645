#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sscb/error.hpp"
#include "sscb/model.hpp"

using namespace sscb;

namespace {

ParamVector scalar(double x) { return ParamVector(std::vector<double>{x}); }

ParamVector random_params(const RewardModel& m, Rng& rng, double scale) {
  ParamVector x(m.num_params());
  for (double& v : x.view()) v = scale * (2.0 * rng.uniform() - 1.0);
  return x;
}

double max_rel_error(const ParamVector& a, const ParamVector& b) {
  double err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    err = std::max(err, std::abs(a[i] - b[i]) / std::max(1e-6, std::abs(b[i])));
  return err;
}

}  // namespace

TEST_CASE("toy-trig predictions") {
  const auto m = RewardModel::toy_trig();
  const std::vector<double> d{2.0};
  auto f = m.predict(scalar(0.0), d);
  CHECK(f[0] == doctest::Approx(0.8));
  CHECK(f[1] == doctest::Approx(0.2));

  const double e = std::exp(-std::numbers::pi * std::numbers::pi / 4.0);
  f = m.predict(scalar(std::numbers::pi / 4.0), d);
  CHECK(f[0] == doctest::Approx(0.2 + 0.8 * e).epsilon(1e-12));
  CHECK(f[1] == doctest::Approx(0.8 + 0.2 * e).epsilon(1e-12));
}

TEST_CASE("zero-weight logistic linear model predicts one half") {
  const auto m = RewardModel::linear(4, 3);
  const auto f = m.predict(ParamVector(m.num_params()), std::vector<double>{0.3, -2.0, 1.0});
  REQUIRE(f.size() == 4);
  for (double v : f) CHECK(v == 0.5);
  CHECK(m.num_params() == 4 * (3 + 1));
}

TEST_CASE("loss values") {
  const auto m = RewardModel::toy_trig();
  const std::vector<double> d{2.0};
  CHECK(m.loss(scalar(0.0), d, 0, 0.5) == doctest::Approx(0.09));
  CHECK(m.loss(scalar(0.0), d, 0, 0.8) == 0.0);
  CHECK(m.loss(scalar(0.0), d, 1, 0.8) == doctest::Approx(0.36));
}

TEST_CASE("loss gradient vanishes when the estimate equals the reward") {
  const auto m = RewardModel::toy_trig();
  const auto g = m.loss_gradient(scalar(0.7), std::vector<double>{5.0}, 1,
                                 m.predict(scalar(0.7), std::vector<double>{5.0})[1]);
  CHECK(g[0] == 0.0);
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(123, 0);
  const std::vector<RewardModel> models{
      RewardModel::toy_trig(), RewardModel::linear(3, 4),
      RewardModel::linear(3, 4, OutputSquash::kIdentity), RewardModel::mlp(3, 4, {8, 5})};
  for (const auto& m : models) {
    CAPTURE(m.describe());
    for (int trial = 0; trial < 25; ++trial) {
      const auto x = random_params(m, rng, m.family() == ModelFamily::kToyTrig ? 2.0 : 1.0);
      std::vector<double> d(m.context_dim());
      for (double& v : d) v = m.family() == ModelFamily::kToyTrig ? (rng.uniform() < 0.5 ? 2 : 5)
                                                                   : 2.0 * rng.uniform() - 1.0;
      const std::size_t a = rng.index(m.num_actions());
      const double r = rng.uniform();
      CHECK(max_rel_error(m.loss_gradient(x, d, a, r), fd_loss_gradient(m, x, d, a, r)) < 1e-4);
    }
  }
}

TEST_CASE("finite differences converge at second order") {
  const auto m = RewardModel::toy_trig();
  const std::vector<double> d{2.0};
  const auto x = scalar(0.37);
  const double exact = m.loss_gradient(x, d, 0, 0.3)[0];
  const double e1 = std::abs(fd_loss_gradient(m, x, d, 0, 0.3, 1e-2)[0] - exact);
  const double e2 = std::abs(fd_loss_gradient(m, x, d, 0, 0.3, 5e-3)[0] - exact);
  CHECK(e2 / e1 == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("finite differences of a constant model are zero") {
  // x = 0 with d = 0: toy predictions do not depend on x at all.
  const auto m = RewardModel::toy_trig();
  CHECK(fd_loss_gradient(m, scalar(0.4), std::vector<double>{0.0}, 0, 0.1)[0] == 0.0);
  CHECK_THROWS_AS(fd_loss_gradient(m, scalar(0.4), std::vector<double>{2.0}, 0, 0.1, 0.0),
                  ValidationError);
}

TEST_CASE("shape and index errors") {
  const auto m = RewardModel::linear(2, 3);
  CHECK_THROWS_AS(m.predict(ParamVector(3), std::vector<double>{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(m.predict(ParamVector(m.num_params()), std::vector<double>{1, 2}), ShapeError);
  CHECK_THROWS_AS(m.loss(ParamVector(m.num_params()), std::vector<double>{1, 2, 3}, 2, 0.0),
                  IndexError);
}

TEST_CASE("mlp init is bounded by fan-in and seeded") {
  const auto m = RewardModel::mlp(2, 9, {4});
  Rng a(1, 4), b(1, 4);
  const auto x = m.initial_params(a);
  CHECK(x == m.initial_params(b));
  for (std::size_t i = 0; i < 9 * 4; ++i) CHECK(std::abs(x[i]) <= 1.0 / 3.0);
  for (double v : m.predict(x, std::vector<double>(9, 0.5))) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("model family names round-trip") {
  for (auto f : {ModelFamily::kToyTrig, ModelFamily::kLinear, ModelFamily::kMlp})
    CHECK(parse_model_family(to_string(f)) == f);
  CHECK_THROWS_AS(parse_model_family("cnn"), ValidationError);
}
