#include "sscb/optimizer.hpp"

#include <cmath>
#include <string>

#include "sscb/error.hpp"

namespace sscb {

void StageSchedule::validate() const {
  if (initial_rounds == 0) throw ValidationError("T0 must be at least 1");
  if (stages == 0) throw ValidationError("stage count S must be at least 1");
  if (!(eta0 > 0.0)) throw ValidationError("eta0 must be positive");
  if (!(noise0 >= 0.0)) throw ValidationError("noise0 must be non-negative");
  if (!(kappa > 0.0)) throw ValidationError("kappa must be positive");
  if (mode == ScheduleMode::kStaged && !(upsilon >= 1.0))
    throw ValidationError("staged schedules need upsilon >= 1; got " + std::to_string(upsilon));
  if (mode == ScheduleMode::kSingleRound && !(upsilon > 0.0))
    throw ValidationError("upsilon must be positive");
}

std::uint64_t StageSchedule::offset() const {
  return mode == ScheduleMode::kSingleRound ? sgdscb_offset(upsilon) : 0;
}

std::uint64_t stage_length(const StageSchedule& sched, std::uint64_t stage) {
  if (stage == 0) throw ValidationError("stage index starts at 1");
  if (sched.mode == ScheduleMode::kSingleRound) return 1;
  if (sched.upsilon == 1.0) return sched.initial_rounds * stage * stage;
  const double len = static_cast<double>(sched.initial_rounds) *
                     std::pow(static_cast<double>(stage), 2.0 * sched.upsilon);
  return static_cast<std::uint64_t>(std::floor(len));
}

std::uint64_t cumulative_rounds(const StageSchedule& sched, std::uint64_t last) {
  std::uint64_t total = 0;
  for (std::uint64_t s = 1; s <= last; ++s) total += stage_length(sched, s);
  return total;
}

double learning_rate(const StageSchedule& sched, std::uint64_t stage) {
  if (stage == 0) throw ValidationError("stage index starts at 1");
  return sched.eta0 / std::pow(static_cast<double>(stage), sched.upsilon);
}

std::uint64_t effective_stage(const StageSchedule& sched, const RoundCursor& cursor) {
  return cursor.stage + sched.offset();
}

void advance(RoundCursor& cursor, const StageSchedule& sched) {
  if (cursor.index >= stage_length(sched, cursor.stage)) {
    ++cursor.stage;
    cursor.index = 1;
  } else {
    ++cursor.index;
  }
  ++cursor.global;
}

bool schedule_finished(const RoundCursor& cursor, const StageSchedule& sched) {
  return cursor.stage > sched.stages;
}

ParamVector ips_gradient(const ParamVector& loss_grad, double propensity) {
  if (!(propensity > 0.0))
    throw ContractViolation("propensity must be positive for IPS correction (exploration floor "
                            "broken upstream); got " + std::to_string(propensity));
  ParamVector out = loss_grad;
  const double inv = 1.0 / propensity;
  for (double& g : out.view()) g *= inv;
  return out;
}

ParamVector sample_noise(std::size_t dim, std::uint64_t stage, double kappa, double noise0,
                         Rng& rng) {
  if (dim == 0) throw ValidationError("noise dimension must be at least 1");
  ParamVector w(dim);
  if (noise0 == 0.0) return w;
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& v : w.view()) {
      v = rng.normal();
      norm2 += v * v;
    }
  } while (norm2 == 0.0);
  const double scale = std::pow(static_cast<double>(stage), 0.5 * kappa) * noise0 / std::sqrt(norm2);
  for (double& v : w.view()) v *= scale;
  return w;
}

ParamVector sgd_step(const ParamVector& x, const ParamVector& grad, const ParamVector& noise,
                     double eta) {
  if (grad.size() != x.size() || noise.size() != x.size())
    throw ShapeError("sgd_step operands differ in length");
  ParamVector next = x;
  for (std::size_t i = 0; i < x.size(); ++i) next[i] -= eta * (grad[i] + noise[i]);
  if (!next.all_finite()) throw ContractViolation("parameter vector became non-finite");
  return next;
}

void add_l2_gradient(ParamVector& grad, const ParamVector& x, double lambda) {
  if (lambda == 0.0) return;
  if (grad.size() != x.size()) throw ShapeError("l2 gradient operands differ in length");
  for (std::size_t i = 0; i < x.size(); ++i) grad[i] += 2.0 * lambda * x[i];
}

std::uint64_t sgdscb_offset(double upsilon) {
  if (!(upsilon > 0.0)) throw ValidationError("upsilon must be positive");
  return static_cast<std::uint64_t>(std::ceil(std::exp2(1.0 / upsilon) - 1.0));
}

ParamVector sgdscb_step(const ParamVector& x, const ParamVector& grad, std::uint64_t round,
                        std::uint64_t offset, double eta0, double upsilon) {
  if (round == 0) throw ValidationError("round index starts at 1");
  const double eta = eta0 / std::pow(static_cast<double>(round + offset), upsilon);
  return sgd_step(x, grad, ParamVector(x.size()), eta);
}

}  // namespace sscb
