#pragma once

#include <cstdint>
#include <span>

#include "sscb/model.hpp"
#include "sscb/rng.hpp"

namespace sscb {

enum class ScheduleMode {
  kStaged,       // SSGD-SCB: stage s lasts T0 s^{2 upsilon} rounds
  kSingleRound,  // SGD-SCB: one round per stage, no noise, index offset by delta_s
};

struct StageSchedule {
  std::uint64_t initial_rounds = 1000;  // T0
  double upsilon = 1.0;
  std::uint64_t stages = 10;  // S (rounds, in single-round mode)
  double eta0 = 0.05;
  double noise0 = 0.0;
  double kappa = 0.5;
  ScheduleMode mode = ScheduleMode::kStaged;

  // Throws ValidationError on out-of-range values.
  void validate() const;
  // delta_s in single-round mode, 0 otherwise.
  std::uint64_t offset() const;
};

// Position inside the schedule: stage s >= 1, within-stage index n in
// [1, T_s], and the global round index I(s, n).
struct RoundCursor {
  std::uint64_t stage = 1;
  std::uint64_t index = 1;
  std::uint64_t global = 1;

  friend bool operator==(const RoundCursor&, const RoundCursor&) = default;
};

// T0 s^{2 upsilon}, floored; exact integer arithmetic when upsilon == 1.
// Single-round mode always returns 1.
std::uint64_t stage_length(const StageSchedule& sched, std::uint64_t stage);

// Total rounds in stages 1..last.
std::uint64_t cumulative_rounds(const StageSchedule& sched, std::uint64_t last);

// eta0 / s^upsilon.
double learning_rate(const StageSchedule& sched, std::uint64_t stage);

// Stage index seen by the policy and the learning rate: s itself for staged
// runs, s + delta_s for single-round runs.
std::uint64_t effective_stage(const StageSchedule& sched, const RoundCursor& cursor);

void advance(RoundCursor& cursor, const StageSchedule& sched);
bool schedule_finished(const RoundCursor& cursor, const StageSchedule& sched);

// Loss gradient scaled by 1/propensity. Throws ContractViolation unless
// propensity > 0.
ParamVector ips_gradient(const ParamVector& loss_grad, double propensity);

// Random direction w/|w| (w standard normal) scaled to norm s^{kappa/2} noise0.
// noise0 == 0 returns the zero vector without consuming randomness.
ParamVector sample_noise(std::size_t dim, std::uint64_t stage, double kappa, double noise0,
                         Rng& rng);

// x - eta (g + noise). Throws ContractViolation if the result is not finite.
ParamVector sgd_step(const ParamVector& x, const ParamVector& grad, const ParamVector& noise,
                     double eta);

// Gradient of lambda |x|^2 added in place to grad.
void add_l2_gradient(ParamVector& grad, const ParamVector& x, double lambda);

// ceil(2^{1/upsilon} - 1).
std::uint64_t sgdscb_offset(double upsilon);

// x - eta0 / (t + delta_s)^upsilon * g.
ParamVector sgdscb_step(const ParamVector& x, const ParamVector& grad, std::uint64_t round,
                        std::uint64_t offset, double eta0, double upsilon);

}  // namespace sscb
