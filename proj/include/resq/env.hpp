#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "resq/coverage.hpp"
#include "resq/feature_vec.hpp"

namespace resq {

struct RewardParams {
  double h = 0.01;            // waiting-penalty rate per minute
  double r_global_min = 1.0;  // bonus for accepting the tensor's minimum
  double r_timeout = 2.0;     // penalty when the clock runs out with no accept
  double t_sv_minutes = 1.0;  // episode clock step

  void validate() const;
};

// Accept(m, r) on the latest revealed session, or Wait for the next one.
class Action {
 public:
  static Action wait() { return Action(-1, -1); }
  static Action accept(int mno, int slot) { return Action(mno, slot); }

  bool is_wait() const { return mno_ < 0; }
  int mno() const { return mno_; }
  int slot() const { return slot_; }

  bool operator==(const Action&) const = default;

 private:
  Action(int mno, int slot) : mno_(mno), slot_(slot) {}
  int mno_;
  int slot_;
};

// k = number of real sessions revealed; k = 0 means only the zero-price
// start session is visible. The latest acceptable session is row k - 1.
struct EnvState {
  int revealed = 0;
  bool done = false;
};

// Fixed encoder geometry: every area is padded into this box so one network
// serves areas of any admissible shape. Action indices live in the same box;
// Wait is index 0, so greedy ties on a fresh network resolve to waiting and
// episodes explore deep before the value estimates separate.
struct EncoderDims {
  int max_sessions = 32;  // N_max
  int max_mnos = 3;       // M_max
  int max_slots = 32;     // R_max

  int action_count() const { return max_mnos * max_slots + 1; }
  int wait_index() const { return 0; }
  std::int32_t feature_dim() const {
    return 2 * max_sessions * max_mnos * max_slots + 2;
  }
};

int action_index(const Action& action, const EncoderDims& dims);
Action action_from_index(int index, const EncoderDims& dims);

struct StepInfo {
  std::optional<Money> accepted_price;
  Money global_min;
  int session_index = -1;  // latest revealed session after the step
};

struct StepOutcome {
  EnvState next;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// One JSON-lines record of an episode step: {"k": .., "action": .., "reward":
// .., "done": ..}, for optional episode trace logs.
std::string trace_line(const EnvState& state, const Action& action, const StepOutcome& outcome);

// Episode over one cost area. The environment itself is stateless: state goes
// in, outcome comes out, and the area is never mutated.
class AreaEnv {
 public:
  AreaEnv(const CostArea& area, RewardParams params);

  EnvState reset() const { return EnvState{}; }

  std::vector<Action> legal_actions(const EnvState& state) const;
  std::vector<std::uint8_t> legal_mask(const EnvState& state, const EncoderDims& dims) const;

  // Eq. of motion for the reward clock: the first wait (from the zero-price
  // start) is free, later waits cost -exp(h * t) with t = k * t_sv minutes.
  double compute_reward(const EnvState& state, const Action& action) const;

  StepOutcome step(const EnvState& state, const Action& action) const;

  // [normalized revealed prices | presence mask | k/N_max | t/(N_max*t_sv)],
  // prices scaled by the running maximum revealed so far (1 if none).
  FeatureVec encode_state(const EnvState& state, const EncoderDims& dims) const;

  double elapsed_minutes(const EnvState& state) const {
    return state.revealed * params_.t_sv_minutes;
  }

  const CostArea& area() const { return *area_; }
  const RewardParams& params() const { return params_; }
  Money global_min() const { return global_min_; }

 private:
  bool action_legal(const EnvState& state, const Action& action) const;

  const CostArea* area_;
  RewardParams params_;
  Money global_min_;
};

}  // namespace resq
