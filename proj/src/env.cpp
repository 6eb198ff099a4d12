#include "resq/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "resq/errors.hpp"

namespace resq {

void RewardParams::validate() const {
  if (h <= 0.0 || r_global_min <= 0.0 || r_timeout <= 0.0 || t_sv_minutes <= 0.0) {
    throw Error(Errc::bad_config, "reward parameters must be positive");
  }
}

int action_index(const Action& action, const EncoderDims& dims) {
  if (action.is_wait()) return dims.wait_index();
  return 1 + action.mno() * dims.max_slots + action.slot();
}

Action action_from_index(int index, const EncoderDims& dims) {
  if (index == dims.wait_index()) return Action::wait();
  if (index < 1 || index >= dims.action_count()) {
    throw Error(Errc::index_out_of_bounds, "action index " + std::to_string(index));
  }
  return Action::accept((index - 1) / dims.max_slots, (index - 1) % dims.max_slots);
}

std::string trace_line(const EnvState& state, const Action& action, const StepOutcome& outcome) {
  char buf[128];
  std::string name = action.is_wait() ? "\"wait\""
                                      : "\"accept(" + std::to_string(action.mno()) + "," +
                                            std::to_string(action.slot()) + ")\"";
  std::snprintf(buf, sizeof(buf), "{\"k\":%d,\"action\":%s,\"reward\":%.17g,\"done\":%s}",
                state.revealed, name.c_str(), outcome.reward, outcome.done ? "true" : "false");
  return buf;
}

AreaEnv::AreaEnv(const CostArea& area, RewardParams params)
    : area_(&area), params_(params) {
  area.validate();
  params.validate();
  global_min_ = area.global_min();
}

bool AreaEnv::action_legal(const EnvState& state, const Action& action) const {
  if (state.done) return false;
  if (action.is_wait()) return state.revealed < area_->sessions;
  if (state.revealed < 1) return false;
  return action.mno() >= 0 && action.mno() < area_->mno_count() && action.slot() >= 0 &&
         action.slot() < area_->slot_count();
}

std::vector<Action> AreaEnv::legal_actions(const EnvState& state) const {
  if (state.done) throw Error(Errc::episode_finished, "episode is over");
  std::vector<Action> actions;
  if (state.revealed >= 1) {
    for (int m = 0; m < area_->mno_count(); ++m) {
      for (int r = 0; r < area_->slot_count(); ++r) {
        actions.push_back(Action::accept(m, r));
      }
    }
  }
  if (state.revealed < area_->sessions) actions.push_back(Action::wait());
  return actions;
}

std::vector<std::uint8_t> AreaEnv::legal_mask(const EnvState& state,
                                              const EncoderDims& dims) const {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(dims.action_count()), 0);
  if (state.done) return mask;
  if (state.revealed >= 1) {
    for (int m = 0; m < area_->mno_count(); ++m) {
      for (int r = 0; r < area_->slot_count(); ++r) {
        mask[static_cast<std::size_t>(1 + m * dims.max_slots + r)] = 1;
      }
    }
  }
  if (state.revealed < area_->sessions) {
    mask[static_cast<std::size_t>(dims.wait_index())] = 1;
  }
  return mask;
}

double AreaEnv::compute_reward(const EnvState& state, const Action& action) const {
  if (state.done) throw Error(Errc::episode_finished, "episode is over");
  if (action.is_wait()) {
    if (state.revealed == 0) return 0.0;
    if (state.revealed >= area_->sessions) return -params_.r_timeout;  // clock ran out
    return -std::exp(params_.h * elapsed_minutes(state));
  }
  if (!action_legal(state, action)) {
    throw Error(Errc::illegal_action, "accept is not available in this state");
  }
  const Money price = area_->price(state.revealed - 1, action.mno(), action.slot());
  if (price == global_min_) return params_.r_global_min;
  return global_min_.to_double() - price.to_double();
}

StepOutcome AreaEnv::step(const EnvState& state, const Action& action) const {
  if (state.done) throw Error(Errc::episode_finished, "episode is over");
  // Wait past the last session is the timeout end; compute_reward covers it,
  // everything else illegal is rejected here.
  if (!action_legal(state, action) &&
      !(action.is_wait() && state.revealed >= area_->sessions)) {
    throw Error(Errc::illegal_action, "action not legal in this state");
  }

  StepOutcome out;
  out.reward = compute_reward(state, action);
  out.info.global_min = global_min_;
  if (action.is_wait() && state.revealed < area_->sessions) {
    out.next = EnvState{state.revealed + 1, false};
    out.done = false;
  } else {
    out.next = EnvState{state.revealed, true};
    out.done = true;
    if (!action.is_wait()) {
      out.info.accepted_price = area_->price(state.revealed - 1, action.mno(), action.slot());
    }
  }
  out.next.done = out.done;
  out.info.session_index = out.next.revealed - 1;
  return out;
}

FeatureVec AreaEnv::encode_state(const EnvState& state, const EncoderDims& dims) const {
  if (area_->sessions > dims.max_sessions || area_->mno_count() > dims.max_mnos ||
      area_->slot_count() > dims.max_slots) {
    throw Error(Errc::area_too_large, area_->area_id + " does not fit the encoder box");
  }

  FeatureVec features;
  features.dim = dims.feature_dim();

  double running_max = 0.0;
  for (int n = 0; n < state.revealed; ++n) {
    for (int m = 0; m < area_->mno_count(); ++m) {
      for (int r = 0; r < area_->slot_count(); ++r) {
        running_max = std::max(running_max, area_->price(n, m, r).to_double());
      }
    }
  }
  const double scale = running_max > 0.0 ? running_max : 1.0;

  // Sessions are laid out newest-first: padded row 0 always holds the only
  // acceptable (latest) session, so its features sit at fixed positions no
  // matter how far the episode has progressed.
  const std::int32_t block = dims.max_sessions * dims.max_mnos * dims.max_slots;
  for (int age = 0; age < state.revealed; ++age) {
    const int n = state.revealed - 1 - age;
    for (int m = 0; m < area_->mno_count(); ++m) {
      for (int r = 0; r < area_->slot_count(); ++r) {
        const std::int32_t pos = (age * dims.max_mnos + m) * dims.max_slots + r;
        features.push(pos, area_->price(n, m, r).to_double() / scale);
      }
    }
  }
  for (int age = 0; age < state.revealed; ++age) {
    for (int m = 0; m < area_->mno_count(); ++m) {
      for (int r = 0; r < area_->slot_count(); ++r) {
        const std::int32_t pos = (age * dims.max_mnos + m) * dims.max_slots + r;
        features.push(block + pos, 1.0);
      }
    }
  }
  features.push(2 * block, static_cast<double>(state.revealed) / dims.max_sessions);
  features.push(2 * block + 1,
                elapsed_minutes(state) / (dims.max_sessions * params_.t_sv_minutes));
  return features;
}

}  // namespace resq
