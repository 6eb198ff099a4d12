#pragma once

#include <memory>
#include <string>
#include <vector>

#include "resq/agent.hpp"
#include "resq/env.hpp"

namespace resq {

// Optimum of the optimal-stopping episode on a fixed trace, found by
// exhaustive enumeration of the accept sessions. Upper bound for any policy.
struct OracleResult {
  double best_reward = 0.0;
  std::vector<Action> best_actions;  // waits followed by the accept
  int session = 0;                   // accepted tensor row
  int mno = 0;
  int slot = 0;
  Money accepted_price;
};

// Baseline rule: take the cheapest quote of the first real session.
Money no_policy_cost(const CostArea& area);

OracleResult dp_oracle(const CostArea& area, const RewardParams& params);

double cost_savings(Money policy_cost, Money baseline_cost);  // percent

// Decision rule under evaluation. Policies are cloneable so parallel workers
// can each own an instance; act() may keep per-episode state.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual Action act(const AreaEnv& env, const EnvState& state) = 0;
  virtual std::unique_ptr<Policy> clone() const = 0;
};

std::unique_ptr<Policy> make_baseline_policy();
std::unique_ptr<Policy> make_oracle_policy();
// Greedy over the network's Q values; the caller keeps `agent` alive.
std::unique_ptr<Policy> make_greedy_policy(const QAgent& agent);

struct AreaOutcome {
  std::string area_id;
  double cum_reward = 0.0;
  Money cost;            // accepted price; baseline fallback on timeout
  double penalty = 0.0;  // sum of waiting penalties (non-positive)
  Money baseline;        // no_policy_cost of the same area
  int accepted_session = -1;  // (n, m, r) of the accepted entry, -1s on timeout
  int accepted_mno = -1;
  int accepted_slot = -1;
  std::int64_t decision_time = 0;      // tau_D, unix seconds
  std::int64_t departure_offset = 0;   // accepted departure, seconds after tau_D
};

struct Metrics {
  std::string policy;
  int areas = 0;
  double avg_cum_reward = 0.0;
  Money cum_cost;
  double cum_penalty = 0.0;
  Money baseline_cost;
  double cost_savings_pct = 0.0;  // mean of per-area savings, baseline > 0 only
  double rank_correlation = 0.0;  // Spearman over (decision time, departure offset)
  std::vector<AreaOutcome> per_area;

  std::string to_json() const;
  std::string series_csv() const;  // episode,cum_reward,cum_cost,cum_penalty
};

// Runs each area once under the policy (deterministically, no exploration).
// `workers` > 1 evaluates areas in parallel threads.
Metrics evaluate_policy(const Policy& policy, const std::vector<CostArea>& areas,
                        const RewardParams& params, const EncoderDims& dims, int workers = 1);

}  // namespace resq
