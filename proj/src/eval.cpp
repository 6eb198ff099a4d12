#include "resq/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <json.hpp>

#include "resq/errors.hpp"

namespace resq {

using nlohmann::json;

Money no_policy_cost(const CostArea& area) {
  Money best = area.price(0, 0, 0);
  for (int m = 0; m < area.mno_count(); ++m) {
    for (int r = 0; r < area.slot_count(); ++r) {
      best = std::min(best, area.price(0, m, r));
    }
  }
  return best;
}

OracleResult dp_oracle(const CostArea& area, const RewardParams& params) {
  const AreaEnv env(area, params);
  const Money global_min = env.global_min();

  // Candidate plans: wait until session j is the latest, then accept the
  // best (m, r) of row j. Later accepts only differ by more wait penalty, so
  // enumerating j x (m, r) covers every undominated action sequence.
  OracleResult best;
  bool first = true;
  for (int j = 0; j < area.sessions; ++j) {
    int best_m = 0;
    int best_r = 0;
    double best_accept = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < area.mno_count(); ++m) {
      for (int r = 0; r < area.slot_count(); ++r) {
        const Money price = area.price(j, m, r);
        const double reward = price == global_min
                                  ? params.r_global_min
                                  : global_min.to_double() - price.to_double();
        if (reward > best_accept) {
          best_accept = reward;
          best_m = m;
          best_r = r;
        }
      }
    }

    // Replay the candidate through the environment so the oracle value is
    // exactly what any policy following this plan would accumulate.
    std::vector<Action> plan(static_cast<std::size_t>(j + 1), Action::wait());
    plan.push_back(Action::accept(best_m, best_r));
    double total = 0.0;
    EnvState state = env.reset();
    for (const Action& action : plan) {
      const StepOutcome out = env.step(state, action);
      total += out.reward;
      state = out.next;
    }

    if (first || total > best.best_reward) {
      first = false;
      best.best_reward = total;
      best.best_actions = std::move(plan);
      best.session = j;
      best.mno = best_m;
      best.slot = best_r;
      best.accepted_price = area.price(j, best_m, best_r);
    }
  }
  return best;
}

double cost_savings(Money policy_cost, Money baseline_cost) {
  if (baseline_cost <= Money{}) {
    throw Error(Errc::zero_baseline, "baseline cost must be positive");
  }
  return 100.0 * (baseline_cost.to_double() - policy_cost.to_double()) /
         baseline_cost.to_double();
}

namespace {

class BaselinePolicy final : public Policy {
 public:
  std::string name() const override { return "none"; }
  Action act(const AreaEnv& env, const EnvState& state) override {
    if (state.revealed == 0) return Action::wait();
    // Minimum of the first real session; the first wait was free.
    const CostArea& area = env.area();
    int best_m = 0;
    int best_r = 0;
    for (int m = 0; m < area.mno_count(); ++m) {
      for (int r = 0; r < area.slot_count(); ++r) {
        if (area.price(0, m, r) < area.price(0, best_m, best_r)) {
          best_m = m;
          best_r = r;
        }
      }
    }
    return Action::accept(best_m, best_r);
  }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<BaselinePolicy>(); }
};

class OraclePolicy final : public Policy {
 public:
  std::string name() const override { return "oracle"; }
  Action act(const AreaEnv& env, const EnvState& state) override {
    if (cached_for_ != &env.area()) {
      plan_ = dp_oracle(env.area(), env.params());
      cached_for_ = &env.area();
    }
    if (state.revealed - 1 == plan_.session) {
      return Action::accept(plan_.mno, plan_.slot);
    }
    return Action::wait();
  }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<OraclePolicy>(); }

 private:
  const CostArea* cached_for_ = nullptr;
  OracleResult plan_;
};

class GreedyNetPolicy final : public Policy {
 public:
  explicit GreedyNetPolicy(const QAgent& agent) : agent_(&agent) {}
  std::string name() const override {
    return variant_name(agent_->config().variant);
  }
  Action act(const AreaEnv& env, const EnvState& state) override {
    const FeatureVec features = env.encode_state(state, agent_->dims());
    const auto mask = env.legal_mask(state, agent_->dims());
    return action_from_index(agent_->act_greedy(features, mask), agent_->dims());
  }
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<GreedyNetPolicy>(*agent_);
  }

 private:
  const QAgent* agent_;
};

AreaOutcome run_area(Policy& policy, const CostArea& area, const RewardParams& params) {
  const AreaEnv env(area, params);
  AreaOutcome outcome;
  outcome.area_id = area.area_id;
  outcome.baseline = no_policy_cost(area);
  outcome.decision_time = area.start.unix_seconds();

  EnvState state = env.reset();
  bool accepted = false;
  while (!state.done) {
    const Action action = policy.act(env, state);
    const StepOutcome out = env.step(state, action);
    outcome.cum_reward += out.reward;
    if (action.is_wait()) outcome.penalty += out.reward;  // the k=0 wait adds 0
    if (out.info.accepted_price.has_value()) {
      accepted = true;
      outcome.cost = *out.info.accepted_price;
      outcome.accepted_session = out.info.session_index;
      outcome.accepted_mno = action.mno();
      outcome.accepted_slot = action.slot();
      outcome.departure_offset =
          area.t_sv.secs() * out.info.session_index +
          area.slot_offsets[static_cast<std::size_t>(action.slot())].secs();
    }
    state = out.next;
  }
  if (!accepted) outcome.cost = outcome.baseline;  // timed out: fall back to the baseline rule
  return outcome;
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mean_rank;
      i = j + 1;
    }
    return rank;
  };
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx == 0.0 || dy == 0.0) return 0.0;
  return num / std::sqrt(dx * dy);
}

}  // namespace

std::unique_ptr<Policy> make_baseline_policy() { return std::make_unique<BaselinePolicy>(); }
std::unique_ptr<Policy> make_oracle_policy() { return std::make_unique<OraclePolicy>(); }
std::unique_ptr<Policy> make_greedy_policy(const QAgent& agent) {
  return std::make_unique<GreedyNetPolicy>(agent);
}

Metrics evaluate_policy(const Policy& policy, const std::vector<CostArea>& areas,
                        const RewardParams& params, const EncoderDims& dims, int workers) {
  if (areas.empty()) throw Error(Errc::empty_area_set, "nothing to evaluate");
  if (workers < 1) throw Error(Errc::bad_config, "workers must be at least 1");
  (void)dims;

  std::vector<AreaOutcome> outcomes(areas.size());
  if (workers == 1) {
    auto local = policy.clone();
    for (std::size_t i = 0; i < areas.size(); ++i) outcomes[i] = run_area(*local, areas[i], params);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        auto local = policy.clone();
        for (std::size_t i = static_cast<std::size_t>(w); i < areas.size();
             i += static_cast<std::size_t>(workers)) {
          outcomes[i] = run_area(*local, areas[i], params);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  Metrics metrics;
  metrics.policy = policy.name();
  metrics.areas = static_cast<int>(areas.size());
  double savings_sum = 0.0;
  int savings_count = 0;
  std::vector<double> times, offsets;
  for (const AreaOutcome& o : outcomes) {
    metrics.avg_cum_reward += o.cum_reward;
    metrics.cum_cost += o.cost;
    metrics.cum_penalty += o.penalty;
    metrics.baseline_cost += o.baseline;
    if (o.baseline > Money{}) {
      savings_sum += cost_savings(o.cost, o.baseline);
      ++savings_count;
    }
    times.push_back(static_cast<double>(o.decision_time));
    offsets.push_back(static_cast<double>(o.departure_offset));
  }
  metrics.avg_cum_reward /= static_cast<double>(areas.size());
  metrics.cost_savings_pct = savings_count > 0 ? savings_sum / savings_count : 0.0;
  metrics.rank_correlation = spearman(times, offsets);
  metrics.per_area = std::move(outcomes);
  return metrics;
}

std::string Metrics::to_json() const {
  json doc;
  doc["policy"] = policy;
  doc["areas"] = areas;
  doc["avg_cum_reward"] = avg_cum_reward;
  doc["cum_cost"] = cum_cost.str();
  doc["cum_penalty"] = cum_penalty;
  doc["baseline_cost"] = baseline_cost.str();
  doc["cost_savings_pct"] = cost_savings_pct;
  doc["rank_correlation"] = rank_correlation;
  json pairs = json::array();
  for (const AreaOutcome& o : per_area) {
    pairs.push_back({o.decision_time, o.departure_offset});
  }
  doc["decision_pairs"] = std::move(pairs);
  return doc.dump(2) + "\n";
}

std::string Metrics::series_csv() const {
  std::string out = "episode,cum_reward,cum_cost,cum_penalty\n";
  double reward = 0.0, penalty = 0.0;
  Money cost;
  char buf[96];
  for (std::size_t i = 0; i < per_area.size(); ++i) {
    reward += per_area[i].cum_reward;
    cost += per_area[i].cost;
    penalty += per_area[i].penalty;
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%s,%.17g\n", i + 1, reward, cost.str().c_str(),
                  penalty);
    out += buf;
  }
  return out;
}

}  // namespace resq
