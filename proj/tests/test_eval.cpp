#include <doctest.h>

#include <cmath>
#include <functional>

#include "resq/errors.hpp"
#include "resq/eval.hpp"
#include "resq/trainer.hpp"
#include "support/fixtures.hpp"

using namespace resq;

namespace {

CostArea area_from_rows(int mnos, int slots, const std::vector<double>& prices) {
  CostArea area;
  area.area_id = "explicit";
  area.start = Timestamp::parse("2021-05-01T00:00:00Z");
  area.t_sv = Duration::minutes(1);
  area.sessions = static_cast<int>(prices.size()) / (mnos * slots);
  area.end = area.start + Duration::minutes(area.sessions);
  for (int m = 0; m < mnos; ++m) area.operators.push_back({"op", "z" + std::to_string(m)});
  for (int r = 0; r < slots; ++r) area.slot_offsets.push_back(Duration::minutes(r));
  for (double p : prices) area.prices.push_back(Money::from_double(p));
  area.kind = classify_area(area);
  area.validate();
  return area;
}

// Accepts at a fixed session index (0-based tensor row), choosing the row
// minimum; used to pin penalty accounting.
class AcceptAtPolicy final : public Policy {
 public:
  explicit AcceptAtPolicy(int session) : session_(session) {}
  std::string name() const override { return "accept-at"; }
  Action act(const AreaEnv& env, const EnvState& state) override {
    const int target = std::min(session_, env.area().sessions - 1);
    if (state.revealed - 1 < target) return Action::wait();
    const CostArea& area = env.area();
    int best_m = 0, best_r = 0;
    for (int m = 0; m < area.mno_count(); ++m) {
      for (int r = 0; r < area.slot_count(); ++r) {
        if (area.price(target, m, r) < area.price(target, best_m, best_r)) {
          best_m = m;
          best_r = r;
        }
      }
    }
    return Action::accept(best_m, best_r);
  }
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<AcceptAtPolicy>(session_);
  }

 private:
  int session_;
};

}  // namespace

TEST_CASE("no_policy_cost takes the minimum of the first real session") {
  const CostArea area = area_from_rows(1, 3, {0.5, 0.4, 0.6, 0.1, 0.1, 0.1});
  CHECK(no_policy_cost(area) == Money::parse("0.4"));

  const CostArea single = area_from_rows(1, 1, {0.7});
  CHECK(no_policy_cost(single) == Money::parse("0.7"));

  Rng rng(51);
  for (int i = 0; i < 20; ++i) {
    const CostArea random = testing::random_area(rng);
    CHECK(no_policy_cost(random) >= random.global_min());
  }
}

TEST_CASE("dp_oracle reproduces the two-session worked example") {
  // Prices [0.5, 0.3], h = 0.01, t_sv = 1 minute, bonus 1.0.
  const CostArea area = area_from_rows(1, 1, {0.5, 0.3});
  const RewardParams params;
  const OracleResult result = dp_oracle(area, params);

  // Wait (free), wait (-e^0.01), accept the global minimum (+1).
  CHECK(result.best_reward == doctest::Approx(-0.010050).epsilon(1e-4));
  CHECK(result.session == 1);
  CHECK(result.mno == 0);
  CHECK(result.slot == 0);
  CHECK(result.accepted_price == Money::parse("0.3"));
  REQUIRE(result.best_actions.size() == 3);
  CHECK(result.best_actions[0].is_wait());
  CHECK(result.best_actions[1].is_wait());
  CHECK_FALSE(result.best_actions[2].is_wait());

  // The rejected alternative: accepting at session 0 scores 0.3 - 0.5.
  const AreaEnv env(area, params);
  EnvState state = env.step(env.reset(), Action::wait()).next;
  CHECK(env.compute_reward(state, Action::accept(0, 0)) == doctest::Approx(-0.2));
}

TEST_CASE("dp_oracle accepts immediately when every price is identical") {
  const CostArea area = area_from_rows(1, 2, std::vector<double>(12, 0.4));
  const OracleResult result = dp_oracle(area, RewardParams{});
  CHECK(result.session == 0);
  CHECK(result.best_reward == 1.0);  // free wait, then the bonus
}

TEST_CASE("dp_oracle reward equals replaying its action sequence") {
  Rng rng(53);
  const RewardParams params;
  for (int round = 0; round < 25; ++round) {
    const CostArea area = testing::random_area(rng);
    const OracleResult result = dp_oracle(area, params);
    const AreaEnv env(area, params);
    double total = 0.0;
    EnvState state = env.reset();
    for (const Action& action : result.best_actions) {
      const StepOutcome out = env.step(state, action);
      total += out.reward;
      state = out.next;
    }
    CHECK(total == result.best_reward);
    CHECK(state.done);
  }
}

TEST_CASE("dp_oracle dominates random rollouts") {
  Rng rng(57);
  const RewardParams params;
  for (int round = 0; round < 10; ++round) {
    const CostArea area = testing::random_area(rng);
    const double best = dp_oracle(area, params).best_reward;
    const AreaEnv env(area, params);
    for (int rollout = 0; rollout < 200; ++rollout) {
      double total = 0.0;
      EnvState state = env.reset();
      while (!state.done) {
        const auto actions = env.legal_actions(state);
        const Action action = actions[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(actions.size()) - 1))];
        const StepOutcome out = env.step(state, action);
        total += out.reward;
        state = out.next;
      }
      CHECK(total <= best);
    }
  }
}

TEST_CASE("heavier waiting penalties never push the oracle to stop later") {
  Rng rng(59);
  for (int round = 0; round < 15; ++round) {
    const CostArea area = testing::random_area(rng);
    int previous_session = 1 << 20;
    for (double h : {0.005, 0.01, 0.02, 0.05, 0.1}) {
      RewardParams params;
      params.h = h;
      const int session = dp_oracle(area, params).session;
      CHECK(session <= previous_session);
      previous_session = session;
    }
  }
}

TEST_CASE("cost_savings arithmetic and guards") {
  CHECK(cost_savings(Money::parse("0.6"), Money::parse("1")) == doctest::Approx(40.0));
  CHECK(cost_savings(Money::parse("1"), Money::parse("1")) == doctest::Approx(0.0));
  CHECK(cost_savings(Money::parse("0"), Money::parse("1")) == doctest::Approx(100.0));
  CHECK_THROWS_AS(cost_savings(Money::parse("1"), Money{}), Error);
}

TEST_CASE("baseline policy cost equals the sum of no_policy_cost") {
  Rng rng(61);
  std::vector<CostArea> areas;
  Money expected;
  for (int i = 0; i < 12; ++i) {
    areas.push_back(testing::random_area(rng));
    expected += no_policy_cost(areas.back());
  }
  const Metrics metrics = evaluate_policy(*make_baseline_policy(), areas, RewardParams{}, {});
  CHECK(metrics.cum_cost == expected);
  CHECK(metrics.cum_penalty == 0.0);  // only the free first wait
  CHECK(metrics.cost_savings_pct == doctest::Approx(0.0));
  CHECK(metrics.areas == 12);
}

TEST_CASE("oracle-as-policy reproduces the oracle reward per area") {
  Rng rng(63);
  std::vector<CostArea> areas;
  double expected = 0.0;
  for (int i = 0; i < 8; ++i) {
    areas.push_back(testing::random_area(rng));
    expected += dp_oracle(areas.back(), RewardParams{}).best_reward;
  }
  const Metrics metrics = evaluate_policy(*make_oracle_policy(), areas, RewardParams{}, {});
  CHECK(metrics.avg_cum_reward == doctest::Approx(expected / 8.0).epsilon(1e-12));
  for (std::size_t i = 0; i < areas.size(); ++i) {
    CHECK(metrics.per_area[i].cum_reward ==
          doctest::Approx(dp_oracle(areas[i], RewardParams{}).best_reward));
  }
}

TEST_CASE("penalty accounting matches the wait schedule") {
  Rng rng(67);
  std::vector<CostArea> areas = {testing::random_area(rng), testing::random_area(rng)};

  // Accepting at session 0 costs no penalty (the first wait is free).
  const Metrics at0 = evaluate_policy(AcceptAtPolicy(0), areas, RewardParams{}, {});
  CHECK(at0.cum_penalty == doctest::Approx(0.0));

  // Accepting at session 1 costs one wait of -e^{0.01} per area.
  const Metrics at1 = evaluate_policy(AcceptAtPolicy(1), areas, RewardParams{}, {});
  CHECK(at1.cum_penalty == doctest::Approx(-2.0 * std::exp(0.01)).epsilon(1e-12));
}

TEST_CASE("evaluation is deterministic and worker-count invariant") {
  Rng rng(69);
  std::vector<CostArea> areas;
  for (int i = 0; i < 10; ++i) areas.push_back(testing::random_area(rng));

  const Metrics a = evaluate_policy(*make_oracle_policy(), areas, RewardParams{}, {}, 1);
  const Metrics b = evaluate_policy(*make_oracle_policy(), areas, RewardParams{}, {}, 1);
  const Metrics c = evaluate_policy(*make_oracle_policy(), areas, RewardParams{}, {}, 3);
  CHECK(a.avg_cum_reward == b.avg_cum_reward);
  CHECK(a.avg_cum_reward == c.avg_cum_reward);
  CHECK(a.cum_cost == c.cum_cost);
  CHECK(a.rank_correlation == c.rank_correlation);
}

TEST_CASE("route-level cost equals route_cost over the accepted entries") {
  const auto series = testing::synthetic_spot_series(500, 71);
  AreaGrid grid;
  grid.slot_count = 8;
  grid.max_sessions = 16;
  const auto areas = testing::trace_areas(series, series.begin()->second.start,
                                          series.begin()->second.start + Duration::minutes(420),
                                          grid);
  const Metrics metrics = evaluate_policy(*make_oracle_policy(), areas, RewardParams{}, {});

  AreaCollection collection;
  collection.areas = areas;
  std::map<std::string, Choice> choices;
  for (const AreaOutcome& outcome : metrics.per_area) {
    choices[outcome.area_id] =
        Choice{outcome.accepted_session, outcome.accepted_mno, outcome.accepted_slot};
  }
  CHECK(route_cost(collection, choices) == metrics.cum_cost);
}

TEST_CASE("evaluate_policy guards its inputs") {
  CHECK_THROWS_AS(evaluate_policy(*make_baseline_policy(), {}, RewardParams{}, {}), Error);
  Rng rng(73);
  const std::vector<CostArea> areas = {testing::random_area(rng)};
  CHECK_THROWS_AS(evaluate_policy(*make_baseline_policy(), areas, RewardParams{}, {}, 0), Error);
}

TEST_CASE("metrics serialize to json and csv") {
  Rng rng(75);
  const std::vector<CostArea> areas = {testing::random_area(rng), testing::random_area(rng)};
  const Metrics metrics = evaluate_policy(*make_baseline_policy(), areas, RewardParams{}, {});
  const std::string json_text = metrics.to_json();
  CHECK(json_text.find("\"cost_savings_pct\"") != std::string::npos);
  CHECK(json_text.find("\"decision_pairs\"") != std::string::npos);
  const std::string csv = metrics.series_csv();
  CHECK(csv.rfind("episode,cum_reward,cum_cost,cum_penalty\n", 0) == 0);
  int lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 3);
}
