#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "resq/coverage.hpp"
#include "resq/env.hpp"
#include "resq/feature_vec.hpp"
#include "resq/price_data.hpp"
#include "resq/rng.hpp"

namespace resq::testing {

// Spot-like minute series for three operators: a shared market factor with a
// two-scale cycle, market-wide dips and spikes, plus per-operator wobble so
// the cheapest operator changes over time. Deterministic in the seed.
std::map<MnoKey, PriceSeries> synthetic_spot_series(int minutes, std::uint64_t seed);

// Raw spot CSV text with `rows` data lines across several operator keys,
// timestamps non-decreasing per key.
std::string synthetic_spot_csv(int rows, std::uint64_t seed);

// Slices [from, to) into a route whose operator subsets cycle (so adjacent
// areas never merge) and builds cost areas over it.
std::vector<CostArea> trace_areas(const std::map<MnoKey, PriceSeries>& series, Timestamp from,
                                  Timestamp to, const AreaGrid& grid);

// Standalone random area with N, R in [8, 32]; prices follow a bounded
// random walk with occasional jumps.
CostArea random_area(Rng& rng, int operators = 3);

// Five-state deterministic chain: step right toward the terminal bonus.
struct ChainMdp {
  static constexpr int n_states = 5;
  static constexpr int n_actions = 2;  // 0 = left, 1 = right
  static constexpr double step_cost = -0.05;
  static constexpr double goal_reward = 1.0;

  struct Step {
    int next;
    double reward;
    bool done;
  };

  Step step(int state, int action) const;
  FeatureVec encode(int state) const;  // one-hot
  // Q* flattened [state * n_actions + action], value iteration to 1e-10.
  std::vector<double> q_star(double gamma) const;
};

}  // namespace resq::testing
