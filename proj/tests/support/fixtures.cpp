#include "support/fixtures.hpp"

#include <algorithm>
#include <cmath>

namespace resq::testing {

namespace {

const Timestamp kEpoch = Timestamp::parse("2021-04-17T00:00:00Z");

constexpr double kTau = 6.283185307179586;

}  // namespace

std::map<MnoKey, PriceSeries> synthetic_spot_series(int minutes, std::uint64_t seed) {
  // GPU-class instances: spot prices in the high teens, so price swings are
  // large against the waiting-penalty scale.
  const std::vector<MnoKey> keys = {{"p3.8xlarge", "us-west-1b"},
                                    {"p3.16xlarge", "us-west-1b"},
                                    {"g5.12xlarge", "us-west-1c"}};
  const std::vector<double> base = {5.8, 6.2, 6.6};

  // Market-wide state shared by all operators: demand surges erupt, then
  // relax geometrically back to the calm level, with a quiet gap before the
  // next eruption. Surges cannot chain, so a few flat sessions prove calm.
  Rng market_rng(mix_seed(seed, 0x6d6bull));
  constexpr int kRefractory = 4;
  int spike_left = 0, lockout = 0;
  double spike_mult = 1.0;

  std::vector<Rng> op_rng;
  for (std::size_t m = 0; m < keys.size(); ++m) op_rng.emplace_back(mix_seed(seed, 0x100 + m));

  std::map<MnoKey, PriceSeries> series;
  for (std::size_t m = 0; m < keys.size(); ++m) {
    series[keys[m]] = PriceSeries{keys[m], Duration::minutes(1), kEpoch, {}};
    series[keys[m]].prices.reserve(static_cast<std::size_t>(minutes));
  }

  for (int t = 0; t < minutes; ++t) {
    if (spike_left > 0) {
      --spike_left;
      spike_mult = std::max(1.0, spike_mult * 0.80);  // surge relaxes geometrically
      if (spike_left == 0 || spike_mult <= 1.05) {
        spike_left = 0;
        spike_mult = 1.0;
        lockout = kRefractory;
      }
    } else {
      spike_mult = 1.0;
      if (lockout > 0) {
        --lockout;
      } else if (market_rng.uniform() < 1.0 / 2.2) {
        spike_left = 12;
        spike_mult = market_rng.uniform(8.0, 11.0);
      }
    }
    const double shared = 1.0 + 0.015 * market_rng.normal();

    // Operators feel a surge with different strength, so the relative quote
    // pattern itself tells the market state apart.
    static constexpr double kSurgeExponent[3] = {1.0, 0.85, 0.70};
    for (std::size_t m = 0; m < keys.size(); ++m) {
      const double surge = std::pow(spike_mult, kSurgeExponent[m % 3]);
      const double wobble =
          1.0 + 0.04 * std::sin(kTau * t / 75.0 + kTau * static_cast<double>(m) / 3.0);
      const double noise = 1.0 + 0.01 * op_rng[m].normal();
      const double price = std::max(0.05, base[m] * wobble * surge * shared * noise);
      series[keys[m]].prices.push_back(Money::from_double(price));
    }
  }
  return series;
}

std::string synthetic_spot_csv(int rows, std::uint64_t seed) {
  const std::vector<std::pair<std::string, std::string>> keys = {
      {"c5.large", "us-west-1b"}, {"m5.xlarge", "us-west-1b"}, {"r5.large", "us-west-1c"},
      {"c5.large", "us-west-1c"}};
  Rng rng(mix_seed(seed, 0x637376ull));
  std::vector<SpotRecord> records;
  std::vector<std::int64_t> clocks(keys.size(), kEpoch.unix_seconds());
  std::vector<double> walks = {0.9, 1.4, 2.2, 0.4};
  records.reserve(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i) {
    const std::size_t k = static_cast<std::size_t>(rng.uniform_int(0, 3));
    clocks[k] += rng.uniform_int(5, 900);
    walks[k] = std::max(0.01, walks[k] * (1.0 + 0.05 * rng.normal()));
    records.push_back({Timestamp::from_unix(clocks[k]), keys[k].first, keys[k].second,
                       Money::from_double(walks[k])});
  }
  return format_spot_csv(records);
}

std::vector<CostArea> trace_areas(const std::map<MnoKey, PriceSeries>& series, Timestamp from,
                                  Timestamp to, const AreaGrid& grid) {
  std::vector<MnoKey> ops;
  for (const auto& [key, ignored] : series) ops.push_back(key);

  // Operator subsets cycle so adjacent spans never share a set.
  const std::vector<std::vector<MnoKey>> subsets = {
      {ops[0], ops[1], ops[2]}, {ops[0], ops[1]}, {ops[1], ops[2]},
      {ops[0], ops[2]},         {ops[2]},         {ops[0], ops[1], ops[2]},
      {ops[0]},                 {ops[1], ops[2]}};
  const std::vector<std::int64_t> durations_min = {35, 30, 40, 32, 28, 38, 30, 36};

  std::vector<RoadSegment> route;
  Timestamp cursor = from;
  std::size_t i = 0;
  while (cursor < to) {
    Timestamp end = cursor + Duration::minutes(durations_min[i % durations_min.size()]);
    if (end > to) end = to;
    route.push_back({"seg-" + std::to_string(i), cursor, end, subsets[i % subsets.size()]});
    cursor = end;
    ++i;
  }
  return build_areas(route, series, grid).areas;
}

CostArea random_area(Rng& rng, int operators) {
  CostArea area;
  area.area_id = "rand-" + std::to_string(rng.next_u64() % 100000);
  area.start = kEpoch;
  area.t_sv = Duration::minutes(1);
  area.sessions = static_cast<int>(rng.uniform_int(8, 32));
  const int slots = static_cast<int>(rng.uniform_int(8, 32));
  for (int r = 0; r < slots; ++r) area.slot_offsets.push_back(Duration::minutes(r));
  area.end = area.start + Duration::minutes(area.sessions);
  const std::vector<std::string> types = {"c5.large", "m5.xlarge", "r5.large", "t3.medium"};
  for (int m = 0; m < operators; ++m) {
    area.operators.push_back({types[static_cast<std::size_t>(m) % types.size()],
                              "zone-" + std::to_string(m)});
  }
  area.kind = classify_area(area);

  std::vector<std::vector<double>> sequences;
  for (int m = 0; m < operators; ++m) {
    double level = rng.uniform(2.0, 8.0);
    std::vector<double> seq;
    for (int i = 0; i < area.sessions + slots - 1; ++i) {
      level = std::max(0.1, level + 0.3 * rng.normal());
      if (rng.uniform() < 0.05) level = std::max(0.1, level * rng.uniform(0.4, 1.8));
      seq.push_back(level);
    }
    sequences.push_back(std::move(seq));
  }
  area.prices.reserve(static_cast<std::size_t>(area.sessions) * operators * slots);
  for (int n = 0; n < area.sessions; ++n) {
    for (int m = 0; m < operators; ++m) {
      for (int r = 0; r < slots; ++r) {
        area.prices.push_back(Money::from_double(
            sequences[static_cast<std::size_t>(m)][static_cast<std::size_t>(n + r)]));
      }
    }
  }
  area.validate();
  return area;
}

ChainMdp::Step ChainMdp::step(int state, int action) const {
  if (action == 1) {
    if (state == n_states - 1) return {state, goal_reward, true};
    return {state + 1, step_cost, false};
  }
  return {std::max(0, state - 1), step_cost, false};
}

FeatureVec ChainMdp::encode(int state) const {
  FeatureVec f;
  f.dim = n_states;
  f.push(state, 1.0);
  return f;
}

std::vector<double> ChainMdp::q_star(double gamma) const {
  std::vector<double> v(n_states, 0.0);
  for (;;) {
    double delta = 0.0;
    for (int s = 0; s < n_states; ++s) {
      double best = -1e18;
      for (int a = 0; a < n_actions; ++a) {
        const Step out = step(s, a);
        best = std::max(best, out.reward + (out.done ? 0.0 : gamma * v[out.next]));
      }
      delta = std::max(delta, std::fabs(best - v[s]));
      v[s] = best;
    }
    if (delta < 1e-10) break;
  }
  std::vector<double> q(n_states * n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      const Step out = step(s, a);
      q[s * n_actions + a] = out.reward + (out.done ? 0.0 : gamma * v[out.next]);
    }
  }
  return q;
}

}  // namespace resq::testing
