#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "resq/clock.hpp"
#include "resq/money.hpp"
#include "resq/price_data.hpp"

namespace resq {

// One stretch of road with a constant set of operators present.
struct RoadSegment {
  std::string segment_id;
  Timestamp start;  // entry time
  Timestamp end;    // exit time, > start
  std::vector<MnoKey> operators;
};

enum class AreaKind { Disjoint, Overlap };

// Price tensor for one coverage interval: N sessions x M operators x R
// departure slots, row-major.
struct CostArea {
  std::string area_id;
  Timestamp start;  // tau_k
  Timestamp end;    // tau_w
  Duration t_sv = Duration::minutes(1);
  int sessions = 0;                      // N
  std::vector<MnoKey> operators;         // M, ordered
  std::vector<Duration> slot_offsets;    // R, quote-relative departure offsets
  std::vector<Money> prices;             // N*M*R, row-major [n][m][r]
  AreaKind kind = AreaKind::Disjoint;

  int mno_count() const { return static_cast<int>(operators.size()); }
  int slot_count() const { return static_cast<int>(slot_offsets.size()); }
  std::size_t index(int n, int m, int r) const {
    return (static_cast<std::size_t>(n) * operators.size() + m) * slot_offsets.size() + r;
  }
  Money price(int n, int m, int r) const { return prices[index(n, m, r)]; }
  Money global_min() const;

  // Throws if any shape or ordering invariant is broken.
  void validate() const;
};

struct AreaCollection {
  std::vector<CostArea> areas;
};

// How build_areas grids an interval: session spacing, slot layout, and the
// cap on sessions per area (long intervals are truncated, not rejected).
// Slots subdivide one session-validity window; zero spacing means the
// window is split evenly into slot_count steps (at least one second each).
struct AreaGrid {
  Duration t_sv = Duration::minutes(1);
  int slot_count = 16;
  Duration slot_spacing = Duration::seconds(0);  // 0: auto, t_sv / slot_count
  int max_sessions = 32;
};

struct ConstraintLimits {
  Timestamp t_min;
  Timestamp t_max;
  std::map<std::pair<MnoKey, std::string>, double> capacity;  // (operator, area) -> units
  Money j_max;
};

struct Choice {
  int session = 0;  // n
  int mno = 0;      // m
  int slot = 0;     // r
};

enum class ViolationKind {
  IntervalOutOfBounds,
  CapacityExceeded,
  UnknownArea,
  MissingChoice,
  BudgetExceeded,
};

struct Violation {
  ViolationKind kind;
  std::string detail;
};

// Splits the route into maximal sub-intervals with a constant operator set
// and fills each tensor entry from the operator's series at
// (session time + slot offset).
AreaCollection build_areas(const std::vector<RoadSegment>& route,
                           const std::map<MnoKey, PriceSeries>& series_by_mno,
                           const AreaGrid& grid = {});

AreaKind classify_area(const CostArea& area);

// Exact-decimal sum of the chosen tensor entries, one choice per area.
Money route_cost(const AreaCollection& areas, const std::map<std::string, Choice>& choices);

std::vector<Violation> validate_constraints(const AreaCollection& areas,
                                            const std::map<std::string, Choice>& choices,
                                            const ConstraintLimits& limits,
                                            const std::map<std::string, double>& demands);

// Route description file: JSON array of {segment_id, start, end, operators[]}.
std::vector<RoadSegment> load_route_json(const std::string& text);

// Area dump: JSON with explicit tensor shape and row-major price array.
std::string areas_to_json(const AreaCollection& areas);
AreaCollection areas_from_json(const std::string& text);

}  // namespace resq
