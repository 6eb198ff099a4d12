#include "resq/coverage.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "resq/errors.hpp"

namespace resq {

using nlohmann::json;

Money CostArea::global_min() const {
  Money best = prices.front();
  for (Money p : prices) best = std::min(best, p);
  return best;
}

void CostArea::validate() const {
  if (end <= start) throw Error(Errc::bad_config, area_id + ": interval is empty");
  if (sessions < 1 || operators.empty() || slot_offsets.empty()) {
    throw Error(Errc::bad_config, area_id + ": N, M, R must all be at least 1");
  }
  const std::size_t expect =
      static_cast<std::size_t>(sessions) * operators.size() * slot_offsets.size();
  if (prices.size() != expect) {
    throw Error(Errc::shape_mismatch, area_id + ": tensor size " + std::to_string(prices.size()) +
                                          " != N*M*R " + std::to_string(expect));
  }
  for (Money p : prices) {
    if (p < Money{}) throw Error(Errc::negative_price, area_id);
  }
  const AreaKind expected_kind = operators.size() == 1 ? AreaKind::Disjoint : AreaKind::Overlap;
  if (kind != expected_kind) {
    throw Error(Errc::bad_config, area_id + ": kind does not match operator count");
  }
}

AreaKind classify_area(const CostArea& area) {
  return area.operators.size() == 1 ? AreaKind::Disjoint : AreaKind::Overlap;
}

namespace {

CostArea fill_area(std::string id, Timestamp start, Timestamp end,
                   const std::vector<MnoKey>& operators,
                   const std::map<MnoKey, PriceSeries>& series_by_mno, const AreaGrid& grid) {
  CostArea area;
  area.area_id = std::move(id);
  area.start = start;
  area.end = end;
  area.t_sv = grid.t_sv;
  area.operators = operators;
  const std::int64_t spacing = grid.slot_spacing.secs() > 0
                                   ? grid.slot_spacing.secs()
                                   : std::max<std::int64_t>(1, grid.t_sv.secs() / grid.slot_count);
  for (int r = 0; r < grid.slot_count; ++r) {
    area.slot_offsets.push_back(Duration::seconds(spacing * r));
  }
  const std::int64_t span = (end - start).secs();
  const std::int64_t fit = (span + grid.t_sv.secs() - 1) / grid.t_sv.secs();
  area.sessions = static_cast<int>(std::clamp<std::int64_t>(fit, 1, grid.max_sessions));
  area.kind = classify_area(area);

  area.prices.reserve(static_cast<std::size_t>(area.sessions) * operators.size() *
                      area.slot_offsets.size());
  for (int n = 0; n < area.sessions; ++n) {
    const Timestamp session = start + Duration::seconds(grid.t_sv.secs() * n);
    for (const MnoKey& op : operators) {
      const PriceSeries& series = series_by_mno.at(op);
      for (const Duration& offset : area.slot_offsets) {
        area.prices.push_back(series.sample(session + offset));
      }
    }
  }
  return area;
}

}  // namespace

AreaCollection build_areas(const std::vector<RoadSegment>& route,
                           const std::map<MnoKey, PriceSeries>& series_by_mno,
                           const AreaGrid& grid) {
  if (route.empty()) throw Error(Errc::bad_config, "route has no segments");
  if (grid.slot_count < 1 || grid.max_sessions < 1 || grid.t_sv.secs() <= 0) {
    throw Error(Errc::bad_config, "area grid must have positive t_sv, slots and session cap");
  }
  for (const auto& segment : route) {
    if (segment.end <= segment.start) {
      throw Error(Errc::bad_config, "segment " + segment.segment_id + " has an empty interval");
    }
    if (segment.operators.empty()) {
      throw Error(Errc::bad_config, "segment " + segment.segment_id + " lists no operators");
    }
  }

  const Timestamp route_start =
      std::min_element(route.begin(), route.end(), [](const auto& a, const auto& b) {
        return a.start < b.start;
      })->start;
  const Timestamp route_end =
      std::max_element(route.begin(), route.end(), [](const auto& a, const auto& b) {
        return a.end < b.end;
      })->end;

  // Sweep over all segment boundaries; each elementary interval carries the
  // union of operators of the segments covering it.
  std::set<Timestamp> cuts;
  for (const auto& segment : route) {
    cuts.insert(segment.start);
    cuts.insert(segment.end);
  }
  std::vector<Timestamp> bounds(cuts.begin(), cuts.end());

  std::vector<std::pair<Timestamp, std::vector<MnoKey>>> spans;  // start -> operator set
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    std::set<MnoKey> active;
    for (const auto& segment : route) {
      if (segment.start <= bounds[i] && bounds[i + 1] <= segment.end) {
        active.insert(segment.operators.begin(), segment.operators.end());
      }
    }
    if (active.empty()) {
      throw Error(Errc::uncovered_interval,
                  "no operator covers [" + bounds[i].str() + ", " + bounds[i + 1].str() + ")");
    }
    std::vector<MnoKey> ops(active.begin(), active.end());
    if (spans.empty() || spans.back().second != ops) {
      spans.emplace_back(bounds[i], std::move(ops));
    }
  }

  for (const auto& [ignored, ops] : spans) {
    for (const MnoKey& op : ops) {
      auto it = series_by_mno.find(op);
      if (it == series_by_mno.end()) {
        throw Error(Errc::missing_series, op.str());
      }
      if (!it->second.covers(route_start, route_end)) {
        throw Error(Errc::missing_series,
                    op.str() + " series does not cover the route span (starts " +
                        it->second.start.str() + ")");
      }
    }
  }

  AreaCollection collection;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const Timestamp span_start = spans[i].first;
    const Timestamp span_end = i + 1 < spans.size() ? spans[i + 1].first : route_end;
    char id[16];
    std::snprintf(id, sizeof(id), "area-%03zu", i);
    collection.areas.push_back(
        fill_area(id, span_start, span_end, spans[i].second, series_by_mno, grid));
  }
  return collection;
}

Money route_cost(const AreaCollection& areas, const std::map<std::string, Choice>& choices) {
  Money total;
  for (const auto& area : areas.areas) {
    auto it = choices.find(area.area_id);
    if (it == choices.end()) {
      throw Error(Errc::missing_choice, area.area_id);
    }
    const Choice& c = it->second;
    if (c.session < 0 || c.session >= area.sessions || c.mno < 0 || c.mno >= area.mno_count() ||
        c.slot < 0 || c.slot >= area.slot_count()) {
      throw Error(Errc::index_out_of_bounds, area.area_id);
    }
    total += area.price(c.session, c.mno, c.slot);
  }
  return total;
}

std::vector<Violation> validate_constraints(const AreaCollection& areas,
                                            const std::map<std::string, Choice>& choices,
                                            const ConstraintLimits& limits,
                                            const std::map<std::string, double>& demands) {
  std::vector<Violation> violations;

  std::set<std::string> known;
  for (const auto& area : areas.areas) known.insert(area.area_id);
  for (const auto& [area_id, ignored] : choices) {
    if (!known.count(area_id)) {
      violations.push_back({ViolationKind::UnknownArea, area_id});
    }
  }

  Money total;
  bool total_complete = true;
  for (const auto& area : areas.areas) {
    if (area.start < limits.t_min || area.end > limits.t_max) {
      violations.push_back({ViolationKind::IntervalOutOfBounds, area.area_id});
    }
    auto it = choices.find(area.area_id);
    if (it == choices.end()) {
      violations.push_back({ViolationKind::MissingChoice, area.area_id});
      total_complete = false;
      continue;
    }
    const Choice& c = it->second;
    if (c.session < 0 || c.session >= area.sessions || c.mno < 0 || c.mno >= area.mno_count() ||
        c.slot < 0 || c.slot >= area.slot_count()) {
      violations.push_back({ViolationKind::UnknownArea, area.area_id + ": choice out of bounds"});
      total_complete = false;
      continue;
    }
    total += area.price(c.session, c.mno, c.slot);

    auto demand = demands.find(area.area_id);
    if (demand != demands.end()) {
      auto cap = limits.capacity.find({area.operators[c.mno], area.area_id});
      if (cap != limits.capacity.end() && demand->second > cap->second) {
        violations.push_back({ViolationKind::CapacityExceeded, area.area_id});
      }
    }
  }
  if (total_complete && total > limits.j_max) {
    violations.push_back({ViolationKind::BudgetExceeded,
                          "cost " + total.str() + " exceeds budget " + limits.j_max.str()});
  }
  return violations;
}

std::vector<RoadSegment> load_route_json(const std::string& text) {
  json doc = json::parse(text);
  if (!doc.is_array()) throw Error(Errc::bad_config, "route file must be a JSON array");
  std::vector<RoadSegment> route;
  for (const auto& item : doc) {
    RoadSegment segment;
    segment.segment_id = item.at("segment_id").get<std::string>();
    segment.start = Timestamp::parse(item.at("start").get<std::string>());
    segment.end = Timestamp::parse(item.at("end").get<std::string>());
    for (const auto& op : item.at("operators")) {
      segment.operators.push_back(MnoKey::parse(op.get<std::string>()));
    }
    route.push_back(std::move(segment));
  }
  return route;
}

std::string areas_to_json(const AreaCollection& areas) {
  json doc;
  doc["areas"] = json::array();
  for (const auto& area : areas.areas) {
    json entry;
    entry["area_id"] = area.area_id;
    entry["start"] = area.start.str();
    entry["end"] = area.end.str();
    entry["t_sv_sec"] = area.t_sv.secs();
    entry["kind"] = area.kind == AreaKind::Disjoint ? "disjoint" : "overlap";
    entry["shape"] = {area.sessions, area.mno_count(), area.slot_count()};
    json ops = json::array();
    for (const auto& op : area.operators) ops.push_back(op.str());
    entry["operators"] = std::move(ops);
    json offsets = json::array();
    for (const auto& off : area.slot_offsets) offsets.push_back(off.secs());
    entry["slot_offsets_sec"] = std::move(offsets);
    // Prices as decimal strings so the dump is exact.
    json prices = json::array();
    for (Money p : area.prices) prices.push_back(p.str());
    entry["prices"] = std::move(prices);
    doc["areas"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

AreaCollection areas_from_json(const std::string& text) {
  json doc = json::parse(text);
  AreaCollection collection;
  for (const auto& entry : doc.at("areas")) {
    CostArea area;
    area.area_id = entry.at("area_id").get<std::string>();
    area.start = Timestamp::parse(entry.at("start").get<std::string>());
    area.end = Timestamp::parse(entry.at("end").get<std::string>());
    area.t_sv = Duration::seconds(entry.at("t_sv_sec").get<std::int64_t>());
    area.kind = entry.at("kind").get<std::string>() == "disjoint" ? AreaKind::Disjoint
                                                                  : AreaKind::Overlap;
    const auto& shape = entry.at("shape");
    area.sessions = shape.at(0).get<int>();
    for (const auto& op : entry.at("operators")) {
      area.operators.push_back(MnoKey::parse(op.get<std::string>()));
    }
    for (const auto& off : entry.at("slot_offsets_sec")) {
      area.slot_offsets.push_back(Duration::seconds(off.get<std::int64_t>()));
    }
    if (shape.at(1).get<int>() != area.mno_count() || shape.at(2).get<int>() != area.slot_count()) {
      throw Error(Errc::shape_mismatch, area.area_id + ": shape does not match field lengths");
    }
    for (const auto& p : entry.at("prices")) {
      area.prices.push_back(Money::parse(p.get<std::string>()));
    }
    area.validate();
    collection.areas.push_back(std::move(area));
  }
  return collection;
}

}  // namespace resq
