#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "resq/clock.hpp"
#include "resq/money.hpp"

namespace resq {

// One price feed is identified by an (instance type, zone) pair; each pair
// plays the role of a single operator's quote stream.
struct MnoKey {
  std::string instance_type;
  std::string zone;

  // Canonical "instance_type/zone" form used in files and on the CLI.
  std::string str() const { return instance_type + "/" + zone; }
  static MnoKey parse(const std::string& text);

  auto operator<=>(const MnoKey&) const = default;
};

struct SpotRecord {
  Timestamp timestamp;
  std::string instance_type;
  std::string zone;
  Money price;  // >= 0

  MnoKey key() const { return {instance_type, zone}; }
  bool operator==(const SpotRecord&) const = default;
};

// Uniformly spaced price samples for one operator. Spacing is structural:
// points are start + i * resolution, so the grid invariant cannot drift.
struct PriceSeries {
  MnoKey mno;
  Duration resolution = Duration::minutes(1);
  Timestamp start;
  std::vector<Money> prices;

  std::size_t size() const { return prices.size(); }
  Timestamp timestamp_at(std::size_t i) const {
    return start + Duration::seconds(resolution.secs() * static_cast<std::int64_t>(i));
  }
  Timestamp end() const { return prices.empty() ? start : timestamp_at(prices.size() - 1); }

  // Last observation at or before `t`; the final sample carries forward past
  // the recorded span. Sampling before `start` is an error (leading gaps are
  // clipped at ingestion, never back-filled).
  Money sample(Timestamp t) const;
  bool covers(Timestamp from, Timestamp to) const { return start <= from && from <= to; }
};

struct DataSplit {
  PriceSeries train;
  PriceSeries test;
  Timestamp boundary;
};

// CSV with header "timestamp,instance_type,zone,price". Total parse: any
// malformed line aborts with its 1-based line number.
std::vector<SpotRecord> parse_spot_csv(std::istream& in);
std::vector<SpotRecord> parse_spot_csv(const std::string& text);
std::string format_spot_csv(const std::vector<SpotRecord>& records);

// Filters `records` to `key`, sorts by timestamp (later input rows win ties),
// and resamples onto a uniform grid by last observation carried forward.
PriceSeries build_series(const std::vector<SpotRecord>& records, const MnoKey& key,
                         Duration resolution = Duration::minutes(1));

// Partitions into train (< boundary) and test (>= boundary); both non-empty.
DataSplit split_series(const PriceSeries& series, Timestamp boundary);

// Series interchange format: CSV with header "timestamp,price".
std::string write_series_csv(const PriceSeries& series);
PriceSeries read_series_csv(std::istream& in, const MnoKey& key);

}  // namespace resq
