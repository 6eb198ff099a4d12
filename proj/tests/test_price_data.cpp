#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

#include "resq/errors.hpp"
#include "resq/price_data.hpp"
#include "support/fixtures.hpp"

using namespace resq;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a resq::Error");
  return Errc::io_error;
}

SpotRecord rec(const std::string& ts, const std::string& type, const std::string& zone,
               const std::string& price) {
  return {Timestamp::parse(ts), type, zone, Money::parse(price)};
}

}  // namespace

TEST_CASE("parse_spot_csv reads well-formed rows in order") {
  const std::string text =
      "timestamp,instance_type,zone,price\n"
      "2021-04-17T00:05:00Z,c5.large,us-west-1b,0.0312\n"
      "2021-04-17T00:06:00Z,c5.large,us-west-1c,0.0344\n";
  const auto records = parse_spot_csv(text);
  REQUIRE(records.size() == 2);
  CHECK(records[0].zone == "us-west-1b");
  CHECK(records[0].instance_type == "c5.large");
  CHECK(records[0].price == Money::parse("0.0312"));
  CHECK(records[0].timestamp == Timestamp::parse("2021-04-17T00:05:00Z"));
  CHECK(records[1].zone == "us-west-1c");
}

TEST_CASE("parse_spot_csv on an empty body yields an empty sequence") {
  CHECK(parse_spot_csv(std::string("timestamp,instance_type,zone,price\n")).empty());
}

TEST_CASE("parse_spot_csv reports malformed lines with their location") {
  const std::string bad_ts =
      "timestamp,instance_type,zone,price\n"
      "x,y,us-west-1c,abc\n";
  CHECK(code_of([&] { parse_spot_csv(bad_ts); }) == Errc::malformed_line);

  const std::string wrong_arity =
      "timestamp,instance_type,zone,price\n"
      "2021-04-17T00:05:00Z,c5.large,us-west-1b\n";
  try {
    parse_spot_csv(wrong_arity);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::malformed_line);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  const std::string negative =
      "timestamp,instance_type,zone,price\n"
      "2021-04-17T00:05:00Z,c5.large,us-west-1b,-0.01\n";
  CHECK(code_of([&] { parse_spot_csv(negative); }) == Errc::negative_price);

  CHECK(code_of([&] { parse_spot_csv(std::string("wrong,header\n")); }) == Errc::malformed_line);
}

TEST_CASE("csv round trip preserves the record sequence exactly") {
  const std::string csv = testing::synthetic_spot_csv(500, 42);
  const auto records = parse_spot_csv(csv);
  REQUIRE(records.size() == 500);
  CHECK(parse_spot_csv(format_spot_csv(records)) == records);
}

TEST_CASE("build_series resamples by last observation carried forward") {
  // Two observations, 150 s apart, on a 60 s grid.
  const std::vector<SpotRecord> records = {
      rec("2021-04-17T00:00:00Z", "c5.large", "us-west-1b", "0.5"),
      rec("2021-04-17T00:02:30Z", "c5.large", "us-west-1b", "0.7"),
  };
  const PriceSeries series =
      build_series(records, {"c5.large", "us-west-1b"}, Duration::seconds(60));
  REQUIRE(series.size() == 4);
  CHECK(series.prices[0] == Money::parse("0.5"));
  CHECK(series.prices[1] == Money::parse("0.5"));
  CHECK(series.prices[2] == Money::parse("0.5"));
  CHECK(series.prices[3] == Money::parse("0.7"));
  CHECK(series.timestamp_at(3) == Timestamp::parse("2021-04-17T00:03:00Z"));
}

TEST_CASE("build_series handles single records and missing keys") {
  const std::vector<SpotRecord> records = {
      rec("2021-04-17T00:00:00Z", "c5.large", "us-west-1b", "0.5")};
  const PriceSeries single = build_series(records, {"c5.large", "us-west-1b"});
  CHECK(single.size() == 1);
  CHECK(code_of([&] { build_series(records, {"m5.xlarge", "us-west-1b"}); }) ==
        Errc::empty_selection);
}

TEST_CASE("build_series lets the later row win on duplicate timestamps") {
  const std::vector<SpotRecord> records = {
      rec("2021-04-17T00:00:00Z", "c5.large", "us-west-1b", "0.5"),
      rec("2021-04-17T00:00:00Z", "c5.large", "us-west-1b", "0.9"),
  };
  const PriceSeries series = build_series(records, {"c5.large", "us-west-1b"});
  REQUIRE(series.size() == 1);
  CHECK(series.prices[0] == Money::parse("0.9"));
}

TEST_CASE("build_series output spacing always equals the resolution") {
  Rng rng(5);
  for (int round = 0; round < 20; ++round) {
    std::vector<SpotRecord> records;
    std::int64_t clock = 1618617600;
    const int n = static_cast<int>(rng.uniform_int(1, 60));
    for (int i = 0; i < n; ++i) {
      clock += rng.uniform_int(1, 500);
      records.push_back({Timestamp::from_unix(clock), "c5.large", "us-west-1b",
                         Money::from_double(rng.uniform(0.1, 2.0))});
    }
    const Duration res = Duration::seconds(rng.uniform_int(30, 120));
    const PriceSeries series = build_series(records, {"c5.large", "us-west-1b"}, res);
    for (std::size_t i = 1; i < series.size(); ++i) {
      CHECK(series.timestamp_at(i) - series.timestamp_at(i - 1) == res);
    }
    CHECK(series.end() >= records.back().timestamp);
  }
}

TEST_CASE("split_series partitions without losing points") {
  PriceSeries series{{"c5.large", "us-west-1b"}, Duration::minutes(1),
                     Timestamp::parse("2021-04-17T00:00:00Z"), {}};
  for (int i = 0; i < 10; ++i) series.prices.push_back(Money::from_micros(1000 + i));

  // Boundary right after point 6 (index 5): 6 points train, 4 test.
  const DataSplit split = split_series(series, series.timestamp_at(6));
  CHECK(split.train.size() == 6);
  CHECK(split.test.size() == 4);
  CHECK(split.train.end() < split.boundary);
  CHECK(split.test.start == split.boundary);
  CHECK(split.test.start >= split.boundary);
}

TEST_CASE("split_series rejects out-of-span boundaries") {
  PriceSeries series{{"c5.large", "us-west-1b"}, Duration::minutes(1),
                     Timestamp::parse("2021-04-17T00:00:00Z"), {Money::from_micros(1)}};
  series.prices.push_back(Money::from_micros(2));
  CHECK(code_of([&] { split_series(series, series.start - Duration::minutes(5)); }) ==
        Errc::boundary_out_of_range);
  CHECK(code_of([&] { split_series(series, series.start); }) == Errc::boundary_out_of_range);
  CHECK(code_of([&] { split_series(series, series.end() + Duration::minutes(1)); }) ==
        Errc::boundary_out_of_range);
}

TEST_CASE("split_series preserves the multiset of points") {
  Rng rng(9);
  PriceSeries series{{"c5.large", "us-west-1b"}, Duration::minutes(1),
                     Timestamp::parse("2021-04-17T00:00:00Z"), {}};
  for (int i = 0; i < 1000; ++i) {
    series.prices.push_back(Money::from_micros(rng.uniform_int(0, 999999)));
  }
  const Timestamp boundary = series.timestamp_at(
      static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(series.size()) - 1)));
  const DataSplit split = split_series(series, boundary);

  CHECK(split.train.size() + split.test.size() == series.size());
  std::vector<std::pair<std::int64_t, Money>> combined, original;
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    combined.emplace_back(split.train.timestamp_at(i).unix_seconds(), split.train.prices[i]);
  }
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    combined.emplace_back(split.test.timestamp_at(i).unix_seconds(), split.test.prices[i]);
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    original.emplace_back(series.timestamp_at(i).unix_seconds(), series.prices[i]);
  }
  CHECK(combined == original);  // already in time order on both sides
}

TEST_CASE("series csv round trips through write and read") {
  const auto all = testing::synthetic_spot_series(300, 3);
  const PriceSeries& series = all.begin()->second;
  std::istringstream in(write_series_csv(series));
  const PriceSeries back = read_series_csv(in, series.mno);
  CHECK(back.start == series.start);
  CHECK(back.resolution == series.resolution);
  CHECK(back.prices == series.prices);
}

TEST_CASE("series sampling forward-fills and rejects pre-start lookups") {
  PriceSeries series{{"c5.large", "us-west-1b"}, Duration::minutes(1),
                     Timestamp::parse("2021-04-17T00:00:00Z"),
                     {Money::parse("1"), Money::parse("2"), Money::parse("3")}};
  CHECK(series.sample(series.start) == Money::parse("1"));
  CHECK(series.sample(series.start + Duration::seconds(90)) == Money::parse("2"));
  CHECK(series.sample(series.start + Duration::minutes(50)) == Money::parse("3"));
  CHECK(code_of([&] { series.sample(series.start - Duration::seconds(1)); }) ==
        Errc::index_out_of_bounds);
}
