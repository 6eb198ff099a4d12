#include "resq/price_data.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

#include "resq/errors.hpp"

namespace resq {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw Error(Errc::malformed_line, "line " + std::to_string(line_no) + ": " + why);
}

}  // namespace

MnoKey MnoKey::parse(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == text.size()) {
    throw Error(Errc::bad_config, "operator key must be 'instance_type/zone', got '" + text + "'");
  }
  return {text.substr(0, slash), text.substr(slash + 1)};
}

Money PriceSeries::sample(Timestamp t) const {
  if (prices.empty() || t < start) {
    throw Error(Errc::index_out_of_bounds,
                "sample at " + t.str() + " precedes series start " + start.str());
  }
  const std::int64_t steps = (t - start).secs() / resolution.secs();
  const std::size_t i = std::min(static_cast<std::size_t>(steps), prices.size() - 1);
  return prices[i];
}

std::vector<SpotRecord> parse_spot_csv(std::istream& in) {
  static const std::string kHeader = "timestamp,instance_type,zone,price";
  std::vector<SpotRecord> records;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) malformed(1, "missing header");
  ++line_no;
  if (strip_cr(line) != kHeader) malformed(line_no, "expected header '" + kHeader + "'");

  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 4) {
      malformed(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    }
    SpotRecord rec;
    if (!Timestamp::try_parse(fields[0], rec.timestamp)) {
      malformed(line_no, "bad timestamp '" + fields[0] + "'");
    }
    rec.instance_type = fields[1];
    rec.zone = fields[2];
    if (rec.instance_type.empty() || rec.zone.empty()) malformed(line_no, "empty key field");
    if (!Money::try_parse(fields[3], rec.price)) {
      malformed(line_no, "bad price '" + fields[3] + "'");
    }
    if (rec.price < Money{}) {
      throw Error(Errc::negative_price, "line " + std::to_string(line_no));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<SpotRecord> parse_spot_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_spot_csv(in);
}

std::string format_spot_csv(const std::vector<SpotRecord>& records) {
  std::string out = "timestamp,instance_type,zone,price\n";
  for (const auto& rec : records) {
    out += rec.timestamp.str();
    out += ',';
    out += rec.instance_type;
    out += ',';
    out += rec.zone;
    out += ',';
    out += rec.price.str();
    out += '\n';
  }
  return out;
}

PriceSeries build_series(const std::vector<SpotRecord>& records, const MnoKey& key,
                         Duration resolution) {
  if (resolution.secs() <= 0) {
    throw Error(Errc::bad_config, "resolution must be positive");
  }
  std::vector<std::pair<Timestamp, Money>> points;
  for (const auto& rec : records) {
    if (rec.key() == key) points.emplace_back(rec.timestamp, rec.price);
  }
  if (points.empty()) {
    throw Error(Errc::empty_selection, "no records for operator " + key.str());
  }
  // Stable sort keeps input order among equal timestamps; the later row wins.
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  PriceSeries series;
  series.mno = key;
  series.resolution = resolution;
  series.start = points.front().first;

  const std::int64_t span = (points.back().first - series.start).secs();
  const std::int64_t step = resolution.secs();
  const std::int64_t grid_points = (span + step - 1) / step + 1;  // up to first point >= last obs

  series.prices.reserve(static_cast<std::size_t>(grid_points));
  std::size_t next = 0;
  Money current = points.front().second;
  for (std::int64_t i = 0; i < grid_points; ++i) {
    const Timestamp t = series.start + Duration::seconds(i * step);
    while (next < points.size() && points[next].first <= t) {
      current = points[next].second;
      ++next;
    }
    series.prices.push_back(current);
  }
  return series;
}

DataSplit split_series(const PriceSeries& series, Timestamp boundary) {
  if (series.prices.empty() || boundary <= series.start || boundary > series.end()) {
    throw Error(Errc::boundary_out_of_range,
                "boundary " + boundary.str() + " not strictly inside series span");
  }
  const std::int64_t step = series.resolution.secs();
  const std::int64_t offset = (boundary - series.start).secs();
  // First grid index at or after the boundary.
  const std::size_t cut = static_cast<std::size_t>((offset + step - 1) / step);

  DataSplit split;
  split.boundary = boundary;
  split.train = {series.mno, series.resolution, series.start,
                 {series.prices.begin(), series.prices.begin() + cut}};
  split.test = {series.mno, series.resolution, series.timestamp_at(cut),
                {series.prices.begin() + cut, series.prices.end()}};
  return split;
}

std::string write_series_csv(const PriceSeries& series) {
  std::string out = "timestamp,price\n";
  for (std::size_t i = 0; i < series.prices.size(); ++i) {
    out += series.timestamp_at(i).str();
    out += ',';
    out += series.prices[i].str();
    out += '\n';
  }
  return out;
}

PriceSeries read_series_csv(std::istream& in, const MnoKey& key) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) malformed(1, "missing header");
  ++line_no;
  if (strip_cr(line) != "timestamp,price") malformed(line_no, "expected header 'timestamp,price'");

  PriceSeries series;
  series.mno = key;
  std::vector<Timestamp> stamps;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 2) malformed(line_no, "expected 2 fields");
    Timestamp t;
    Money price;
    if (!Timestamp::try_parse(fields[0], t)) malformed(line_no, "bad timestamp");
    if (!Money::try_parse(fields[1], price)) malformed(line_no, "bad price");
    if (price < Money{}) throw Error(Errc::negative_price, "line " + std::to_string(line_no));
    stamps.push_back(t);
    series.prices.push_back(price);
  }
  if (series.prices.empty()) throw Error(Errc::empty_selection, "series file has no points");
  series.start = stamps.front();
  if (stamps.size() > 1) {
    series.resolution = stamps[1] - stamps[0];
    if (series.resolution.secs() <= 0) malformed(2, "timestamps must increase");
    for (std::size_t i = 1; i < stamps.size(); ++i) {
      if (stamps[i] - stamps[i - 1] != series.resolution) {
        malformed(i + 2, "non-uniform spacing");
      }
    }
  }
  return series;
}

}  // namespace resq
