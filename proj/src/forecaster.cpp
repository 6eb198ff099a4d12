#include "resq/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "resq/errors.hpp"
#include "resq/rng.hpp"

namespace resq {

using nlohmann::json;

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void fnv(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= kFnvPrime;
  }
}

void fnv_str(std::uint64_t& h, const std::string& s) { fnv(h, s.data(), s.size()); }

void fnv_i64(std::uint64_t& h, std::int64_t v) { fnv(h, &v, sizeof(v)); }

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

void SyntheticAreaConfig::validate() const {
  if (sessions_min < 1 || sessions_max < sessions_min || slots_min < 1 ||
      slots_max < slots_min || operators < 1 || t_sv.secs() <= 0) {
    throw Error(Errc::bad_config, "synthetic area config has an empty or non-positive range");
  }
}

BootstrapModel fit_bootstrap(const std::map<MnoKey, PriceSeries>& train, int block_len,
                             double jitter) {
  if (block_len < 1) throw Error(Errc::series_too_short, "block length must be at least 1");
  if (jitter < 0.0) throw Error(Errc::bad_config, "jitter must be non-negative");
  if (train.empty()) throw Error(Errc::empty_selection, "no training series");
  for (const auto& [key, series] : train) {
    if (series.size() < static_cast<std::size_t>(block_len)) {
      throw Error(Errc::series_too_short,
                  key.str() + " has " + std::to_string(series.size()) + " points, block needs " +
                      std::to_string(block_len));
    }
  }

  BootstrapModel model;
  model.series_ = train;
  model.block_len_ = block_len;
  model.jitter_ = jitter;

  std::uint64_t h = kFnvOffset;
  for (const auto& [key, series] : train) {
    fnv_str(h, key.str());
    fnv_i64(h, series.start.unix_seconds());
    fnv_i64(h, series.resolution.secs());
    for (Money p : series.prices) fnv_i64(h, p.micros());
  }
  fnv_i64(h, block_len);
  model.fingerprint_ = h;
  model.fitted_ = true;
  return model;
}

std::string BootstrapModel::fingerprint() const { return hex(fingerprint_); }

CostArea BootstrapModel::sample_area(const SyntheticAreaConfig& cfg, std::uint64_t seed) const {
  if (!fitted_) throw Error(Errc::unfitted, "sample_area before fit");
  cfg.validate();
  if (static_cast<std::size_t>(cfg.operators) > series_.size()) {
    throw Error(Errc::bad_config, "model has " + std::to_string(series_.size()) +
                                      " operators, config wants " + std::to_string(cfg.operators));
  }

  Rng rng(mix_seed(cfg.seed, seed));
  CostArea area;
  area.area_id = "synth-" + std::to_string(seed);
  area.t_sv = cfg.t_sv;
  area.sessions = static_cast<int>(rng.uniform_int(cfg.sessions_min, cfg.sessions_max));
  const int slots = static_cast<int>(rng.uniform_int(cfg.slots_min, cfg.slots_max));
  for (int r = 0; r < slots; ++r) {
    area.slot_offsets.push_back(Duration::seconds(cfg.t_sv.secs() * r));
  }

  auto it = series_.begin();
  for (int m = 0; m < cfg.operators; ++m, ++it) area.operators.push_back(it->first);
  area.kind = classify_area(area);
  area.start = series_.begin()->second.start;
  area.end = area.start + Duration::seconds(cfg.t_sv.secs() * area.sessions);

  // One session sequence per operator; every departure slot of a session
  // quotes that session's price. The offers change between sessions, not
  // within one: waiting is the only way to see a new price. Block positions
  // are shared across operators so synthetic areas keep the cross-operator
  // correlation that time-aligned trace areas have.
  const int needed = area.sessions;
  std::size_t min_len = series_.begin()->second.size();
  for (const auto& [key, s] : series_) min_len = std::min(min_len, s.size());
  std::vector<std::size_t> positions;
  for (int have = 0; have < needed; have += block_len_) {
    positions.push_back(static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(min_len) - block_len_)));
  }

  std::vector<std::vector<Money>> sequences;
  for (const MnoKey& op : area.operators) {
    const auto& src = series_.at(op).prices;
    std::vector<Money> seq;
    seq.reserve(static_cast<std::size_t>(needed));
    for (const std::size_t start : positions) {
      for (int i = 0; i < block_len_ && static_cast<int>(seq.size()) < needed; ++i) {
        seq.push_back(src[start + i]);
      }
    }
    if (jitter_ > 0.0) {
      for (Money& p : seq) {
        const double scaled = p.to_double() * (1.0 + jitter_ * rng.uniform(-1.0, 1.0));
        p = Money::from_double(std::max(0.0, scaled));
      }
    }
    sequences.push_back(std::move(seq));
  }

  area.prices.reserve(static_cast<std::size_t>(area.sessions) * cfg.operators * slots);
  for (int n = 0; n < area.sessions; ++n) {
    for (int m = 0; m < cfg.operators; ++m) {
      for (int r = 0; r < slots; ++r) {
        area.prices.push_back(sequences[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)]);
      }
    }
  }
  area.validate();
  return area;
}

std::vector<Money> BootstrapModel::forecast_next(const std::vector<Money>& history,
                                                 int horizon) const {
  if (!fitted_) throw Error(Errc::unfitted, "forecast_next before fit");
  if (history.empty()) throw Error(Errc::empty_history, "history is empty");
  if (horizon < 1) throw Error(Errc::bad_config, "horizon must be at least 1");

  const std::size_t window = std::min(history.size(), static_cast<std::size_t>(block_len_));
  std::vector<double> suffix(window);
  for (std::size_t i = 0; i < window; ++i) {
    suffix[i] = history[history.size() - window + i].to_double();
  }

  // Minimum squared distance over every window position in every series;
  // ties resolve to the first operator and earliest position.
  const PriceSeries* best_series = nullptr;
  std::size_t best_pos = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& [key, series] : series_) {
    if (series.size() < window) continue;
    for (std::size_t pos = 0; pos + window <= series.size(); ++pos) {
      double dist = 0.0;
      for (std::size_t i = 0; i < window && dist < best_dist; ++i) {
        const double d = series.prices[pos + i].to_double() - suffix[i];
        dist += d * d;
      }
      if (dist < best_dist) {
        best_dist = dist;
        best_series = &series;
        best_pos = pos;
      }
    }
  }
  if (best_series == nullptr) throw Error(Errc::series_too_short, "no series fits the window");

  std::vector<Money> forecast;
  forecast.reserve(static_cast<std::size_t>(horizon));
  for (int i = 0; i < horizon; ++i) {
    const std::size_t idx = std::min(best_pos + window + i, best_series->size() - 1);
    forecast.push_back(best_series->prices[idx]);
  }
  return forecast;
}

std::string BootstrapModel::to_json() const {
  if (!fitted_) throw Error(Errc::unfitted, "cannot save an unfitted model");
  json doc;
  doc["type"] = "bootstrap";
  doc["version"] = 1;
  doc["block_len"] = block_len_;
  doc["jitter"] = jitter_;
  doc["fingerprint"] = fingerprint();
  json series = json::object();
  for (const auto& [key, s] : series_) {
    json entry;
    entry["start"] = s.start.str();
    entry["resolution_sec"] = s.resolution.secs();
    json prices = json::array();
    for (Money p : s.prices) prices.push_back(p.str());
    entry["prices"] = std::move(prices);
    series[key.str()] = std::move(entry);
  }
  doc["series"] = std::move(series);
  return doc.dump() + "\n";
}

BootstrapModel BootstrapModel::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::io_error, std::string("model file: ") + e.what());
  }
  if (doc.value("type", "") != "bootstrap" || doc.value("version", 0) != 1) {
    throw Error(Errc::version_mismatch, "expected a version-1 bootstrap model");
  }
  std::map<MnoKey, PriceSeries> train;
  for (const auto& [name, entry] : doc.at("series").items()) {
    PriceSeries s;
    s.mno = MnoKey::parse(name);
    s.start = Timestamp::parse(entry.at("start").get<std::string>());
    s.resolution = Duration::seconds(entry.at("resolution_sec").get<std::int64_t>());
    for (const auto& p : entry.at("prices")) s.prices.push_back(Money::parse(p.get<std::string>()));
    train[s.mno] = std::move(s);
  }
  BootstrapModel model =
      fit_bootstrap(train, doc.at("block_len").get<int>(), doc.at("jitter").get<double>());
  if (model.fingerprint() != doc.at("fingerprint").get<std::string>()) {
    throw Error(Errc::version_mismatch, "model fingerprint does not match its series");
  }
  return model;
}

}  // namespace resq
