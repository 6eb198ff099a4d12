#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "resq/coverage.hpp"
#include "resq/price_data.hpp"

namespace resq {

// Synthetic-area knobs. Session and slot counts are drawn uniformly from the
// inclusive ranges per sample.
struct SyntheticAreaConfig {
  int sessions_min = 8;
  int sessions_max = 32;
  int slots_min = 8;
  int slots_max = 32;
  int operators = 3;  // M
  Duration t_sv = Duration::minutes(1);
  std::uint64_t seed = 0;  // mixed with the per-call seed

  void validate() const;
};

// Price model that can stand in for the environment during synthetic
// training: anything that can emit whole cost areas and roll a forecast
// forward. A learned sequence model slots in behind this same surface.
class ForecastModel {
 public:
  virtual ~ForecastModel() = default;

  virtual bool fitted() const = 0;
  // Hash of the training series; identical inputs fit to identical prints.
  virtual std::string fingerprint() const = 0;
  virtual CostArea sample_area(const SyntheticAreaConfig& cfg, std::uint64_t seed) const = 0;
  virtual std::vector<Money> forecast_next(const std::vector<Money>& history,
                                           int horizon) const = 0;
};

// Block bootstrap over the per-operator training series: synthetic session
// sequences are concatenations of uniformly chosen contiguous blocks, so
// with zero jitter every generated price exists somewhere in the source.
class BootstrapModel final : public ForecastModel {
 public:
  BootstrapModel() = default;

  bool fitted() const override { return fitted_; }
  std::string fingerprint() const override;
  CostArea sample_area(const SyntheticAreaConfig& cfg, std::uint64_t seed) const override;
  std::vector<Money> forecast_next(const std::vector<Money>& history, int horizon) const override;

  int block_len() const { return block_len_; }
  double jitter() const { return jitter_; }
  const std::map<MnoKey, PriceSeries>& series() const { return series_; }

  std::string to_json() const;
  static BootstrapModel from_json(const std::string& text);

  friend BootstrapModel fit_bootstrap(const std::map<MnoKey, PriceSeries>& train, int block_len,
                                      double jitter);

 private:
  std::map<MnoKey, PriceSeries> series_;
  int block_len_ = 0;
  double jitter_ = 0.0;
  std::uint64_t fingerprint_ = 0;
  bool fitted_ = false;
};

BootstrapModel fit_bootstrap(const std::map<MnoKey, PriceSeries>& train, int block_len,
                             double jitter = 0.0);

}  // namespace resq
