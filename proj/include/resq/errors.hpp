#pragma once

#include <stdexcept>
#include <string>

namespace resq {

// Machine-readable failure codes. Every throwing contract in the library
// raises resq::Error with one of these, so callers can branch without
// string-matching messages.
enum class Errc {
  malformed_line,
  negative_price,
  empty_selection,
  boundary_out_of_range,
  missing_series,
  uncovered_interval,
  missing_choice,
  index_out_of_bounds,
  series_too_short,
  unfitted,
  empty_history,
  bad_config,
  illegal_action,
  episode_finished,
  area_too_large,
  shape_mismatch,
  non_finite_gradient,
  non_finite_loss,
  no_legal_action,
  insufficient_data,
  empty_area_source,
  empty_area_set,
  zero_baseline,
  io_error,
  version_mismatch,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace resq
