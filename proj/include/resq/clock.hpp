#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace resq {

// Signed span of whole seconds.
class Duration {
 public:
  constexpr Duration() = default;
  static constexpr Duration seconds(std::int64_t s) {
    Duration d;
    d.sec_ = s;
    return d;
  }
  static constexpr Duration minutes(std::int64_t m) { return seconds(m * 60); }

  constexpr std::int64_t secs() const { return sec_; }
  constexpr double minutes_f() const { return static_cast<double>(sec_) / 60.0; }

  constexpr Duration operator+(Duration o) const { return seconds(sec_ + o.sec_); }
  constexpr Duration operator-(Duration o) const { return seconds(sec_ - o.sec_); }
  constexpr Duration operator*(std::int64_t k) const { return seconds(sec_ * k); }
  constexpr auto operator<=>(const Duration&) const = default;

 private:
  std::int64_t sec_ = 0;
};

// UTC instant at second resolution.
class Timestamp {
 public:
  constexpr Timestamp() = default;
  static constexpr Timestamp from_unix(std::int64_t s) {
    Timestamp t;
    t.sec_ = s;
    return t;
  }

  // RFC-3339, e.g. "2021-04-17T00:05:00Z" or with a "+HH:MM" offset.
  static Timestamp parse(std::string_view text);
  static bool try_parse(std::string_view text, Timestamp& out);

  constexpr std::int64_t unix_seconds() const { return sec_; }
  std::string str() const;  // canonical "...Z" form

  constexpr Timestamp operator+(Duration d) const { return from_unix(sec_ + d.secs()); }
  constexpr Timestamp operator-(Duration d) const { return from_unix(sec_ - d.secs()); }
  constexpr Duration operator-(Timestamp o) const { return Duration::seconds(sec_ - o.sec_); }
  constexpr auto operator<=>(const Timestamp&) const = default;

 private:
  std::int64_t sec_ = 0;
};

}  // namespace resq
