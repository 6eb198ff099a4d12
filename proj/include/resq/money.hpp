#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace resq {

// Exact decimal amount with six fractional digits, stored as integer
// micro-units. Ingested prices stay exact through accounting; conversion to
// floating point happens only where the learner needs it.
class Money {
 public:
  constexpr Money() = default;

  static constexpr Money from_micros(std::int64_t micros) {
    Money m;
    m.micros_ = micros;
    return m;
  }
  static Money from_double(double value);  // rounds to nearest micro

  // Parses "12", "0.0312", "-1.5". Rejects more than six fractional digits.
  static Money parse(std::string_view text);
  static bool try_parse(std::string_view text, Money& out);

  constexpr std::int64_t micros() const { return micros_; }
  double to_double() const { return static_cast<double>(micros_) / 1e6; }

  // Canonical decimal form: no exponent, trailing fractional zeros trimmed.
  std::string str() const;

  constexpr Money operator+(Money other) const { return from_micros(micros_ + other.micros_); }
  constexpr Money operator-(Money other) const { return from_micros(micros_ - other.micros_); }
  constexpr Money& operator+=(Money other) {
    micros_ += other.micros_;
    return *this;
  }
  constexpr auto operator<=>(const Money&) const = default;

 private:
  std::int64_t micros_ = 0;
};

}  // namespace resq
