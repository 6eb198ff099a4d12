#include "resq/money.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace resq {

namespace {

constexpr std::int64_t kScale = 1000000;

bool parse_digits(std::string_view s, std::size_t& pos, std::int64_t& out, int max_digits) {
  int n = 0;
  out = 0;
  while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
    if (n >= max_digits) return false;
    out = out * 10 + (s[pos] - '0');
    ++pos;
    ++n;
  }
  return n > 0;
}

}  // namespace

Money Money::from_double(double value) {
  return from_micros(static_cast<std::int64_t>(std::llround(value * 1e6)));
}

bool Money::try_parse(std::string_view text, Money& out) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
    negative = text[pos] == '-';
    ++pos;
  }
  std::int64_t whole = 0;
  if (!parse_digits(text, pos, whole, 13)) return false;
  std::int64_t frac = 0;
  int frac_digits = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    if (!parse_digits(text, pos, frac, 6)) return false;
    frac_digits = static_cast<int>(pos - start);
  }
  if (pos != text.size()) return false;
  for (int i = frac_digits; i < 6; ++i) frac *= 10;
  std::int64_t micros = whole * kScale + frac;
  out = from_micros(negative ? -micros : micros);
  return true;
}

Money Money::parse(std::string_view text) {
  Money m;
  if (!try_parse(text, m)) {
    throw std::invalid_argument("not a decimal amount: '" + std::string(text) + "'");
  }
  return m;
}

std::string Money::str() const {
  std::int64_t v = micros_;
  std::string sign;
  if (v < 0) {
    sign = "-";
    v = -v;
  }
  std::int64_t whole = v / kScale;
  std::int64_t frac = v % kScale;
  if (frac == 0) return sign + std::to_string(whole);
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%06lld", static_cast<long long>(frac));
  std::string digits(buf);
  while (!digits.empty() && digits.back() == '0') digits.pop_back();
  return sign + std::to_string(whole) + "." + digits;
}

}  // namespace resq
