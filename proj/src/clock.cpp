#include "resq/clock.hpp"

#include <cstdio>
#include <stdexcept>

namespace resq {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(std::int64_t y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y += m <= 2;
}

bool read_int(std::string_view s, std::size_t pos, int len, int& out) {
  if (pos + len > s.size()) return false;
  out = 0;
  for (int i = 0; i < len; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    out = out * 10 + (c - '0');
  }
  return true;
}

}  // namespace

bool Timestamp::try_parse(std::string_view text, Timestamp& out) {
  int year, month, day, hour, minute, second;
  if (!read_int(text, 0, 4, year)) return false;
  if (text.size() < 20 || text[4] != '-' || text[7] != '-') return false;
  if (!read_int(text, 5, 2, month) || !read_int(text, 8, 2, day)) return false;
  if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') return false;
  if (text[13] != ':' || text[16] != ':') return false;
  if (!read_int(text, 11, 2, hour) || !read_int(text, 14, 2, minute) ||
      !read_int(text, 17, 2, second)) {
    return false;
  }
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60) {
    return false;
  }
  std::size_t pos = 19;
  // Fractional seconds are accepted and truncated; the domain is whole seconds.
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == start) return false;
  }
  std::int64_t offset = 0;
  if (pos >= text.size()) return false;
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    int oh, om;
    bool neg = text[pos] == '-';
    if (pos + 6 > text.size() || text[pos + 3] != ':') return false;
    if (!read_int(text, pos + 1, 2, oh) || !read_int(text, pos + 4, 2, om)) return false;
    offset = (neg ? -1 : 1) * (oh * 3600 + om * 60);
    pos += 6;
  } else {
    return false;
  }
  if (pos != text.size()) return false;
  std::int64_t days = days_from_civil(year, month, day);
  out = Timestamp::from_unix(days * 86400 + hour * 3600 + minute * 60 + second - offset);
  return true;
}

Timestamp Timestamp::parse(std::string_view text) {
  Timestamp t;
  if (!try_parse(text, t)) {
    throw std::invalid_argument("not an RFC-3339 timestamp: '" + std::string(text) + "'");
  }
  return t;
}

std::string Timestamp::str() const {
  std::int64_t days = sec_ / 86400;
  std::int64_t rem = sec_ % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  std::int64_t year;
  int month, day;
  civil_from_days(days, year, month, day);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04lld-%02d-%02dT%02lld:%02lld:%02lldZ",
                static_cast<long long>(year), month, day, static_cast<long long>(rem / 3600),
                static_cast<long long>((rem % 3600) / 60), static_cast<long long>(rem % 60));
  return buf;
}

}  // namespace resq
