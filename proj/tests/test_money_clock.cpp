#include <doctest.h>

#include "resq/clock.hpp"
#include "resq/money.hpp"
#include "resq/rng.hpp"

using namespace resq;

TEST_CASE("money parses and formats canonical decimals") {
  CHECK(Money::parse("0.0312").micros() == 31200);
  CHECK(Money::parse("12").micros() == 12000000);
  CHECK(Money::parse("-1.5").micros() == -1500000);
  CHECK(Money::parse("0.000001").micros() == 1);
  CHECK(Money::parse("0.0312").str() == "0.0312");
  CHECK(Money::parse("3.100000").str() == "3.1");
  CHECK(Money::parse("7").str() == "7");
  CHECK(Money::from_micros(-31200).str() == "-0.0312");
}

TEST_CASE("money rejects junk and over-precise values") {
  Money m;
  CHECK_FALSE(Money::try_parse("abc", m));
  CHECK_FALSE(Money::try_parse("1.2345678", m));  // seven fractional digits
  CHECK_FALSE(Money::try_parse("1.", m));
  CHECK_FALSE(Money::try_parse("", m));
  CHECK_FALSE(Money::try_parse("1e3", m));
  CHECK_THROWS(Money::parse("12,5"));
}

TEST_CASE("money round-trips through its string form") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const Money m = Money::from_micros(rng.uniform_int(-50000000000, 50000000000));
    CHECK(Money::parse(m.str()) == m);
  }
}

TEST_CASE("money arithmetic is exact") {
  CHECK((Money::parse("0.1") + Money::parse("0.2")).str() == "0.3");
  CHECK((Money::parse("0.3") - Money::parse("0.2")).str() == "0.1");
  CHECK(Money::parse("0.5").to_double() == doctest::Approx(0.5));
}

TEST_CASE("timestamps parse RFC-3339 and format back to Z form") {
  const Timestamp t = Timestamp::parse("2021-04-17T00:05:00Z");
  CHECK(t.str() == "2021-04-17T00:05:00Z");
  CHECK(Timestamp::parse("1970-01-01T00:00:00Z").unix_seconds() == 0);
}

TEST_CASE("timestamp offsets and fractions") {
  CHECK(Timestamp::parse("2021-04-17T02:05:00+02:00") ==
        Timestamp::parse("2021-04-17T00:05:00Z"));
  CHECK(Timestamp::parse("2021-04-16T22:05:00-02:00") ==
        Timestamp::parse("2021-04-17T00:05:00Z"));
  CHECK(Timestamp::parse("2021-04-17T00:05:00.250Z") ==
        Timestamp::parse("2021-04-17T00:05:00Z"));
  Timestamp t;
  CHECK_FALSE(Timestamp::try_parse("2021-04-17", t));
  CHECK_FALSE(Timestamp::try_parse("2021-13-17T00:05:00Z", t));
  CHECK_FALSE(Timestamp::try_parse("2021-04-17T00:05:00", t));  // missing zone
}

TEST_CASE("timestamp round trip across a wide range") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Timestamp t = Timestamp::from_unix(rng.uniform_int(0, 4102444800));  // through 2100
    CHECK(Timestamp::parse(t.str()) == t);
  }
}

TEST_CASE("duration helpers") {
  CHECK(Duration::minutes(3).secs() == 180);
  CHECK(Duration::minutes(1).minutes_f() == doctest::Approx(1.0));
  CHECK((Timestamp::from_unix(100) + Duration::seconds(20)).unix_seconds() == 120);
  CHECK((Timestamp::from_unix(100) - Timestamp::from_unix(40)).secs() == 60);
}
