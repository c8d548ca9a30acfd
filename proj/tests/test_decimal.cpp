#include <gtest/gtest.h>

#include "spoofdet/decimal.hpp"
#include "spoofdet/errors.hpp"
#include "spoofdet/random.hpp"

using namespace spoofdet;

TEST(Decimal, ParsesAndFormatsCanonically) {
  EXPECT_EQ(Price::parse("100").raw(), 100 * Price::kScale);
  EXPECT_EQ(Price::parse("0.00000001").raw(), 1);
  EXPECT_EQ(Price::parse("-1.5").raw(), -150000000);
  EXPECT_EQ(Price::parse("+2.25").raw(), 225000000);
  EXPECT_EQ(Price::parse("100.50").to_string(), "100.5");
  EXPECT_EQ(Price::parse("7.000").to_string(), "7");
  EXPECT_EQ(Price::parse("0.0").to_string(), "0");
  EXPECT_EQ(Volume::parse("-0.25").to_string(), "-0.25");
  EXPECT_EQ(Volume::parse(".5").to_string(), "0.5");
}

TEST(Decimal, RejectsMalformedText) {
  for (const char* bad : {"", "-", "1.2.3", "abc", "1e5", "0.000000001", " 1", "1 ", "--1"}) {
    EXPECT_THROW(Price::parse(bad), DataError) << bad;
  }
}

TEST(Decimal, RoundTripsRandomValues) {
  Rng rng(11);
  for (int i = 0; i < 20000; ++i) {
    const auto raw = static_cast<std::int64_t>(rng() % 2000000000000000ULL) - 1000000000000000LL;
    const auto d = Volume::from_raw(raw);
    EXPECT_EQ(Volume::parse(d.to_string()), d);
  }
}

TEST(Decimal, ArithmeticIsExact) {
  const auto a = Price::parse("0.1");
  const auto b = Price::parse("0.2");
  EXPECT_EQ(a + b, Price::parse("0.3"));
  EXPECT_EQ(b - a - a, Price{});
  EXPECT_LT(a, b);
  EXPECT_EQ(Price::from_double(100.25).raw(), 10025000000);
  EXPECT_DOUBLE_EQ(Price::parse("100.5").to_double(), 100.5);
}
