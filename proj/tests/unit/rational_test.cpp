#include <gtest/gtest.h>

#include <random>

#include "homeassist/rational.hpp"

using homeassist::Rational;

TEST(Rational, NormalizesSignAndTerms) {
  EXPECT_EQ(Rational(2, 4), Rational(1, 2));
  EXPECT_EQ(Rational(3, -6), Rational(-1, 2));
  EXPECT_EQ(Rational(3, -6).den(), 2);
  EXPECT_EQ(Rational(0, 7).den(), 1);
  EXPECT_THROW(Rational(1, 0), std::invalid_argument);
}

TEST(Rational, ArithmeticAndOrdering) {
  EXPECT_EQ(Rational(1, 2) - Rational(1, 4), Rational(1, 4));
  EXPECT_EQ(Rational(1, 3) + Rational(1, 6), Rational(1, 2));
  EXPECT_LT(Rational(-1, 4), Rational(0));
  EXPECT_GT(Rational(3, 4), Rational(2, 3));
  EXPECT_DOUBLE_EQ(Rational(-3, 8).to_double(), -0.375);
}

TEST(Rational, StringRoundTrip) {
  EXPECT_EQ(Rational(1, 2).str(), "1/2");
  EXPECT_EQ(Rational(-3).str(), "-3");
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto num = static_cast<std::int64_t>(rng() % 2001) - 1000;
    const auto den = static_cast<std::int64_t>(rng() % 97) + 1;
    const Rational r(num, den);
    EXPECT_EQ(Rational::parse(r.str()), r);
  }
  EXPECT_THROW(Rational::parse("half"), std::invalid_argument);
}
