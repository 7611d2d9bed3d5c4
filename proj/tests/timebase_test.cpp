/*
 * Copyright 2026 The mcemu Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <stdexcept>

#include "mcemu/timebase.hpp"

namespace mcemu {
namespace {

TEST(Frequency, RejectsZero) {
  EXPECT_THROW(Frequency(0), std::invalid_argument);
  EXPECT_EQ(Frequency(1).hz(), 1u);
  EXPECT_EQ(Frequency::megahertz(125).hz(), 125'000'000u);
}

TEST(CyclesToTime, DividesByFrequency) {
  const auto f = Frequency::megahertz(125);
  EXPECT_EQ(cycles_to_time({47'250'000}, f), Timestamp::from_ratio(378, 1000));
  EXPECT_EQ(cycles_to_time({33'000'000}, f), Timestamp::from_ratio(264, 1000));
  EXPECT_EQ(cycles_to_time({1}, f), Timestamp::from_ratio(8, 1'000'000'000));
  EXPECT_EQ(cycles_to_time({47'250'000}, f).to_ms(), "378.000");
  EXPECT_EQ(cycles_to_time({33'000'000}, f).to_ms(), "264.000");
}

TEST(CyclesToTime, ZeroCyclesIsZero) {
  EXPECT_TRUE(cycles_to_time({0}, Frequency(7)).is_zero());
}

TEST(CyclesToTime, OneHertzCore) {
  EXPECT_EQ(cycles_to_time({3}, Frequency(1)), Timestamp::from_seconds(3));
}

TEST(CyclesToTime, LargeCountsStayExact) {
  const std::uint64_t c = UINT64_MAX;
  const auto t = cycles_to_time({c}, Frequency(3));
  EXPECT_EQ(t.numerator() * 3, BigInt(c) * t.denominator());
}

TEST(Timestamp, RejectsNegative) {
  EXPECT_THROW(Timestamp(Rational(-1, 2)), std::invalid_argument);
  EXPECT_THROW(Timestamp::from_ratio(1, 0), std::invalid_argument);
  EXPECT_THROW(Timestamp::from_seconds(1).since(Timestamp::from_seconds(2)),
               std::invalid_argument);
}

TEST(Timestamp, FractionIsInLowestTerms) {
  EXPECT_EQ(Timestamp::from_ratio(6, 4).to_fraction(), "3/2");
  EXPECT_EQ(Timestamp().to_fraction(), "0/1");
  std::ostringstream os;
  os << Timestamp::from_ratio(1, 3);
  EXPECT_EQ(os.str(), "1/3 s");
}

TEST(Timestamp, MillisecondsRoundHalfUp) {
  EXPECT_EQ(Timestamp::from_ratio(1, 3).to_ms(), "333.333");
  EXPECT_EQ(Timestamp::from_ratio(2, 3).to_ms(), "666.667");
  EXPECT_EQ(Timestamp::from_ratio(1, 2'000'000).to_ms(), "0.001");
  EXPECT_EQ(Timestamp::from_ratio(1, 2'000'001).to_ms(), "0.000");
  EXPECT_EQ(Timestamp::from_seconds(7).to_ms(0), "7000");
}

TEST(FormatDecimal, Places) {
  EXPECT_EQ(format_decimal(Rational(5, 2), 0), "3");
  EXPECT_EQ(format_decimal(Rational(-5, 2), 0), "-3");
  EXPECT_EQ(format_decimal(Rational(1, 8), 2), "0.13");
  EXPECT_EQ(format_decimal(Rational(-1, 1000), 2), "0.00");
  EXPECT_EQ(format_decimal(Rational(12), 3), "12.000");
}

TEST(Timestamp, OrderingAndLaterOf) {
  const auto a = Timestamp::from_ratio(1, 3), b = Timestamp::from_ratio(1, 2);
  EXPECT_LT(a, b);
  EXPECT_EQ(later_of(a, b), b);
  EXPECT_EQ(later_of(b, a), b);
  EXPECT_EQ(b.since(a), Timestamp::from_ratio(1, 6));
  EXPECT_EQ(advance(a, {1}, Frequency(6)), b);
}

// Sums of cycle counts at mixed frequencies reassociate exactly, which a
// floating-point clock would not.
TEST(TimestampProperty, AdditionIsExactAndAssociative) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint64_t> cyc(0, 1'000'000'000);
  std::uniform_int_distribution<std::uint64_t> hz(1, 200'000'000);
  for (int i = 0; i < 500; ++i) {
    const auto x = cycles_to_time({cyc(rng)}, Frequency(hz(rng)));
    const auto y = cycles_to_time({cyc(rng)}, Frequency(hz(rng)));
    const auto z = cycles_to_time({cyc(rng)}, Frequency(hz(rng)));
    EXPECT_EQ((x + y) + z, x + (y + z));
    EXPECT_EQ(x + y, y + x);
    EXPECT_EQ((x + y).since(y), x);
    EXPECT_GE(x + y, later_of(x, y));
  }
}

TEST(TimestampProperty, SplitComputeEqualsWhole) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> cyc(0, 1'000'000);
  for (int i = 0; i < 500; ++i) {
    const Frequency f(std::uniform_int_distribution<std::uint64_t>(1, 1'000'000'000)(rng));
    const CycleCount a{cyc(rng)}, b{cyc(rng)};
    EXPECT_EQ(advance(advance(Timestamp{}, a, f), b, f), cycles_to_time(a + b, f));
  }
}

}  // namespace
}  // namespace mcemu
