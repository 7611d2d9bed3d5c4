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

/**
 * @file timebase.hpp
 * @brief Exact simulated time shared by every clock domain.
 *
 * Cores run at arbitrary integer frequencies, so a cycle count only becomes a
 * time once it is divided by its core's frequency. All times are kept as
 * reduced rationals of seconds; nothing is rounded until it is printed.
 */

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace mcemu {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Core clock frequency in Hz. Always >= 1.
class Frequency {
 public:
  explicit Frequency(std::uint64_t hz) : hz_(hz) {
    if (hz == 0) throw std::invalid_argument("frequency must be >= 1 Hz");
  }

  static Frequency megahertz(std::uint64_t mhz) {
    return Frequency(mhz * 1'000'000ULL);
  }

  std::uint64_t hz() const noexcept { return hz_; }

  friend bool operator==(Frequency, Frequency) = default;
  friend auto operator<=>(Frequency, Frequency) = default;

 private:
  std::uint64_t hz_;
};

/// Number of target-core clock cycles.
struct CycleCount {
  std::uint64_t value = 0;

  friend CycleCount operator+(CycleCount a, CycleCount b) {
    return CycleCount{a.value + b.value};
  }
  friend bool operator==(CycleCount, CycleCount) = default;
  friend auto operator<=>(CycleCount, CycleCount) = default;
};

/// Formats a rational as a decimal with `places` fractional digits, rounding
/// half away from zero.
inline std::string format_decimal(const Rational& value, int places) {
  BigInt num = boost::multiprecision::numerator(value);
  const BigInt den = boost::multiprecision::denominator(value);
  const bool negative = num < 0;
  if (negative) num = -num;

  BigInt scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;
  const BigInt rounded = (2 * num * scale + den) / (2 * den);

  std::string digits = rounded.str();
  if (places > 0) {
    if (digits.size() <= static_cast<std::size_t>(places)) {
      digits.insert(0, static_cast<std::size_t>(places) + 1 - digits.size(),
                    '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
  }
  if (negative && rounded != 0) digits.insert(0, "-");
  return digits;
}

/// A point in simulated time, in seconds. Non-negative and exact.
class Timestamp {
 public:
  Timestamp() = default;

  explicit Timestamp(Rational seconds) : seconds_(std::move(seconds)) {
    if (seconds_ < 0) throw std::invalid_argument("negative timestamp");
  }

  static Timestamp from_ratio(const BigInt& num, const BigInt& den) {
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Timestamp(Rational(num, den));
  }

  static Timestamp from_seconds(std::uint64_t s) {
    return Timestamp(Rational(s));
  }

  const Rational& seconds() const noexcept { return seconds_; }
  BigInt numerator() const { return boost::multiprecision::numerator(seconds_); }
  BigInt denominator() const {
    return boost::multiprecision::denominator(seconds_);
  }

  bool is_zero() const { return seconds_ == 0; }

  Timestamp& operator+=(const Timestamp& other) {
    seconds_ += other.seconds_;
    return *this;
  }

  friend Timestamp operator+(Timestamp a, const Timestamp& b) {
    a += b;
    return a;
  }

  /// Length of the interval [earlier, *this]. Throws if `earlier` is later.
  Timestamp since(const Timestamp& earlier) const {
    return Timestamp(seconds_ - earlier.seconds_);
  }

  friend bool operator==(const Timestamp& a, const Timestamp& b) {
    return a.seconds_ == b.seconds_;
  }
  friend std::strong_ordering operator<=>(const Timestamp& a,
                                          const Timestamp& b) {
    if (a.seconds_ < b.seconds_) return std::strong_ordering::less;
    if (b.seconds_ < a.seconds_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  /// "num/den" in lowest terms.
  std::string to_fraction() const {
    return numerator().str() + "/" + denominator().str();
  }

  /// Milliseconds, rounded half-up.
  std::string to_ms(int places = 3) const {
    return format_decimal(seconds_ * 1000, places);
  }

  double to_double_seconds() const { return seconds_.convert_to<double>(); }

  friend std::ostream& operator<<(std::ostream& os, const Timestamp& t) {
    return os << t.to_fraction() << " s";
  }

 private:
  Rational seconds_{0};
};

/// c / f seconds.
inline Timestamp cycles_to_time(CycleCount c, Frequency f) {
  return Timestamp(Rational(BigInt(c.value), BigInt(f.hz())));
}

inline Timestamp advance(Timestamp t, CycleCount c, Frequency f) {
  t += cycles_to_time(c, f);
  return t;
}

/// max(a, b); ties return the (equal) value of `a`.
inline Timestamp later_of(const Timestamp& a, const Timestamp& b) {
  return b > a ? b : a;
}

}  // namespace mcemu
