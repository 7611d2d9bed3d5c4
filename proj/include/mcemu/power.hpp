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
 * @file power.hpp
 * @brief Frequency-indexed busy power table and per-core energy.
 *
 * energy = idle_time * idle_power + busy_time * busy_power, where
 * busy_power(f) = cpu_busy(f) + mem_busy(f) and idle_power is the static
 * power plus the (zero by default) idle dynamic power. Power values are
 * fixed-point hundredths of a milliwatt; energies are exact rationals in mJ.
 */

#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mcemu/errors.hpp"
#include "mcemu/kernel.hpp"
#include "mcemu/timebase.hpp"

namespace mcemu {

/// Non-negative fixed-point decimal with `Places` fractional digits.
template <int Places>
class FixedDecimal {
 public:
  static constexpr std::int64_t kScale = [] {
    std::int64_t s = 1;
    for (int i = 0; i < Places; ++i) s *= 10;
    return s;
  }();

  constexpr FixedDecimal() = default;

  static constexpr FixedDecimal from_units(std::int64_t scaled) {
    FixedDecimal d;
    d.scaled_ = scaled;
    return d;
  }

  /// Accepts a double only if it is within 1e-6 of a representable value.
  static std::optional<FixedDecimal> from_double(double v) {
    if (!std::isfinite(v) || v < 0) return std::nullopt;
    const double scaled = v * static_cast<double>(kScale);
    const double r = std::round(scaled);
    if (std::fabs(scaled - r) > 1e-6 || r > 9e15) return std::nullopt;
    return from_units(static_cast<std::int64_t>(r));
  }

  constexpr std::int64_t units() const noexcept { return scaled_; }
  Rational value() const { return Rational(scaled_, kScale); }
  std::string str() const { return format_decimal(value(), Places); }
  double to_double() const {
    return static_cast<double>(scaled_) / static_cast<double>(kScale);
  }

  friend constexpr FixedDecimal operator+(FixedDecimal a, FixedDecimal b) {
    return from_units(a.scaled_ + b.scaled_);
  }
  friend constexpr bool operator==(FixedDecimal, FixedDecimal) = default;
  friend constexpr auto operator<=>(FixedDecimal, FixedDecimal) = default;

 private:
  std::int64_t scaled_ = 0;
};

/// Milliwatts, to the hundredth.
using Milliwatts = FixedDecimal<2>;

/// Exact energy in millijoules.
class Energy {
 public:
  Energy() = default;
  explicit Energy(Rational mj) : mj_(std::move(mj)) {}

  const Rational& millijoules() const noexcept { return mj_; }
  double to_double() const { return mj_.convert_to<double>(); }
  std::string str(int places = 6) const { return format_decimal(mj_, places); }

  Energy& operator+=(const Energy& o) {
    mj_ += o.mj_;
    return *this;
  }
  friend Energy operator+(Energy a, const Energy& b) {
    a += b;
    return a;
  }
  friend bool operator==(const Energy& a, const Energy& b) {
    return a.mj_ == b.mj_;
  }
  friend std::strong_ordering operator<=>(const Energy& a, const Energy& b) {
    if (a.mj_ < b.mj_) return std::strong_ordering::less;
    if (b.mj_ < a.mj_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  Rational mj_{0};
};

struct PowerEntry {
  Frequency frequency;
  Milliwatts cpu_busy;
  Milliwatts mem_busy;
};

class PowerModel {
 public:
  PowerModel() = default;

  PowerModel(std::vector<PowerEntry> entries, Milliwatts static_power,
             Milliwatts idle_dynamic = {})
      : static_(static_power), idle_dynamic_(idle_dynamic) {
    for (auto& e : entries) {
      if (!entries_.emplace(e.frequency.hz(), e).second)
        throw ConfigError("duplicate power entry for " +
                          std::to_string(e.frequency.hz()) + " Hz");
    }
  }

  /// Microblaze + BRAM busy power per clock domain, 1.48 mW static.
  static PowerModel default_table() {
    auto mw = [](std::int64_t hundredths) {
      return Milliwatts::from_units(hundredths);
    };
    auto row = [&](std::uint64_t mhz, std::int64_t cpu, std::int64_t mem) {
      return PowerEntry{Frequency::megahertz(mhz), mw(cpu), mw(mem)};
    };
    return PowerModel({row(25, 714, 1457), row(45, 1223, 2568),
                       row(55, 1465, 3080), row(60, 1600, 3401),
                       row(90, 2324, 5065), row(125, 3191, 6891)},
                      mw(148));
  }

  /// Parses {"static_mw", "idle_dynamic_mw"?, "entries": [{"mhz", "cpu_mw",
  /// "mem_mw"}]}. Entries may give "hz" instead of "mhz".
  static PowerModel from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("$", "expected an object");
    auto milliwatts = [](const nlohmann::json& j, const std::string& path) {
      if (!j.is_number()) throw SchemaError(path, "expected a number");
      auto v = Milliwatts::from_double(j.get<double>());
      if (!v)
        throw SchemaError(path,
                          "expected a non-negative value with at most 2 "
                          "decimal places");
      return *v;
    };
    Milliwatts static_power = Milliwatts::from_units(148);
    if (doc.contains("static_mw"))
      static_power = milliwatts(doc["static_mw"], "$.static_mw");
    Milliwatts idle_dynamic;
    if (doc.contains("idle_dynamic_mw"))
      idle_dynamic = milliwatts(doc["idle_dynamic_mw"], "$.idle_dynamic_mw");

    if (!doc.contains("entries") || !doc["entries"].is_array())
      throw SchemaError("$.entries", "expected an array");
    std::vector<PowerEntry> entries;
    std::map<std::uint64_t, std::size_t> seen;
    const auto& arr = doc["entries"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "$.entries[" + std::to_string(i) + "]";
      const auto& e = arr[i];
      if (!e.is_object()) throw SchemaError(path, "expected an object");
      std::uint64_t hz = 0;
      if (e.contains("mhz") && e["mhz"].is_number_unsigned())
        hz = e["mhz"].get<std::uint64_t>() * 1'000'000ULL;
      else if (e.contains("hz") && e["hz"].is_number_unsigned())
        hz = e["hz"].get<std::uint64_t>();
      if (hz == 0)
        throw SchemaError(path, "needs a positive integer 'mhz' (or 'hz')");
      if (!seen.emplace(hz, i).second)
        throw SchemaError(path, "duplicate frequency " + std::to_string(hz) +
                                    " Hz");
      if (!e.contains("cpu_mw")) throw SchemaError(path, "missing 'cpu_mw'");
      if (!e.contains("mem_mw")) throw SchemaError(path, "missing 'mem_mw'");
      entries.push_back({Frequency(hz), milliwatts(e["cpu_mw"], path + ".cpu_mw"),
                         milliwatts(e["mem_mw"], path + ".mem_mw")});
    }
    return PowerModel(std::move(entries), static_power, idle_dynamic);
  }

  nlohmann::json to_json() const {
    nlohmann::json doc;
    doc["static_mw"] = static_.to_double();
    doc["idle_dynamic_mw"] = idle_dynamic_.to_double();
    doc["entries"] = nlohmann::json::array();
    for (const auto& [hz, e] : entries_) {
      nlohmann::json row;
      if (hz % 1'000'000 == 0)
        row["mhz"] = hz / 1'000'000;
      else
        row["hz"] = hz;
      row["cpu_mw"] = e.cpu_busy.to_double();
      row["mem_mw"] = e.mem_busy.to_double();
      doc["entries"].push_back(row);
    }
    return doc;
  }

  bool has(Frequency f) const { return entries_.count(f.hz()) != 0; }

  std::vector<PowerEntry> entries() const {
    std::vector<PowerEntry> out;
    for (const auto& [hz, e] : entries_) out.push_back(e);
    return out;
  }

  Milliwatts static_power() const noexcept { return static_; }
  Milliwatts idle_power() const noexcept { return static_ + idle_dynamic_; }

  Milliwatts busy_power(Frequency f) const {
    auto it = entries_.find(f.hz());
    if (it == entries_.end())
      throw UnknownFrequency("no power entry for " + std::to_string(f.hz()) +
                             " Hz");
    return it->second.cpu_busy + it->second.mem_busy;
  }

  Energy core_energy(const Timestamp& busy, const Timestamp& idle,
                     Frequency f) const {
    const Rational busy_mw = busy_power(f).value();
    return Energy(idle.seconds() * idle_power().value() +
                  busy.seconds() * busy_mw);
  }

  /// Sum of core energies. Throws UnknownFrequency naming the core.
  Energy design_energy(const SimulationReport& report) const {
    Energy total;
    for (const auto& c : report.cores) {
      if (!has(c.frequency))
        throw UnknownFrequency("core " + std::to_string(c.core_id) + " ('" +
                               c.task + "') runs at " +
                               std::to_string(c.frequency.hz()) +
                               " Hz, which has no power entry");
      total += core_energy(c.busy_time, c.idle_time, c.frequency);
    }
    return total;
  }

 private:
  std::map<std::uint64_t, PowerEntry> entries_;
  Milliwatts static_ = Milliwatts::from_units(148);
  Milliwatts idle_dynamic_;
};

}  // namespace mcemu
