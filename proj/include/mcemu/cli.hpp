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
 * @file cli.hpp
 * @brief Command implementations behind the `mcemu` tool.
 *
 * Exit codes: 0 success, 1 I/O or internal failure, 2 configuration or
 * schema error, 3 deadlock. Output files are written to a temporary name and
 * renamed into place only after everything succeeded.
 */

#pragma once

#include <cctype>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mcemu/appmodel.hpp"
#include "mcemu/dse.hpp"
#include "mcemu/errors.hpp"
#include "mcemu/kernel.hpp"
#include "mcemu/power.hpp"
#include "mcemu/scatter.hpp"

namespace mcemu::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDeadlock = 3,
};

struct CommonOptions {
  std::string app_path;
  std::string power_path;  // empty: built-in table
  std::string out_dir = ".";
};

struct SimulateOptions : CommonOptions {
  std::string mapping;  // "A+B|C"; empty: one task per core
  std::string clocks;   // one per core, or a single value for all
};

struct SweepOptions : CommonOptions {
  std::string freqs;
  std::size_t max_cores = 0;  // 0: number of tasks
  std::string mappings;       // ';'-separated explicit mapping list
  unsigned jobs = 1;
};

/// Parses one frequency: a decimal number with an optional Hz/kHz/MHz/GHz
/// suffix (case-insensitive). A bare number is MHz. Must be a whole,
/// positive number of Hz.
inline Frequency parse_frequency(std::string_view text) {
  std::string s;
  for (char c : text)
    if (c != ' ') s += c;
  std::size_t i = 0;
  while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) ||
                          s[i] == '.'))
    ++i;
  const std::string number = s.substr(0, i);
  std::string unit = s.substr(i);
  for (auto& c : unit) c = static_cast<char>(std::tolower(c));
  std::uint64_t scale = 1'000'000;
  if (unit == "hz")
    scale = 1;
  else if (unit == "khz")
    scale = 1'000;
  else if (unit == "mhz" || unit.empty())
    scale = 1'000'000;
  else if (unit == "ghz")
    scale = 1'000'000'000;
  else
    throw ConfigError("bad frequency unit in '" + std::string(text) + "'");

  const auto dot = number.find('.');
  if (number.empty() || number == "." ||
      number.find('.', dot == std::string::npos ? 0 : dot + 1) !=
          std::string::npos)
    throw ConfigError("bad frequency '" + std::string(text) + "'");
  const std::string whole = number.substr(0, dot);
  const std::string frac =
      dot == std::string::npos ? "" : number.substr(dot + 1);
  BigInt num = 0;
  for (char c : whole + frac) num = num * 10 + (c - '0');
  BigInt den = 1;
  for (std::size_t k = 0; k < frac.size(); ++k) den *= 10;
  const Rational hz = Rational(num * scale, den);
  if (boost::multiprecision::denominator(hz) != 1 || hz <= 0 ||
      hz > Rational(BigInt(UINT64_MAX)))
    throw ConfigError("frequency '" + std::string(text) +
                      "' is not a positive whole number of Hz");
  return Frequency(boost::multiprecision::numerator(hz).convert_to<std::uint64_t>());
}

inline std::vector<Frequency> parse_frequency_list(std::string_view text) {
  std::vector<Frequency> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ','))
    if (item.find_first_not_of(' ') != std::string::npos)
      out.push_back(parse_frequency(item));
  return out;
}

inline std::string describe_frequency(Frequency f) {
  if (f.hz() % 1'000'000 == 0) return std::to_string(f.hz() / 1'000'000) + " MHz";
  return std::to_string(f.hz()) + " Hz";
}

/// Writes `content` to `path` via a temporary file and a rename.
inline void write_file_atomically(const std::filesystem::path& path,
                                  const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush())
      throw std::runtime_error("cannot write '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline int exit_code_for(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const DesignError& d) {
    return exit_code_for(d.cause());
  } catch (const Deadlock&) {
    return kDeadlock;
  } catch (const FusionCycle&) {
    return kDeadlock;
  } catch (const ConfigError&) {
    return kConfigError;
  } catch (const std::invalid_argument&) {
    return kConfigError;
  } catch (...) {
    return kFailure;
  }
}

namespace detail {

inline AppGraph load_app(const std::string& path) {
  if (path.empty()) throw ConfigError("--app is required");
  return build_task_graph_from_config(load_json_file(path));
}

inline PowerModel load_power(const std::string& path) {
  if (path.empty()) return PowerModel::default_table();
  return PowerModel::from_json(load_json_file(path));
}

inline std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::filesystem::path p = dir.empty() ? "." : dir;
  std::filesystem::create_directories(p);
  return p;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& body) {
  try {
    return body();
  } catch (...) {
    const auto e = std::current_exception();
    try {
      std::rethrow_exception(e);
    } catch (const std::exception& ex) {
      err << "error: " << ex.what() << '\n';
    }
    return exit_code_for(e);
  }
}

}  // namespace detail

inline std::string format_summary(const AppGraph& app,
                                  const SimulationReport& report,
                                  const std::string& energy_line) {
  std::ostringstream os;
  os << "application: " << (app.name.empty() ? "(unnamed)" : app.name) << " ("
     << report.cores.size() << " cores)\n";
  const auto total = report.total_time();
  os << "total execution time: " << total.to_ms() << " ms (" << total.to_fraction()
     << " s)\n";
  for (const auto& c : report.cores) {
    const Rational ratio = c.busy_ratio();
    os << "core " << c.core_id << " [" << c.task << "] @ "
       << describe_frequency(c.frequency) << ": lt " << c.logical_time.to_ms()
       << " ms, busy " << c.busy_time.to_ms() << " ms, idle "
       << c.idle_time.to_ms() << " ms, busy ratio " << format_decimal(ratio, 6)
       << " (" << boost::multiprecision::numerator(ratio) << "/"
       << boost::multiprecision::denominator(ratio) << ")\n";
  }
  os << energy_line << '\n';
  return os.str();
}

/// Runs one design and writes report.csv and summary.txt into out_dir.
inline int cmd_simulate(const SimulateOptions& opt, std::ostream& out,
                        std::ostream& err) {
  return detail::guarded(err, [&] {
    const AppGraph app = detail::load_app(opt.app_path);
    const PowerModel power = detail::load_power(opt.power_path);
    const Mapping mapping =
        opt.mapping.empty() ? Mapping::identity(app) : Mapping::parse(opt.mapping);
    check_partition(app, mapping);

    std::vector<Frequency> clocks = opt.clocks.empty()
                                        ? std::vector<Frequency>{Frequency::megahertz(125)}
                                        : parse_frequency_list(opt.clocks);
    if (clocks.size() == 1 && mapping.core_count() > 1)
      clocks.assign(mapping.core_count(), clocks.front());
    if (clocks.size() != mapping.core_count())
      throw LengthMismatch("mapping has " + std::to_string(mapping.core_count()) +
                           " cores but " + std::to_string(clocks.size()) +
                           " clocks were given");

    const AppGraph fused = fuse_mapping(app, mapping);
    const SimulationReport report = simulate(fused, clocks);

    std::string energy_line;
    try {
      energy_line = "energy: " + power.design_energy(report).str(6) + " mJ";
    } catch (const UnknownFrequency& e) {
      energy_line = std::string("energy: unavailable (") + e.what() + ")";
    }
    const std::string summary = format_summary(app, report, energy_line);

    const auto dir = detail::prepare_out_dir(opt.out_dir);
    write_file_atomically(dir / "report.csv", report_csv(report));
    write_file_atomically(dir / "summary.txt", summary);
    out << summary;
    return int{kOk};
  });
}

/// Sweeps mappings x clock domains; writes sweep.csv and scatter.svg.
inline int cmd_sweep(const SweepOptions& opt, std::ostream& out,
                     std::ostream& err) {
  return detail::guarded(err, [&] {
    const AppGraph app = detail::load_app(opt.app_path);
    const PowerModel power = detail::load_power(opt.power_path);
    const auto freqs = parse_frequency_list(opt.freqs);
    if (freqs.empty()) throw EmptyInput("--freqs needs at least one clock domain");
    for (auto f : freqs)
      if (!power.has(f))
        throw UnknownFrequency("clock domain " + describe_frequency(f) +
                               " has no power entry");

    std::vector<Mapping> mappings;
    if (!opt.mappings.empty()) {
      std::string item;
      std::istringstream in(opt.mappings);
      while (std::getline(in, item, ';'))
        if (item.find_first_not_of(' ') != std::string::npos) {
          mappings.push_back(Mapping::parse(item));
          check_partition(app, mappings.back());
        }
      if (mappings.empty()) throw EmptyInput("--mappings lists no mapping");
    } else {
      std::vector<std::string> order;
      for (const auto& t : app.tasks) order.push_back(t.name);
      mappings = enum_contiguous_mappings(
          order, opt.max_cores == 0 ? order.size() : opt.max_cores);
    }

    const auto designs = enum_designs(mappings, freqs);
    const auto metrics = sweep(app, designs, power, opt.jobs);
    const auto rows = sweep_rows(metrics);

    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    const std::string svg = render_scatter(scatter_points(rows));

    const auto dir = detail::prepare_out_dir(opt.out_dir);
    write_file_atomically(dir / "sweep.csv", csv.str());
    write_file_atomically(dir / "scatter.svg", svg);

    std::size_t front = 0;
    for (const auto& r : rows) front += r.on_pareto_front ? 1 : 0;
    out << designs.size() << " designs evaluated\n";
    out << "pareto front: " << front << " designs\n";
    return int{kOk};
  });
}

/// Schema check of the application (and power table, when given).
inline int cmd_validate(const CommonOptions& opt, std::ostream& out,
                        std::ostream& err) {
  return detail::guarded(err, [&] {
    const AppGraph app = detail::load_app(opt.app_path);
    const PowerModel power = detail::load_power(opt.power_path);
    out << "ok: " << app.tasks.size() << " tasks, " << app.channels.size()
        << " channels; power table with " << power.entries().size()
        << " clock domains\n";
    return int{kOk};
  });
}

}  // namespace mcemu::cli
