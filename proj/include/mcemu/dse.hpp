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
 * @file dse.hpp
 * @brief Design-space exploration over task mappings and clock assignments.
 *
 * A design is a mapping (an ordered partition of the tasks into per-core
 * groups) plus one clock frequency per group. Each design is evaluated by
 * fusing every group into one sequential program, running the result on the
 * kernel, and pricing the per-core busy/idle times with the power model.
 */

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "mcemu/appmodel.hpp"
#include "mcemu/errors.hpp"
#include "mcemu/kernel.hpp"
#include "mcemu/oracle.hpp"
#include "mcemu/power.hpp"
#include "mcemu/timebase.hpp"

namespace mcemu {

// ---------------------------------------------------------------------------
// Mappings and designs

/// Ordered partition of task names; group k runs on core k.
struct Mapping {
  std::vector<std::vector<std::string>> groups;

  std::size_t core_count() const noexcept { return groups.size(); }

  /// "A+B|C": groups separated by '|', tasks within a group by '+'.
  std::string str() const {
    std::string out;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (g) out += '|';
      for (std::size_t t = 0; t < groups[g].size(); ++t) {
        if (t) out += '+';
        out += groups[g][t];
      }
    }
    return out;
  }

  static Mapping parse(std::string_view text) {
    Mapping m;
    std::vector<std::string> group;
    std::string name;
    auto flush_name = [&] {
      if (name.empty())
        throw MappingError("empty task name in mapping '" + std::string(text) +
                           "'");
      group.push_back(std::move(name));
      name.clear();
    };
    for (char c : text) {
      if (c == '+') {
        flush_name();
      } else if (c == '|') {
        flush_name();
        m.groups.push_back(std::move(group));
        group.clear();
      } else if (c != ' ') {
        name += c;
      }
    }
    flush_name();
    m.groups.push_back(std::move(group));
    return m;
  }

  /// One task per core, in application order.
  static Mapping identity(const AppGraph& app) {
    Mapping m;
    for (const auto& t : app.tasks) m.groups.push_back({t.name});
    return m;
  }

  friend bool operator==(const Mapping&, const Mapping&) = default;
};

/// Throws MappingError unless `m` partitions the tasks of `app` exactly.
inline void check_partition(const AppGraph& app, const Mapping& m) {
  if (m.groups.empty()) throw MappingError("mapping has no groups");
  std::set<std::string> seen;
  for (const auto& g : m.groups) {
    if (g.empty()) throw MappingError("mapping '" + m.str() + "' has an empty group");
    for (const auto& t : g) {
      if (!app.find_task(t))
        throw MappingError("mapping names unknown task '" + t + "'");
      if (!seen.insert(t).second)
        throw MappingError("task '" + t + "' is mapped twice");
    }
  }
  for (const auto& t : app.tasks)
    if (!seen.count(t.name))
      throw MappingError("task '" + t.name + "' is not mapped");
}

struct Design {
  Mapping mapping;
  std::vector<Frequency> clocks;  // one per group
  friend bool operator==(const Design&, const Design&) = default;
};

/// Every split of `task_order` into exactly `groups` contiguous non-empty
/// groups, in lexicographic order of the cut positions.
inline std::vector<Mapping> enum_contiguous_mappings_with(
    std::span<const std::string> task_order, std::size_t groups) {
  std::vector<Mapping> out;
  const std::size_t n = task_order.size();
  if (groups == 0 || groups > n) return out;
  std::vector<std::size_t> cuts(groups - 1);
  std::iota(cuts.begin(), cuts.end(), std::size_t{1});
  for (;;) {
    Mapping m;
    std::size_t begin = 0;
    for (std::size_t g = 0; g < groups; ++g) {
      const std::size_t end = g + 1 < groups ? cuts[g] : n;
      m.groups.emplace_back(task_order.begin() + begin, task_order.begin() + end);
      begin = end;
    }
    out.push_back(std::move(m));
    // Next combination of cut positions from {1, ..., n-1}.
    std::size_t i = cuts.size();
    while (i > 0 && cuts[i - 1] == n - 1 - (cuts.size() - i)) --i;
    if (i == 0) break;
    ++cuts[i - 1];
    for (std::size_t j = i; j < cuts.size(); ++j) cuts[j] = cuts[j - 1] + 1;
  }
  return out;
}

/// All contiguous mappings with 1..max_cores groups, fewest groups first.
inline std::vector<Mapping> enum_contiguous_mappings(
    std::span<const std::string> task_order, std::size_t max_cores) {
  if (task_order.empty()) throw EmptyInput("no tasks to map");
  if (max_cores == 0 || max_cores > task_order.size())
    throw MappingError("max_cores must be in 1.." +
                       std::to_string(task_order.size()));
  std::vector<Mapping> out;
  for (std::size_t k = 1; k <= max_cores; ++k) {
    auto part = enum_contiguous_mappings_with(task_order, k);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

/// Cross product of mappings and per-core clock choices. For each mapping,
/// clock assignments run in odometer order (last core changes fastest).
inline std::vector<Design> enum_designs(std::span<const Mapping> mappings,
                                        std::span<const Frequency> domain_freqs) {
  if (domain_freqs.empty()) throw EmptyInput("no clock domains given");
  std::set<std::uint64_t> distinct;
  for (auto f : domain_freqs)
    if (!distinct.insert(f.hz()).second)
      throw ConfigError("clock domain " + std::to_string(f.hz()) +
                        " Hz listed twice");

  std::vector<Design> out;
  for (const auto& m : mappings) {
    const std::size_t k = m.core_count();
    std::vector<std::size_t> digit(k, 0);
    for (;;) {
      Design d{m, {}};
      d.clocks.reserve(k);
      for (auto i : digit) d.clocks.push_back(domain_freqs[i]);
      out.push_back(std::move(d));
      std::size_t pos = k;
      while (pos > 0 && ++digit[pos - 1] == domain_freqs.size()) {
        digit[pos - 1] = 0;
        --pos;
      }
      if (pos == 0) break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fusion

namespace fusion_detail {

// Position of each task in a topological order of the channel graph
// (writer before reader). Tasks on a cycle keep application order after the
// acyclic part.
inline std::vector<std::size_t> topological_rank(
    const AppGraph& app, const std::map<std::string, ChannelEndpoints>& ends) {
  const std::size_t n = app.tasks.size();
  std::vector<std::set<std::size_t>> succ(n);
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& [name, e] : ends)
    if (e.writer && e.reader && *e.writer != *e.reader &&
        succ[*e.writer].insert(*e.reader).second)
      ++indegree[*e.reader];

  std::vector<std::size_t> rank(n, n);
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.insert(i);
  std::size_t next = 0;
  while (!ready.empty()) {
    const std::size_t t = *ready.begin();
    ready.erase(ready.begin());
    rank[t] = next++;
    for (auto s : succ[t])
      if (--indegree[s] == 0) ready.insert(s);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (rank[i] == n) rank[i] = next++;
  return rank;
}

inline void append_merged(std::vector<Action>& program, const Action& a) {
  if (a.is<Compute>() && !program.empty() && program.back().is<Compute>()) {
    auto& last = std::get<Compute>(program.back().op);
    last.cycles = last.cycles + a.as<Compute>().cycles;
    return;
  }
  program.push_back(a);
}

}  // namespace fusion_detail

/// Fuses each mapping group into one sequential task. Channels between tasks
/// of the same group disappear (the hand-off is free); all other channels are
/// kept. Within a group, actions are ordered by a deadlock-free interleaving
/// of the whole application that always advances the most downstream task
/// able to run, so a consumer runs right after its producer hands it data.
/// Task k of the result is group k of the mapping.
inline AppGraph fuse_mapping(const AppGraph& app, const Mapping& mapping) {
  validate_app(app);
  check_partition(app, mapping);

  std::map<std::string, std::size_t> task_index;
  for (std::size_t i = 0; i < app.tasks.size(); ++i)
    task_index[app.tasks[i].name] = i;

  std::vector<std::size_t> group_of(app.tasks.size());
  bool all_singletons = true;
  for (std::size_t g = 0; g < mapping.groups.size(); ++g) {
    if (mapping.groups[g].size() > 1) all_singletons = false;
    for (const auto& t : mapping.groups[g]) group_of[task_index[t]] = g;
  }

  AppGraph out;
  out.name = app.name;
  if (all_singletons) {
    for (const auto& g : mapping.groups) out.tasks.push_back(*app.find_task(g[0]));
    out.channels = app.channels;
    return out;
  }

  const auto ends = channel_endpoints(app);
  auto internal = [&](const std::string& ch) {
    const auto& e = ends.at(ch);
    return e.writer && e.reader && group_of[*e.writer] == group_of[*e.reader];
  };

  std::map<std::string, std::size_t> channel_index;
  for (std::size_t c = 0; c < app.channels.size(); ++c)
    channel_index[app.channels[c].name] = c;
  std::vector<std::uint64_t> occupied(app.channels.size(), 0);

  const auto rank = fusion_detail::topological_rank(app, ends);
  std::vector<std::size_t> by_priority(app.tasks.size());
  std::iota(by_priority.begin(), by_priority.end(), std::size_t{0});
  std::sort(by_priority.begin(), by_priority.end(),
            [&](std::size_t a, std::size_t b) { return rank[a] > rank[b]; });

  std::vector<std::vector<Action>> traces(app.tasks.size());
  for (std::size_t i = 0; i < app.tasks.size(); ++i)
    traces[i] = flatten(app.tasks[i]);
  std::vector<std::size_t> pos(app.tasks.size(), 0);
  std::vector<std::vector<Action>> fused(mapping.groups.size());

  auto runnable = [&](std::size_t t) {
    if (pos[t] == traces[t].size()) return false;
    const Action& a = traces[t][pos[t]];
    if (a.is<Read>()) return occupied[channel_index[a.as<Read>().channel]] > 0;
    if (a.is<Write>()) {
      const auto c = channel_index[a.as<Write>().channel];
      return occupied[c] < app.channels[c].capacity;
    }
    return true;
  };

  for (;;) {
    std::optional<std::size_t> pick;
    for (auto t : by_priority)
      if (runnable(t)) {
        pick = t;
        break;
      }
    if (!pick) break;
    const std::size_t t = *pick;
    const Action& a = traces[t][pos[t]++];
    bool emit = true;
    if (a.is<Read>()) {
      --occupied[channel_index[a.as<Read>().channel]];
      emit = !internal(a.as<Read>().channel);
    } else if (a.is<Write>()) {
      ++occupied[channel_index[a.as<Write>().channel]];
      emit = !internal(a.as<Write>().channel);
    }
    if (emit && mapping.groups[group_of[t]].size() > 1)
      fusion_detail::append_merged(fused[group_of[t]], a);
  }

  std::vector<std::string> stuck;
  for (std::size_t t = 0; t < app.tasks.size(); ++t)
    if (pos[t] != traces[t].size()) stuck.push_back(app.tasks[t].name);
  if (!stuck.empty()) {
    std::string names;
    for (const auto& s : stuck) names += (names.empty() ? "" : ", ") + s;
    throw FusionCycle("mapping '" + mapping.str() +
                      "' admits no sequential order: tasks " + names +
                      " can never complete");
  }

  for (std::size_t g = 0; g < mapping.groups.size(); ++g) {
    const auto& members = mapping.groups[g];
    if (members.size() == 1) {
      out.tasks.push_back(*app.find_task(members[0]));
      continue;
    }
    TaskProgram p;
    for (std::size_t i = 0; i < members.size(); ++i)
      p.name += (i ? "+" : "") + members[i];
    p.actions = std::move(fused[g]);
    out.tasks.push_back(std::move(p));
  }
  for (const auto& c : app.channels)
    if (!internal(c.name)) out.channels.push_back(c);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

struct DesignMetrics {
  std::size_t design_id = 0;
  Design design;
  Timestamp exec_time;
  Energy energy;
  SimulationReport report;
};

namespace dse_detail {

inline DesignMetrics evaluate_fused(const AppGraph& fused, const Design& d,
                                    const PowerModel& model,
                                    std::size_t design_id) {
  try {
    if (d.clocks.size() != d.mapping.core_count())
      throw LengthMismatch("design has " +
                           std::to_string(d.mapping.core_count()) +
                           " cores but " + std::to_string(d.clocks.size()) +
                           " clocks");
    for (std::size_t k = 0; k < d.clocks.size(); ++k)
      if (!model.has(d.clocks[k]))
        throw UnknownFrequency("core " + std::to_string(k) + " clock " +
                               std::to_string(d.clocks[k].hz()) +
                               " Hz has no power entry");
    DesignMetrics m;
    m.design_id = design_id;
    m.design = d;
    m.report = simulate(fused, d.clocks);
    m.exec_time = m.report.total_time();
    m.energy = model.design_energy(m.report);
    return m;
  } catch (const Error& e) {
    throw DesignError(design_id, e.what(), std::current_exception());
  }
}

}  // namespace dse_detail

/// Fuses, simulates and prices one design. Failures are wrapped in
/// DesignError carrying `design_id` and the original exception.
inline DesignMetrics evaluate_design(const AppGraph& app, const Design& d,
                                     const PowerModel& model,
                                     std::size_t design_id = 0) {
  AppGraph fused;
  try {
    fused = fuse_mapping(app, d.mapping);
  } catch (const Error& e) {
    throw DesignError(design_id, e.what(), std::current_exception());
  }
  return dse_detail::evaluate_fused(fused, d, model, design_id);
}

/// Reference-model evaluation of a design (fusion + parallel DES).
inline SimulationReport simulate_parallel(const AppGraph& app, const Design& d,
                                          const OracleOptions& options = {}) {
  return simulate_parallel(fuse_mapping(app, d.mapping), d.clocks, options);
}

/// Evaluates every design; `jobs` workers share the list. Results come back
/// in input order. On failure, the DesignError of the lowest failing index is
/// rethrown, independent of `jobs`.
inline std::vector<DesignMetrics> sweep(const AppGraph& app,
                                        std::span<const Design> designs,
                                        const PowerModel& model,
                                        unsigned jobs = 1) {
  validate_app(app);
  // Fusion depends only on the mapping; most designs share one.
  std::map<std::string, std::size_t> mapping_slot;
  std::vector<Mapping> unique;
  for (const auto& d : designs)
    if (mapping_slot.emplace(d.mapping.str(), unique.size()).second)
      unique.push_back(d.mapping);

  std::vector<std::optional<AppGraph>> fused(unique.size());
  std::vector<std::exception_ptr> fuse_error(unique.size());
  for (std::size_t i = 0; i < unique.size(); ++i) {
    try {
      fused[i] = fuse_mapping(app, unique[i]);
    } catch (const Error&) {
      fuse_error[i] = std::current_exception();
    }
  }

  std::vector<std::optional<DesignMetrics>> results(designs.size());
  std::vector<std::exception_ptr> errors(designs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= designs.size()) return;
      const std::size_t slot = mapping_slot.at(designs[i].mapping.str());
      try {
        if (fuse_error[slot]) {
          try {
            std::rethrow_exception(fuse_error[slot]);
          } catch (const Error& e) {
            throw DesignError(i, e.what(), fuse_error[slot]);
          }
        }
        results[i] =
            dse_detail::evaluate_fused(*fused[slot], designs[i], model, i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  jobs = std::max(1u, jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  std::vector<DesignMetrics> out;
  out.reserve(designs.size());
  for (std::size_t i = 0; i < designs.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*results[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pareto front

/// Indices of the non-dominated points, minimizing both objectives. A point
/// is dominated when another is no worse on both axes and better on one.
/// Result is ordered by the first objective, then input order; exact
/// duplicates are all kept.
template <typename T, typename TimeFn, typename EnergyFn>
std::vector<std::size_t> pareto_front_indices(std::span<const T> points,
                                              TimeFn time, EnergyFn energy) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ta = time(points[a]);
    const auto& tb = time(points[b]);
    if (ta != tb) return ta < tb;
    return energy(points[a]) < energy(points[b]);
  });

  std::vector<std::size_t> front;
  std::optional<std::size_t> best;  // lowest-energy point with smaller time
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && time(points[order[j]]) == time(points[order[i]]))
      ++j;
    // Within one time value, only the minimum-energy points can survive.
    const auto& e_min = energy(points[order[i]]);
    if (!best || e_min < energy(points[*best])) {
      for (std::size_t k = i; k < j && energy(points[order[k]]) == e_min; ++k)
        front.push_back(order[k]);
      best = order[i];
    }
    i = j;
  }
  return front;
}

inline std::vector<DesignMetrics> pareto_front(
    std::span<const DesignMetrics> points) {
  const auto idx = pareto_front_indices(
      points, [](const DesignMetrics& m) -> const Timestamp& { return m.exec_time; },
      [](const DesignMetrics& m) -> const Energy& { return m.energy; });
  std::vector<DesignMetrics> out;
  for (auto i : idx) out.push_back(points[i]);
  return out;
}

inline std::vector<bool> pareto_flags(std::span<const DesignMetrics> points) {
  std::vector<bool> flags(points.size(), false);
  for (auto i : pareto_front_indices(
           points,
           [](const DesignMetrics& m) -> const Timestamp& { return m.exec_time; },
           [](const DesignMetrics& m) -> const Energy& { return m.energy; }))
    flags[i] = true;
  return flags;
}

// ---------------------------------------------------------------------------
// Sweep CSV

/// One sweep CSV row with every numeric column kept as its printed text, so
/// re-reading a CSV reproduces exactly what was written.
struct SweepRow {
  std::size_t design_id = 0;
  std::size_t n_cores = 0;
  std::string mapping;
  std::string clocks_mhz;  // comma separated
  std::string exec_time_ms;
  std::string energy_mj;
  bool on_pareto_front = false;
  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

inline constexpr const char* kSweepCsvHeader =
    "design_id,n_cores,mapping,clocks_mhz,exec_time_ms,energy_mj,"
    "on_pareto_front";

/// Hz as a decimal MHz string without trailing zeros (125000000 -> "125").
inline std::string format_mhz(Frequency f) {
  std::string s = format_decimal(Rational(BigInt(f.hz()), BigInt(1'000'000)), 6);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

inline std::vector<SweepRow> sweep_rows(std::span<const DesignMetrics> metrics) {
  const auto flags = pareto_flags(metrics);
  std::vector<SweepRow> rows;
  rows.reserve(metrics.size());
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const auto& m = metrics[i];
    SweepRow r;
    r.design_id = m.design_id;
    r.n_cores = m.design.mapping.core_count();
    r.mapping = m.design.mapping.str();
    for (std::size_t k = 0; k < m.design.clocks.size(); ++k)
      r.clocks_mhz += (k ? "," : "") + format_mhz(m.design.clocks[k]);
    r.exec_time_ms = m.exec_time.to_ms(3);
    r.energy_mj = m.energy.str(6);
    r.on_pareto_front = flags[i];
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace csv_detail {

inline std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace csv_detail

inline void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << kSweepCsvHeader << '\n';
  for (const auto& r : rows)
    os << r.design_id << ',' << r.n_cores << ',' << csv_detail::quote(r.mapping)
       << ',' << csv_detail::quote(r.clocks_mhz) << ',' << r.exec_time_ms << ','
       << r.energy_mj << ',' << (r.on_pareto_front ? 1 : 0) << '\n';
}

inline std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kSweepCsvHeader)
    throw SchemaError("sweep.csv:1", "unexpected header");
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = csv_detail::split_line(line);
    const std::string where = "sweep.csv:" + std::to_string(lineno);
    if (f.size() != 7) throw SchemaError(where, "expected 7 fields");
    try {
      SweepRow r;
      r.design_id = std::stoull(f[0]);
      r.n_cores = std::stoull(f[1]);
      r.mapping = f[2];
      r.clocks_mhz = f[3];
      r.exec_time_ms = f[4];
      r.energy_mj = f[5];
      if (f[6] != "0" && f[6] != "1")
        throw SchemaError(where, "on_pareto_front must be 0 or 1");
      r.on_pareto_front = f[6] == "1";
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw SchemaError(where, "malformed number");
    }
  }
  return rows;
}

}  // namespace mcemu
