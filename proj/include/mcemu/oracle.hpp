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
 * @file oracle.hpp
 * @brief Reference parallel discrete-event simulation.
 *
 * Every core is a process with its own clock. A single global event queue,
 * ordered by simulated time, decides which process acts next, so channel
 * operations happen in true time order and channels need no timestamps:
 * when a read or write is processed at time T, everything that logically
 * precedes it has already been processed. This is deliberately a different
 * mechanism from the kernel's cooperative FIFO scheduling; agreement between
 * the two is what the tests check.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mcemu/appmodel.hpp"
#include "mcemu/errors.hpp"
#include "mcemu/kernel.hpp"
#include "mcemu/timebase.hpp"

namespace mcemu {

struct OracleOptions {
  // Break equal-time ties randomly instead of by core id.
  std::optional<std::uint64_t> shuffle_ties_seed;
};

namespace oracle_detail {

enum class Pending { ComputeUntil, AwaitData, AwaitSpace, Done };

struct Step {
  enum class Kind { Compute, Read, Write, Skip } kind;
  std::size_t channel = 0;
  Timestamp duration;
};

struct Process {
  std::vector<Step> steps;
  std::size_t next = 0;
  Timestamp clock;
  Timestamp busy;
  Timestamp idle;
  Pending pending = Pending::ComputeUntil;
  std::size_t waiting_channel = 0;
};

struct Fifo {
  std::string name;
  std::uint64_t capacity = 1;
  std::uint64_t occupied = 0;
  std::optional<std::size_t> writer;
  std::optional<std::size_t> reader;
};

struct Wakeup {
  Timestamp at;
  std::uint64_t tie;
  std::size_t process;
};

struct Later {
  bool operator()(const Wakeup& a, const Wakeup& b) const {
    if (a.at != b.at) return a.at > b.at;
    return a.tie > b.tie;
  }
};

}  // namespace oracle_detail

/// Simulates `app` with task i on its own core at `freqs[i]`, all cores truly
/// in parallel. Returns the same report shape as the kernel.
inline SimulationReport simulate_parallel(const AppGraph& app,
                                          std::span<const Frequency> freqs,
                                          const OracleOptions& options = {}) {
  using namespace oracle_detail;
  validate_app(app);
  if (freqs.size() != app.tasks.size())
    throw LengthMismatch("oracle needs one frequency per task");

  std::map<std::string, std::size_t> channel_index;
  std::vector<Fifo> fifos;
  for (const auto& c : app.channels) {
    channel_index[c.name] = fifos.size();
    fifos.push_back({c.name, c.capacity, 0, {}, {}});
  }

  std::vector<Process> procs(app.tasks.size());
  for (std::size_t p = 0; p < procs.size(); ++p) {
    for (const auto& a : flatten(app.tasks[p])) {
      Step s{Step::Kind::Skip, 0, {}};
      if (a.is<Compute>()) {
        s.kind = Step::Kind::Compute;
        s.duration = cycles_to_time(a.as<Compute>().cycles, freqs[p]);
      } else if (a.is<Read>()) {
        s.kind = Step::Kind::Read;
        s.channel = channel_index.at(a.as<Read>().channel);
        fifos[s.channel].reader = p;
      } else if (a.is<Write>()) {
        s.kind = Step::Kind::Write;
        s.channel = channel_index.at(a.as<Write>().channel);
        fifos[s.channel].writer = p;
      }
      procs[p].steps.push_back(std::move(s));
    }
  }

  std::mt19937_64 rng(options.shuffle_ties_seed.value_or(0));
  auto tie_for = [&](std::size_t p) -> std::uint64_t {
    return options.shuffle_ties_seed ? rng() : p;
  };

  std::priority_queue<Wakeup, std::vector<Wakeup>, Later> queue;
  for (std::size_t p = 0; p < procs.size(); ++p)
    queue.push({Timestamp{}, tie_for(p), p});

  auto wake = [&](std::optional<std::size_t> who, Pending expected,
                  std::size_t channel, const Timestamp& now) {
    if (!who) return;
    auto& w = procs[*who];
    if (w.pending != expected || w.waiting_channel != channel) return;
    w.pending = Pending::ComputeUntil;
    queue.push({now, tie_for(*who), *who});
  };

  while (!queue.empty()) {
    const Wakeup ev = queue.top();
    queue.pop();
    auto& proc = procs[ev.process];
    const Timestamp now = ev.at;
    // Any gap between the process clock and the wake-up was spent waiting.
    if (now > proc.clock) {
      proc.idle += now.since(proc.clock);
      proc.clock = now;
    }

    bool parked = false;
    while (!parked && proc.next < proc.steps.size()) {
      const Step& s = proc.steps[proc.next];
      switch (s.kind) {
        case Step::Kind::Skip:
          ++proc.next;
          break;
        case Step::Kind::Compute:
          proc.busy += s.duration;
          proc.clock += s.duration;
          ++proc.next;
          proc.pending = Pending::ComputeUntil;
          queue.push({proc.clock, tie_for(ev.process), ev.process});
          parked = true;
          break;
        case Step::Kind::Read: {
          auto& fifo = fifos[s.channel];
          if (fifo.occupied == 0) {
            proc.pending = Pending::AwaitData;
            proc.waiting_channel = s.channel;
            parked = true;
            break;
          }
          --fifo.occupied;
          ++proc.next;
          wake(fifo.writer, Pending::AwaitSpace, s.channel, proc.clock);
          break;
        }
        case Step::Kind::Write: {
          auto& fifo = fifos[s.channel];
          if (fifo.occupied == fifo.capacity) {
            proc.pending = Pending::AwaitSpace;
            proc.waiting_channel = s.channel;
            parked = true;
            break;
          }
          ++fifo.occupied;
          ++proc.next;
          wake(fifo.reader, Pending::AwaitData, s.channel, proc.clock);
          break;
        }
      }
    }
    if (!parked) proc.pending = Pending::Done;
  }

  std::vector<BlockedTask> blocked;
  for (std::size_t p = 0; p < procs.size(); ++p) {
    const auto& proc = procs[p];
    if (proc.pending == Pending::Done) continue;
    const auto& fifo = fifos[proc.waiting_channel];
    const bool data = proc.pending == Pending::AwaitData;
    const auto other = data ? fifo.writer : fifo.reader;
    blocked.push_back({app.tasks[p].name, p,
                       "'" + fifo.name + (data ? "' data" : "' space"),
                       other ? app.tasks[*other].name : ""});
  }
  if (!blocked.empty()) throw Deadlock(std::move(blocked));

  SimulationReport report;
  for (std::size_t p = 0; p < procs.size(); ++p)
    report.cores.push_back({p, app.tasks[p].name, freqs[p], procs[p].clock,
                            procs[p].busy, procs[p].idle});
  return report;
}

}  // namespace mcemu
