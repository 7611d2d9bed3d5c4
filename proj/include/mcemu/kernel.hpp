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
 * @file kernel.hpp
 * @brief Multicore emulation kernel.
 *
 * Emulated cores are time-multiplexed on the calling thread. The kernel keeps
 * a FIFO ready queue of tasks (one task per core) and runs the head task until
 * it blocks on a channel, yields, or terminates. Each core carries its own
 * logical time, advanced by the declared cycle cost of its computations at
 * its own frequency. Whenever a core resumes after waiting on another core,
 * its logical time is raised to the notifier's time and the jump is booked as
 * idle time.
 *
 * Channels are bounded FIFOs. Each queued item remembers when it was written
 * and each free slot remembers when it was freed, so a non-blocking read or
 * write still cannot complete before the data (or the space) exists.
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mcemu/appmodel.hpp"
#include "mcemu/errors.hpp"
#include "mcemu/timebase.hpp"

namespace mcemu {

using CoreId = std::size_t;
using TaskId = std::size_t;
using ChannelId = std::size_t;
using EventId = std::size_t;
using Token = std::uint64_t;

enum class CoreState { Ready, Running, Blocked, Terminated };

struct EmulatedCore {
  CoreId id = 0;
  Frequency frequency{1};
  Timestamp logical_time;
  Timestamp busy_time;
  Timestamp idle_time;
  CoreState state = CoreState::Ready;
  std::optional<TaskId> task;
};

struct CoreReport {
  CoreId core_id = 0;
  std::string task;
  Frequency frequency{1};
  Timestamp logical_time;
  Timestamp busy_time;
  Timestamp idle_time;

  /// busy / logical_time; 0 for a core that never advanced.
  Rational busy_ratio() const {
    if (logical_time.is_zero()) return Rational(0);
    return busy_time.seconds() / logical_time.seconds();
  }

  friend bool operator==(const CoreReport&, const CoreReport&) = default;
};

struct SimulationReport {
  std::vector<CoreReport> cores;

  /// Application execution time: the latest final logical time of any core.
  Timestamp total_time() const {
    Timestamp t;
    for (const auto& c : cores) t = later_of(t, c.logical_time);
    return t;
  }

  const CoreReport* find_task(const std::string& task) const {
    for (const auto& c : cores)
      if (c.task == task) return &c;
    return nullptr;
  }

  friend bool operator==(const SimulationReport&,
                         const SimulationReport&) = default;
};

inline constexpr const char* kReportCsvHeader =
    "core_id,freq_hz,lt_num,lt_den,lt_ms,busy_ms,idle_ms,busy_ratio";

inline void write_report_csv(std::ostream& os, const SimulationReport& r) {
  os << kReportCsvHeader << '\n';
  for (const auto& c : r.cores) {
    os << c.core_id << ',' << c.frequency.hz() << ','
       << c.logical_time.numerator() << ',' << c.logical_time.denominator()
       << ',' << c.logical_time.to_ms() << ',' << c.busy_time.to_ms() << ','
       << c.idle_time.to_ms() << ',' << format_decimal(c.busy_ratio(), 6)
       << '\n';
  }
}

inline std::string report_csv(const SimulationReport& r) {
  std::ostringstream os;
  write_report_csv(os, r);
  return os.str();
}

class Kernel {
 public:
  struct ChannelView {
    std::string name;
    std::uint64_t capacity = 0;
    std::vector<std::pair<Token, Timestamp>> items;  // front first
    std::vector<Timestamp> free_slot_ts;             // front first
    EventId ev_read = 0;
    EventId ev_write = 0;
  };

  using TransferObserver = std::function<void(ChannelId, Token, TaskId)>;

  CoreId create_core(Frequency frequency) {
    require_not_started("create_core");
    EmulatedCore c;
    c.id = cores_.size();
    c.frequency = frequency;
    cores_.push_back(std::move(c));
    return cores_.back().id;
  }

  TaskId create_task(CoreId core, TaskProgram program) {
    require_not_started("create_task");
    auto& c = core_at(core);
    if (c.task)
      throw SecondTaskOnCore("core " + std::to_string(core) +
                             " already hosts task '" +
                             tasks_[*c.task].program.name + "'");
    Task t;
    t.id = tasks_.size();
    t.core = core;
    t.program = std::move(program);
    tasks_.push_back(std::move(t));
    c.task = tasks_.back().id;
    c.state = CoreState::Ready;
    ready_.push_back(tasks_.back().id);
    return tasks_.back().id;
  }

  ChannelId create_channel(std::uint64_t capacity, std::string name = {}) {
    require_not_started("create_channel");
    if (capacity == 0)
      throw ZeroCapacity("channel '" + name + "' has zero capacity");
    Channel ch;
    ch.id = channels_.size();
    ch.name = name.empty() ? "ch" + std::to_string(ch.id) : std::move(name);
    ch.capacity = capacity;
    ch.free_slot_ts.assign(capacity, Timestamp{});
    ch.ev_read = create_event("'" + ch.name + "' ev_read (space)");
    ch.ev_write = create_event("'" + ch.name + "' ev_write (data)");
    channels_.push_back(std::move(ch));
    return channels_.back().id;
  }

  EventId create_event(std::string label = {}) {
    Event e;
    e.label = label.empty() ? "event " + std::to_string(events_.size())
                            : std::move(label);
    events_.push_back(std::move(e));
    return events_.size() - 1;
  }

  std::optional<ChannelId> find_channel(const std::string& name) const {
    for (const auto& ch : channels_)
      if (ch.name == name) return ch.id;
    return std::nullopt;
  }

  /// Wakes every current waiter of `event`, in waiting order. Each waiter's
  /// logical time is raised to `notifier_time` and it joins the ready queue.
  void notify(EventId event, const Timestamp& notifier_time) {
    auto waiters = std::move(event_at(event).waiters);
    event_at(event).waiters.clear();
    for (TaskId id : waiters) {
      auto& t = tasks_[id];
      t.blocked_on.reset();
      update_logical_time(t.core, notifier_time);
      cores_[t.core].state = CoreState::Ready;
      ready_.push_back(id);
    }
  }

  /// Blocks `task` on `event` until the next notify. Events keep no memory of
  /// earlier notifications.
  void wait(TaskId task, EventId event) {
    auto& t = task_at(task);
    auto& core = cores_[t.core];
    if (core.state == CoreState::Blocked || core.state == CoreState::Terminated)
      throw UsageError("task '" + t.program.name + "' cannot wait: not active");
    remove_from_ready(task);
    core.state = CoreState::Blocked;
    t.blocked_on = event;
    event_at(event).waiters.push_back(task);
  }

  /// Raises the core's logical time to `new_time` (never lowers it); the gap
  /// is idle time.
  void update_logical_time(CoreId core, const Timestamp& new_time) {
    auto& c = core_at(core);
    if (new_time > c.logical_time) {
      c.idle_time += new_time.since(c.logical_time);
      c.logical_time = new_time;
    }
  }

  void consume_cycles(TaskId task, CycleCount cycles) {
    const auto& t = task_at(task);
    book_busy(t.core, cycles_to_time(cycles, cores_[t.core].frequency));
  }

  /// Dequeues the front item, or blocks the task on the channel's ev_write
  /// and returns nullopt when the channel is empty.
  std::optional<Token> channel_read(TaskId task, ChannelId channel) {
    auto& t = task_at(task);
    auto& ch = channel_at(channel);
    if (ch.items.empty()) {
      wait(task, ch.ev_write);
      return std::nullopt;
    }
    auto [token, written_at] = std::move(ch.items.front());
    ch.items.pop_front();
    update_logical_time(t.core, written_at);
    const Timestamp& now = cores_[t.core].logical_time;
    ch.free_slot_ts.push_back(now);
    if (observer_) observer_(channel, token, task);
    notify(ch.ev_read, now);
    return token;
  }

  /// Enqueues `token`, or blocks the task on the channel's ev_read and
  /// returns false when the channel is full.
  bool channel_write(TaskId task, ChannelId channel, Token token) {
    auto& t = task_at(task);
    auto& ch = channel_at(channel);
    if (ch.free_slot_ts.empty()) {
      wait(task, ch.ev_read);
      return false;
    }
    update_logical_time(t.core, ch.free_slot_ts.front());
    ch.free_slot_ts.pop_front();
    const Timestamp& now = cores_[t.core].logical_time;
    ch.items.emplace_back(token, now);
    notify(ch.ev_write, now);
    return true;
  }

  /// Moves the task to the tail of the ready queue.
  void yield_priority(TaskId task) {
    auto& t = task_at(task);
    auto& core = cores_[t.core];
    if (core.state == CoreState::Blocked || core.state == CoreState::Terminated)
      throw UsageError("task '" + t.program.name + "' cannot yield: not active");
    remove_from_ready(task);
    core.state = CoreState::Ready;
    ready_.push_back(task);
  }

  /// Minimum logical time over cores that have not terminated (over all cores
  /// once everything has terminated).
  Timestamp min_sim_time() const {
    const Timestamp* best = nullptr;
    for (const auto& c : cores_)
      if (c.state != CoreState::Terminated &&
          (!best || c.logical_time < *best))
        best = &c.logical_time;
    if (!best)
      for (const auto& c : cores_)
        if (!best || c.logical_time < *best) best = &c.logical_time;
    return best ? *best : Timestamp{};
  }

  /// Runs every task to completion. Throws Deadlock when tasks remain blocked
  /// with nothing left to run, DanglingChannel when a program names a channel
  /// that was never created.
  SimulationReport run() {
    require_not_started("run");
    started_ = true;
    if (tasks_.empty()) throw UsageError("run() needs at least one task");
    for (auto& t : tasks_) compile(t);
    for (auto& c : cores_)
      if (!c.task) c.state = CoreState::Terminated;

    while (!ready_.empty()) {
      const TaskId id = ready_.front();
      ready_.pop_front();
      cores_[tasks_[id].core].state = CoreState::Running;
      dispatch(tasks_[id]);
    }

    std::vector<BlockedTask> blocked;
    for (const auto& t : tasks_) {
      if (cores_[t.core].state == CoreState::Terminated) continue;
      BlockedTask b;
      b.task = t.program.name;
      b.core = t.core;
      if (t.blocked_on) {
        const auto& e = events_[*t.blocked_on];
        b.waiting_on = e.label;
        if (e.notifier) b.waiting_for = tasks_[*e.notifier].program.name;
      }
      blocked.push_back(std::move(b));
    }
    if (!blocked.empty()) throw Deadlock(std::move(blocked));

    SimulationReport report;
    for (const auto& c : cores_)
      report.cores.push_back({c.id, c.task ? tasks_[*c.task].program.name : "",
                              c.frequency, c.logical_time, c.busy_time,
                              c.idle_time});
    return report;
  }

  const EmulatedCore& core(CoreId id) const { return cores_.at(id); }
  std::size_t core_count() const noexcept { return cores_.size(); }

  std::vector<TaskId> ready_queue() const {
    return {ready_.begin(), ready_.end()};
  }

  std::optional<EventId> blocked_on(TaskId task) const {
    return tasks_.at(task).blocked_on;
  }

  ChannelView channel(ChannelId id) const {
    const auto& ch = channels_.at(id);
    return {ch.name,
            ch.capacity,
            {ch.items.begin(), ch.items.end()},
            {ch.free_slot_ts.begin(), ch.free_slot_ts.end()},
            ch.ev_read,
            ch.ev_write};
  }

  /// Called on every successful channel read with (channel, token, reader).
  void set_transfer_observer(TransferObserver observer) {
    observer_ = std::move(observer);
  }

 private:
  // Programs are lowered to a flat instruction list; loops become a
  // begin/end pair with a per-task counter stack.
  struct Op {
    enum class Kind : std::uint8_t {
      Compute,
      Read,
      Write,
      Yield,
      LoopBegin,
      LoopEnd
    };
    Kind kind;
    std::uint64_t arg = 0;   // channel id or loop count
    std::size_t jump = 0;    // matching LoopEnd / LoopBegin
    Timestamp duration;      // Compute only
  };

  struct Task {
    TaskId id = 0;
    CoreId core = 0;
    TaskProgram program;
    std::vector<Op> code;
    std::size_t pc = 0;
    std::vector<std::uint64_t> loop_remaining;
    std::optional<EventId> blocked_on;
  };

  struct Event {
    std::string label;
    std::vector<TaskId> waiters;
    std::optional<TaskId> notifier;  // the task expected to notify, if known
  };

  struct Channel {
    ChannelId id = 0;
    std::string name;
    std::uint64_t capacity = 1;
    std::deque<std::pair<Token, Timestamp>> items;
    std::deque<Timestamp> free_slot_ts;
    EventId ev_read = 0;
    EventId ev_write = 0;
    Token next_token = 0;
  };

  void require_not_started(const char* what) const {
    if (started_)
      throw UsageError(std::string(what) + "() after the simulation started");
  }

  EmulatedCore& core_at(CoreId id) {
    if (id >= cores_.size())
      throw UsageError("unknown core " + std::to_string(id));
    return cores_[id];
  }
  Task& task_at(TaskId id) {
    if (id >= tasks_.size())
      throw UsageError("unknown task " + std::to_string(id));
    return tasks_[id];
  }
  Channel& channel_at(ChannelId id) {
    if (id >= channels_.size())
      throw UsageError("unknown channel " + std::to_string(id));
    return channels_[id];
  }
  Event& event_at(EventId id) {
    if (id >= events_.size())
      throw UsageError("unknown event " + std::to_string(id));
    return events_[id];
  }

  void remove_from_ready(TaskId task) {
    ready_.erase(std::remove(ready_.begin(), ready_.end(), task), ready_.end());
  }

  void book_busy(CoreId core, const Timestamp& d) {
    auto& c = cores_[core];
    c.logical_time += d;
    c.busy_time += d;
  }

  void compile(Task& t) {
    const Frequency f = cores_[t.core].frequency;
    auto resolve = [&](const std::string& name) -> ChannelId {
      auto id = find_channel(name);
      if (!id)
        throw DanglingChannel("task '" + t.program.name +
                              "' references unknown channel '" + name + "'");
      return *id;
    };
    std::function<void(const std::vector<Action>&)> lower =
        [&](const std::vector<Action>& actions) {
          for (const auto& a : actions) {
            if (a.is<Compute>()) {
              t.code.push_back({Op::Kind::Compute, 0, 0,
                                cycles_to_time(a.as<Compute>().cycles, f)});
            } else if (a.is<Read>()) {
              const auto ch = resolve(a.as<Read>().channel);
              events_[channels_[ch].ev_read].notifier = t.id;
              t.code.push_back({Op::Kind::Read, ch, 0, {}});
            } else if (a.is<Write>()) {
              const auto ch = resolve(a.as<Write>().channel);
              events_[channels_[ch].ev_write].notifier = t.id;
              t.code.push_back({Op::Kind::Write, ch, 0, {}});
            } else if (a.is<Yield>()) {
              t.code.push_back({Op::Kind::Yield, 0, 0, {}});
            } else {
              const auto& l = a.as<Loop>();
              if (l.count == 0 || l.body.empty()) continue;
              const std::size_t begin = t.code.size();
              t.code.push_back({Op::Kind::LoopBegin, l.count, 0, {}});
              lower(l.body);
              t.code.push_back({Op::Kind::LoopEnd, 0, begin, {}});
              t.code[begin].jump = t.code.size() - 1;
            }
          }
        };
    lower(t.program.actions);
  }

  // Runs `t` until it blocks, yields or terminates.
  void dispatch(Task& t) {
    for (;;) {
      if (t.pc == t.code.size()) {
        cores_[t.core].state = CoreState::Terminated;
        return;
      }
      const Op& op = t.code[t.pc];
      switch (op.kind) {
        case Op::Kind::Compute:
          book_busy(t.core, op.duration);
          ++t.pc;
          break;
        case Op::Kind::Read:
          if (!channel_read(t.id, op.arg)) return;
          ++t.pc;
          break;
        case Op::Kind::Write: {
          auto& ch = channels_[op.arg];
          if (!channel_write(t.id, op.arg, ch.next_token)) return;
          ++ch.next_token;
          ++t.pc;
          break;
        }
        case Op::Kind::Yield:
          ++t.pc;
          yield_priority(t.id);
          return;
        case Op::Kind::LoopBegin:
          t.loop_remaining.push_back(op.arg);
          ++t.pc;
          break;
        case Op::Kind::LoopEnd:
          if (--t.loop_remaining.back() > 0) {
            t.pc = op.jump + 1;
          } else {
            t.loop_remaining.pop_back();
            ++t.pc;
          }
          break;
      }
    }
  }

  std::vector<EmulatedCore> cores_;
  std::vector<Task> tasks_;
  std::vector<Channel> channels_;
  std::vector<Event> events_;
  std::deque<TaskId> ready_;
  TransferObserver observer_;
  bool started_ = false;
};

/// Runs `app` with task i on core i at `freqs[i]`. `schedule_order`, when
/// given, is the order in which tasks enter the initial ready queue.
inline SimulationReport simulate(const AppGraph& app,
                                 std::span<const Frequency> freqs,
                                 std::span<const std::size_t> schedule_order = {}) {
  validate_app(app);
  if (freqs.size() != app.tasks.size())
    throw LengthMismatch("application has " + std::to_string(app.tasks.size()) +
                         " tasks but " + std::to_string(freqs.size()) +
                         " core frequencies were given");
  Kernel k;
  for (const auto& f : freqs) k.create_core(f);
  for (const auto& c : app.channels) k.create_channel(c.capacity, c.name);
  if (schedule_order.empty()) {
    for (std::size_t i = 0; i < app.tasks.size(); ++i)
      k.create_task(i, app.tasks[i]);
  } else {
    if (schedule_order.size() != app.tasks.size())
      throw LengthMismatch("schedule order must list every task once");
    for (std::size_t i : schedule_order) k.create_task(i, app.tasks.at(i));
  }
  return k.run();
}

}  // namespace mcemu
