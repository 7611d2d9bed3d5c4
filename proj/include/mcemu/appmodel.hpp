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
 * @file appmodel.hpp
 * @brief Deterministic task programs and application graphs.
 *
 * A task program is a tree of actions: declared compute costs, blocking
 * channel reads and writes, yields, and counted loops. Programs never branch
 * on data, so every run of an application executes the same action trace.
 */

#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mcemu/errors.hpp"
#include "mcemu/timebase.hpp"

namespace mcemu {

struct Action;

struct Compute {
  CycleCount cycles;
  friend bool operator==(const Compute&, const Compute&) = default;
};

struct Read {
  std::string channel;
  friend bool operator==(const Read&, const Read&) = default;
};

struct Write {
  std::string channel;
  friend bool operator==(const Write&, const Write&) = default;
};

struct Yield {
  friend bool operator==(const Yield&, const Yield&) = default;
};

struct Loop {
  std::uint64_t count = 1;
  std::vector<Action> body;
};

struct Action {
  std::variant<Compute, Read, Write, Yield, Loop> op;

  template <typename T>
  bool is() const noexcept {
    return std::holds_alternative<T>(op);
  }
  template <typename T>
  const T& as() const {
    return std::get<T>(op);
  }
};

bool operator==(const Action& a, const Action& b);

inline bool operator==(const Loop& a, const Loop& b) {
  return a.count == b.count && a.body == b.body;
}

inline bool operator==(const Action& a, const Action& b) { return a.op == b.op; }

inline Action compute(std::uint64_t cycles) { return {Compute{{cycles}}}; }
inline Action read(std::string channel) { return {Read{std::move(channel)}}; }
inline Action write(std::string channel) { return {Write{std::move(channel)}}; }
inline Action yield() { return {Yield{}}; }
inline Action loop(std::uint64_t count, std::vector<Action> body) {
  return {Loop{count, std::move(body)}};
}

struct TaskProgram {
  std::string name;
  std::vector<Action> actions;
  friend bool operator==(const TaskProgram&, const TaskProgram&) = default;
};

struct ChannelSpec {
  std::string name;
  std::uint64_t capacity = 1;
  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

struct AppGraph {
  std::string name;
  std::vector<TaskProgram> tasks;
  std::vector<ChannelSpec> channels;

  const TaskProgram* find_task(const std::string& task) const {
    for (const auto& t : tasks)
      if (t.name == task) return &t;
    return nullptr;
  }
  const ChannelSpec* find_channel(const std::string& channel) const {
    for (const auto& c : channels)
      if (c.name == channel) return &c;
    return nullptr;
  }

  friend bool operator==(const AppGraph&, const AppGraph&) = default;
};

// Visits every leaf action (Compute/Read/Write/Yield) in execution order,
// unrolling loops. Stops early when `fn` returns false.
template <typename Fn>
bool for_each_leaf(const std::vector<Action>& actions, Fn&& fn) {
  for (const auto& a : actions) {
    if (a.is<Loop>()) {
      const auto& l = a.as<Loop>();
      for (std::uint64_t i = 0; i < l.count; ++i)
        if (!for_each_leaf(l.body, fn)) return false;
    } else if (!fn(a)) {
      return false;
    }
  }
  return true;
}

inline std::vector<Action> flatten(const TaskProgram& program) {
  std::vector<Action> out;
  for_each_leaf(program.actions, [&](const Action& a) {
    out.push_back(a);
    return true;
  });
  return out;
}

/// Number of leaf actions after unrolling, saturating at UINT64_MAX.
inline std::uint64_t unrolled_length(const std::vector<Action>& actions) {
  constexpr auto kMax = UINT64_MAX;
  std::uint64_t total = 0;
  for (const auto& a : actions) {
    std::uint64_t n = 1;
    if (a.is<Loop>()) {
      const auto& l = a.as<Loop>();
      const std::uint64_t body = unrolled_length(l.body);
      n = (body != 0 && l.count > kMax / body) ? kMax : body * l.count;
    }
    total = (total > kMax - n) ? kMax : total + n;
  }
  return total;
}

/// Walks a program tree in declaration order without unrolling.
template <typename Fn>
void for_each_action(const std::vector<Action>& actions, Fn&& fn) {
  for (const auto& a : actions) {
    fn(a);
    if (a.is<Loop>()) for_each_action(a.as<Loop>().body, fn);
  }
}

struct ChannelEndpoints {
  std::optional<std::size_t> writer;
  std::optional<std::size_t> reader;
};

/// Resolves which task writes and which task reads each channel.
/// Throws UnknownChannel / MultipleReaders / MultipleWriters.
inline std::map<std::string, ChannelEndpoints> channel_endpoints(
    const AppGraph& app) {
  std::map<std::string, ChannelEndpoints> ends;
  for (const auto& c : app.channels) ends[c.name];
  for (std::size_t t = 0; t < app.tasks.size(); ++t) {
    const auto& task = app.tasks[t];
    for_each_action(task.actions, [&](const Action& a) {
      const std::string* ch = nullptr;
      bool is_read = false;
      if (a.is<Read>()) {
        ch = &a.as<Read>().channel;
        is_read = true;
      } else if (a.is<Write>()) {
        ch = &a.as<Write>().channel;
      }
      if (!ch) return;
      auto it = ends.find(*ch);
      if (it == ends.end())
        throw UnknownChannel("task '" + task.name +
                             "' references undeclared channel '" + *ch + "'");
      auto& slot = is_read ? it->second.reader : it->second.writer;
      if (slot && *slot != t) {
        const std::string other = app.tasks[*slot].name;
        if (is_read)
          throw MultipleReaders("channel '" + *ch + "' is read by both '" +
                                other + "' and '" + task.name + "'");
        throw MultipleWriters("channel '" + *ch + "' is written by both '" +
                              other + "' and '" + task.name + "'");
      }
      slot = t;
    });
  }
  return ends;
}

/// Structural checks every application must pass before simulation.
inline void validate_app(const AppGraph& app) {
  if (app.tasks.empty()) throw SchemaError("$.tasks", "no tasks declared");
  std::set<std::string> names;
  for (std::size_t i = 0; i < app.tasks.size(); ++i) {
    const auto& t = app.tasks[i];
    const std::string path = "$.tasks[" + std::to_string(i) + "]";
    if (t.name.empty()) throw SchemaError(path + ".name", "empty task name");
    if (!names.insert(t.name).second)
      throw SchemaError(path + ".name", "duplicate task name '" + t.name + "'");
    for_each_action(t.actions, [&](const Action& a) {
      if (!a.is<Loop>()) return;
      const auto& l = a.as<Loop>();
      if (l.count == 0)
        throw SchemaError(path, "loop count must be positive in '" + t.name +
                                    "'");
      if (l.body.empty())
        throw SchemaError(path, "empty loop body in '" + t.name + "'");
    });
  }
  std::set<std::string> channels;
  for (std::size_t i = 0; i < app.channels.size(); ++i) {
    const auto& c = app.channels[i];
    const std::string path = "$.channels[" + std::to_string(i) + "]";
    if (c.name.empty()) throw SchemaError(path + ".name", "empty channel name");
    if (!channels.insert(c.name).second)
      throw SchemaError(path + ".name",
                        "duplicate channel name '" + c.name + "'");
    if (c.capacity == 0)
      throw ZeroCapacity("channel '" + c.name + "' has zero capacity");
  }
  channel_endpoints(app);
}

// ---------------------------------------------------------------------------
// Builders

/// Linear pipeline: stage k loops `frames` times over
/// [Read(in_k)]? Compute(cycles_k) [Write(out_k)]?
inline AppGraph build_pipeline(const std::vector<std::string>& stage_names,
                               const std::vector<CycleCount>& per_stage_cycles,
                               std::uint64_t frames,
                               std::uint64_t capacity = 1) {
  if (stage_names.size() != per_stage_cycles.size())
    throw LengthMismatch("pipeline has " + std::to_string(stage_names.size()) +
                         " stage names but " +
                         std::to_string(per_stage_cycles.size()) +
                         " cycle costs");
  if (stage_names.empty()) throw LengthMismatch("pipeline needs >= 1 stage");
  if (frames == 0) throw SchemaError("$.pipeline.frames", "must be positive");
  if (capacity == 0) throw ZeroCapacity("pipeline channel capacity is zero");

  const std::size_t n = stage_names.size();
  AppGraph app;
  app.name = "pipeline";
  for (std::size_t k = 0; k + 1 < n; ++k)
    app.channels.push_back({stage_names[k] + "->" + stage_names[k + 1],
                            capacity});
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Action> body;
    if (k > 0) body.push_back(read(app.channels[k - 1].name));
    body.push_back(compute(per_stage_cycles[k].value));
    if (k + 1 < n) body.push_back(write(app.channels[k].name));
    app.tasks.push_back({stage_names[k], {loop(frames, std::move(body))}});
  }
  return app;
}

/// Dispatcher -> n_inner workers -> collector. Packets are dealt round-robin
/// and collected in the same order.
inline AppGraph build_packet_forwarding(std::uint64_t n_inner,
                                        std::uint64_t packets,
                                        CycleCount dispatch_cycles,
                                        CycleCount inner_cycles,
                                        CycleCount collect_cycles,
                                        std::uint64_t capacity = 1) {
  if (n_inner == 0)
    throw SchemaError("$.packet_forwarding.inner", "needs >= 1 inner core");
  if (capacity == 0) throw ZeroCapacity("packet channel capacity is zero");

  AppGraph app;
  app.name = "packet_forwarding";
  std::vector<std::string> to_inner, to_collect;
  for (std::uint64_t i = 0; i < n_inner; ++i) {
    const std::string inner = "inner" + std::to_string(i);
    to_inner.push_back("dispatch->" + inner);
    to_collect.push_back(inner + "->collect");
  }
  for (const auto& c : to_inner) app.channels.push_back({c, capacity});
  for (const auto& c : to_collect) app.channels.push_back({c, capacity});

  const std::uint64_t rounds = packets / n_inner;
  const std::uint64_t rest = packets % n_inner;

  TaskProgram dispatch{"dispatch", {}};
  TaskProgram collect{"collect", {}};
  std::vector<Action> dispatch_round, collect_round;
  for (std::uint64_t i = 0; i < n_inner; ++i) {
    dispatch_round.push_back(compute(dispatch_cycles.value));
    dispatch_round.push_back(write(to_inner[i]));
    collect_round.push_back(read(to_collect[i]));
    collect_round.push_back(compute(collect_cycles.value));
  }
  if (rounds > 0) {
    dispatch.actions.push_back(loop(rounds, dispatch_round));
    collect.actions.push_back(loop(rounds, collect_round));
  }
  for (std::uint64_t i = 0; i < rest; ++i) {
    dispatch.actions.push_back(compute(dispatch_cycles.value));
    dispatch.actions.push_back(write(to_inner[i]));
    collect.actions.push_back(read(to_collect[i]));
    collect.actions.push_back(compute(collect_cycles.value));
  }

  app.tasks.push_back(std::move(dispatch));
  for (std::uint64_t i = 0; i < n_inner; ++i) {
    TaskProgram inner{"inner" + std::to_string(i), {}};
    const std::uint64_t count = rounds + (i < rest ? 1 : 0);
    if (count > 0)
      inner.actions.push_back(loop(count, {read(to_inner[i]),
                                           compute(inner_cycles.value),
                                           write(to_collect[i])}));
    app.tasks.push_back(std::move(inner));
  }
  app.tasks.push_back(std::move(collect));
  return app;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

using json = nlohmann::json;

inline std::uint64_t json_uint(const json& j, const std::string& path) {
  if (!j.is_number_integer() ||
      (!j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    throw SchemaError(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

inline std::uint64_t json_positive(const json& j, const std::string& path) {
  const auto v = json_uint(j, path);
  if (v == 0) throw SchemaError(path, "expected a positive integer");
  return v;
}

inline std::string json_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

inline const json& json_field(const json& obj, const char* key,
                              const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end())
    throw SchemaError(path, std::string("missing field '") + key + "'");
  return *it;
}

inline std::vector<Action> parse_actions(const json& arr,
                                         const std::string& path);

inline Action parse_action(const json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() == "yield") return yield();
    throw SchemaError(path, "unknown action '" + j.get<std::string>() + "'");
  }
  if (!j.is_object() || j.empty())
    throw SchemaError(path, "expected an action object or \"yield\"");
  if (j.contains("loop")) {
    if (j.size() != 2 || !j.contains("body"))
      throw SchemaError(path, "loop needs exactly 'loop' and 'body'");
    const auto count = json_positive(j["loop"], path + ".loop");
    auto body = parse_actions(j["body"], path + ".body");
    if (body.empty()) throw SchemaError(path + ".body", "empty loop body");
    return loop(count, std::move(body));
  }
  if (j.size() != 1)
    throw SchemaError(path, "action object must have exactly one key");
  const auto& [key, value] = *j.items().begin();
  if (key == "compute") return compute(json_uint(value, path + ".compute"));
  if (key == "read") return read(json_string(value, path + ".read"));
  if (key == "write") return write(json_string(value, path + ".write"));
  throw SchemaError(path, "unknown action '" + key + "'");
}

inline std::vector<Action> parse_actions(const json& arr,
                                         const std::string& path) {
  if (!arr.is_array()) throw SchemaError(path, "expected an array");
  std::vector<Action> out;
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(parse_action(arr[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<CycleCount> parse_cycles(const json& arr,
                                            const std::string& path) {
  if (!arr.is_array()) throw SchemaError(path, "expected an array");
  std::vector<CycleCount> out;
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back({json_uint(arr[i], path + "[" + std::to_string(i) + "]")});
  return out;
}

inline std::uint64_t optional_capacity(const json& obj,
                                       const std::string& path) {
  if (!obj.contains("capacity")) return 1;
  const auto cap = json_uint(obj["capacity"], path + ".capacity");
  if (cap == 0) throw ZeroCapacity(path + ".capacity: capacity must be >= 1");
  return cap;
}

inline AppGraph parse_pipeline(const json& p) {
  const std::string path = "$.pipeline";
  const auto& stages = json_field(p, "stages", path);
  if (!stages.is_array() || stages.empty())
    throw SchemaError(path + ".stages", "expected a non-empty array");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < stages.size(); ++i)
    names.push_back(
        json_string(stages[i], path + ".stages[" + std::to_string(i) + "]"));
  auto cycles = parse_cycles(json_field(p, "cycles", path), path + ".cycles");
  const auto frames = json_positive(json_field(p, "frames", path),
                                    path + ".frames");
  return build_pipeline(names, cycles, frames, optional_capacity(p, path));
}

inline AppGraph parse_packet_forwarding(const json& p) {
  const std::string path = "$.packet_forwarding";
  auto field = [&](const char* key) {
    return json_uint(json_field(p, key, path), path + "." + key);
  };
  const auto inner = json_positive(json_field(p, "inner", path),
                                   path + ".inner");
  return build_packet_forwarding(inner, field("packets"),
                                 {field("dispatch_cycles")},
                                 {field("inner_cycles")},
                                 {field("collect_cycles")},
                                 optional_capacity(p, path));
}

inline json actions_to_json(const std::vector<Action>& actions) {
  json arr = json::array();
  for (const auto& a : actions) {
    std::visit(
        [&](const auto& op) {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, Compute>)
            arr.push_back({{"compute", op.cycles.value}});
          else if constexpr (std::is_same_v<T, Read>)
            arr.push_back({{"read", op.channel}});
          else if constexpr (std::is_same_v<T, Write>)
            arr.push_back({{"write", op.channel}});
          else if constexpr (std::is_same_v<T, Yield>)
            arr.push_back("yield");
          else
            arr.push_back({{"loop", op.count}, {"body", actions_to_json(op.body)}});
        },
        a.op);
  }
  return arr;
}

}  // namespace detail

/// Builds an application from a JSON document. Accepts the explicit
/// {"tasks", "channels"} form and the {"pipeline": {...}} and
/// {"packet_forwarding": {...}} builder shorthands. The result is validated.
inline AppGraph build_task_graph_from_config(const nlohmann::json& doc) {
  using detail::json_field;
  if (!doc.is_object()) throw SchemaError("$", "expected an object");

  AppGraph app;
  if (doc.contains("pipeline")) {
    app = detail::parse_pipeline(doc["pipeline"]);
  } else if (doc.contains("packet_forwarding")) {
    app = detail::parse_packet_forwarding(doc["packet_forwarding"]);
  } else {
    const auto& tasks = json_field(doc, "tasks", "$");
    if (!tasks.is_array()) throw SchemaError("$.tasks", "expected an array");
    if (tasks.empty()) throw SchemaError("$.tasks", "no tasks declared");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const std::string path = "$.tasks[" + std::to_string(i) + "]";
      TaskProgram t;
      t.name = detail::json_string(json_field(tasks[i], "name", path),
                                   path + ".name");
      t.actions = detail::parse_actions(json_field(tasks[i], "actions", path),
                                        path + ".actions");
      app.tasks.push_back(std::move(t));
    }
    if (doc.contains("channels")) {
      const auto& chans = doc["channels"];
      if (!chans.is_array())
        throw SchemaError("$.channels", "expected an array");
      for (std::size_t i = 0; i < chans.size(); ++i) {
        const std::string path = "$.channels[" + std::to_string(i) + "]";
        ChannelSpec c;
        c.name = detail::json_string(json_field(chans[i], "name", path),
                                     path + ".name");
        c.capacity = detail::optional_capacity(chans[i], path);
        app.channels.push_back(std::move(c));
      }
    }
  }
  if (doc.contains("name"))
    app.name = detail::json_string(doc["name"], "$.name");
  validate_app(app);
  return app;
}

inline nlohmann::json app_to_json(const AppGraph& app) {
  nlohmann::json doc;
  if (!app.name.empty()) doc["name"] = app.name;
  doc["tasks"] = nlohmann::json::array();
  for (const auto& t : app.tasks)
    doc["tasks"].push_back(
        {{"name", t.name}, {"actions", detail::actions_to_json(t.actions)}});
  doc["channels"] = nlohmann::json::array();
  for (const auto& c : app.channels)
    doc["channels"].push_back({{"name", c.name}, {"capacity", c.capacity}});
  return doc;
}

/// Parses JSON text, reporting syntax errors as SchemaError at "$".
inline nlohmann::json parse_json_text(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_json_text(text);
}

}  // namespace mcemu
