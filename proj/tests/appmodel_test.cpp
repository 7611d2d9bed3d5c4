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
#include <string>

#include "mcemu/appmodel.hpp"
#include "mcemu/errors.hpp"
#include "mcemu/kernel.hpp"
#include "support/random_apps.hpp"

namespace mcemu {
namespace {

using nlohmann::json;

TEST(BuildPipeline, JpegShape) {
  const auto app = build_pipeline({"Read", "DCT", "Quant", "ZigZag", "Huff"},
                                  {{10}, {20}, {30}, {40}, {50}}, 4, 1);
  ASSERT_EQ(app.tasks.size(), 5u);
  ASSERT_EQ(app.channels.size(), 4u);
  EXPECT_EQ(app.channels[0].name, "Read->DCT");
  EXPECT_EQ(app.channels[3].name, "ZigZag->Huff");
  EXPECT_EQ(app.tasks[0].actions,
            (std::vector<Action>{loop(4, {compute(10), write("Read->DCT")})}));
  EXPECT_EQ(app.tasks[2].actions,
            (std::vector<Action>{loop(4, {read("DCT->Quant"), compute(30),
                                          write("Quant->ZigZag")})}));
  EXPECT_EQ(app.tasks[4].actions,
            (std::vector<Action>{loop(4, {read("ZigZag->Huff"), compute(50)})}));
  EXPECT_NO_THROW(validate_app(app));
}

TEST(BuildPipeline, SingleStage) {
  const auto app = build_pipeline({"only"}, {{5}}, 3);
  EXPECT_EQ(app.tasks.size(), 1u);
  EXPECT_TRUE(app.channels.empty());
  const auto r = simulate(app, std::vector<Frequency>{Frequency(5)});
  EXPECT_EQ(r.cores[0].logical_time, Timestamp::from_seconds(3));
}

TEST(BuildPipeline, Errors) {
  EXPECT_THROW(build_pipeline({"a", "b"}, {{1}}, 1), LengthMismatch);
  EXPECT_THROW(build_pipeline({}, {}, 1), LengthMismatch);
  EXPECT_THROW(build_pipeline({"a"}, {{1}}, 0), SchemaError);
  EXPECT_THROW(build_pipeline({"a", "b"}, {{1}, {1}}, 1, 0), ZeroCapacity);
}

TEST(BuildPipeline, IsPure) {
  const auto a = build_pipeline({"x", "y", "z"}, {{1}, {2}, {3}}, 7, 2);
  const auto b = build_pipeline({"x", "y", "z"}, {{1}, {2}, {3}}, 7, 2);
  EXPECT_EQ(app_to_json(a), app_to_json(b));
}

// Two stages, one frame: the writer computes then writes, the reader blocks
// until the item arrives and then computes.
TEST(BuildPipeline, TwoStageTrace) {
  const auto app = build_pipeline({"P", "C"}, {{300}, {100}}, 1);
  const auto r = simulate(app, std::vector<Frequency>{Frequency(100), Frequency(50)});
  EXPECT_EQ(r.cores[0].logical_time, testing::seconds(3));
  EXPECT_EQ(r.cores[1].idle_time, testing::seconds(3));
  EXPECT_EQ(r.cores[1].busy_time, testing::seconds(2));
  EXPECT_EQ(r.cores[1].logical_time, testing::seconds(5));
}

TEST(BuildPacketForwarding, Topology) {
  const auto app = build_packet_forwarding(3, 7, {1}, {2}, {3});
  ASSERT_EQ(app.tasks.size(), 5u);
  EXPECT_EQ(app.tasks.front().name, "dispatch");
  EXPECT_EQ(app.tasks.back().name, "collect");
  EXPECT_EQ(app.channels.size(), 6u);
  EXPECT_NO_THROW(validate_app(app));
  // 7 packets over 3 inner cores: 3, 2, 2.
  EXPECT_EQ(unrolled_length(app.tasks[1].actions), 9u);
  EXPECT_EQ(unrolled_length(app.tasks[2].actions), 6u);
  EXPECT_EQ(unrolled_length(app.tasks[3].actions), 6u);
}

TEST(BuildPacketForwarding, SingleInnerMatchesThreeStagePipeline) {
  const auto pf = build_packet_forwarding(1, 9, {40}, {70}, {25});
  const auto pl = build_pipeline({"a", "b", "c"}, {{40}, {70}, {25}}, 9);
  const std::vector<Frequency> f{Frequency::megahertz(25), Frequency::megahertz(90),
                                 Frequency::megahertz(45)};
  const auto r1 = simulate(pf, f), r2 = simulate(pl, f);
  ASSERT_EQ(r1.cores.size(), r2.cores.size());
  for (std::size_t i = 0; i < r1.cores.size(); ++i) {
    EXPECT_EQ(r1.cores[i].logical_time, r2.cores[i].logical_time);
    EXPECT_EQ(r1.cores[i].busy_time, r2.cores[i].busy_time);
    EXPECT_EQ(r1.cores[i].idle_time, r2.cores[i].idle_time);
  }
}

TEST(BuildPacketForwarding, EqualCostsGiveEqualInnerBusyTime) {
  const auto app = build_packet_forwarding(8, 64, {10}, {500}, {10});
  const auto r = simulate(app, std::vector<Frequency>(10, Frequency::megahertz(60)));
  for (std::size_t i = 2; i <= 8; ++i)
    EXPECT_EQ(r.cores[i].busy_time, r.cores[1].busy_time);
}

TEST(BuildPacketForwarding, NoPackets) {
  const auto app = build_packet_forwarding(2, 0, {10}, {10}, {10});
  const auto r = simulate(app, std::vector<Frequency>(4, Frequency(10)));
  for (const auto& c : r.cores) EXPECT_TRUE(c.logical_time.is_zero());
}

TEST(Flatten, UnrollsLoops) {
  const TaskProgram p{"t", {compute(1), loop(2, {read("a"), loop(2, {yield()})})}};
  const auto flat = flatten(p);
  EXPECT_EQ(flat.size(), 7u);
  EXPECT_EQ(unrolled_length(p.actions), 7u);
  EXPECT_TRUE(flat[1].is<Read>());
  EXPECT_TRUE(flat[6].is<Yield>());
}

TEST(Validate, Errors) {
  AppGraph app;
  EXPECT_THROW(validate_app(app), SchemaError);

  app.tasks = {{"a", {write("c")}}, {"b", {read("c")}}};
  EXPECT_THROW(validate_app(app), UnknownChannel);

  app.channels = {{"c", 1}};
  EXPECT_NO_THROW(validate_app(app));

  auto two_readers = app;
  two_readers.tasks.push_back({"d", {read("c")}});
  EXPECT_THROW(validate_app(two_readers), MultipleReaders);

  auto two_writers = app;
  two_writers.tasks.push_back({"d", {write("c")}});
  EXPECT_THROW(validate_app(two_writers), MultipleWriters);

  auto dup = app;
  dup.tasks[1].name = "a";
  EXPECT_THROW(validate_app(dup), SchemaError);

  auto zero = app;
  zero.channels[0].capacity = 0;
  EXPECT_THROW(validate_app(zero), ZeroCapacity);

  auto bad_loop = app;
  bad_loop.tasks[0].actions = {loop(0, {write("c")})};
  EXPECT_THROW(validate_app(bad_loop), SchemaError);
}

TEST(Config, ExplicitForm) {
  const auto doc = json::parse(R"({
    "name": "demo",
    "channels": [{"name": "c", "capacity": 2}],
    "tasks": [
      {"name": "p", "actions": [{"loop": 3, "body": [{"compute": 5}, {"write": "c"}]}, "yield"]},
      {"name": "q", "actions": [{"loop": 3, "body": [{"read": "c"}]}]}
    ]})");
  const auto app = build_task_graph_from_config(doc);
  EXPECT_EQ(app.name, "demo");
  EXPECT_EQ(app.channels[0].capacity, 2u);
  EXPECT_EQ(app.tasks[0].actions,
            (std::vector<Action>{loop(3, {compute(5), write("c")}), yield()}));
  EXPECT_EQ(build_task_graph_from_config(app_to_json(app)).tasks[1].actions,
            app.tasks[1].actions);
}

TEST(Config, CapacityDefaultsToOne) {
  const auto app = build_task_graph_from_config(json::parse(
      R"({"channels":[{"name":"c"}],"tasks":[{"name":"a","actions":[{"write":"c"}]}]})"));
  EXPECT_EQ(app.channels[0].capacity, 1u);
}

TEST(Config, Mp3ShapedGraph) {
  const std::vector<std::string> names{"isrPulser", "isr", "audiosal",
                                       "mixerctrl", "dspaudio"};
  json doc;
  doc["channels"] = json::array();
  doc["tasks"] = json::array();
  for (std::size_t i = 0; i + 1 < names.size(); ++i)
    doc["channels"].push_back({{"name", "c" + std::to_string(i)}, {"capacity", 1}});
  for (std::size_t i = 0; i < names.size(); ++i) {
    json body = json::array();
    if (i > 0) body.push_back({{"read", "c" + std::to_string(i - 1)}});
    body.push_back({{"compute", 1000 * (i + 1)}});
    if (i + 1 < names.size()) body.push_back({{"write", "c" + std::to_string(i)}});
    doc["tasks"].push_back({{"name", names[i]},
                            {"actions", json::array({{{"loop", 10}, {"body", body}}})}});
  }
  const auto app = build_task_graph_from_config(doc);
  EXPECT_EQ(app.tasks.size(), 5u);
  const std::vector<Frequency> f{Frequency::megahertz(60), Frequency::megahertz(90),
                                 Frequency::megahertz(25), Frequency::megahertz(45),
                                 Frequency::megahertz(55)};
  EXPECT_NO_THROW(simulate(app, f));
}

TEST(Config, Shorthands) {
  const auto pl = build_task_graph_from_config(json::parse(
      R"({"pipeline":{"stages":["a","b"],"cycles":[1,2],"frames":3,"capacity":2}})"));
  EXPECT_EQ(app_to_json(pl),
            app_to_json(build_pipeline({"a", "b"}, {{1}, {2}}, 3, 2)));
  const auto pf = build_task_graph_from_config(json::parse(
      R"({"packet_forwarding":{"inner":2,"packets":5,"dispatch_cycles":1,"inner_cycles":2,"collect_cycles":3}})"));
  EXPECT_EQ(app_to_json(pf),
            app_to_json(build_packet_forwarding(2, 5, {1}, {2}, {3})));
}

std::string schema_path(const std::string& text) {
  try {
    build_task_graph_from_config(json::parse(text));
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "(no error)";
}

TEST(Config, SchemaErrorsCarryPath) {
  EXPECT_EQ(schema_path(R"({"tasks": []})"), "$.tasks");
  EXPECT_EQ(schema_path(R"([])"), "$");
  EXPECT_EQ(schema_path(R"({"tasks":[{"name":"a","actions":[{"compute":-1}]}]})"),
            "$.tasks[0].actions[0].compute");
  EXPECT_EQ(schema_path(R"({"tasks":[{"name":"a","actions":[{"jump":1}]}]})"),
            "$.tasks[0].actions[0]");
  EXPECT_EQ(
      schema_path(R"({"tasks":[{"name":"a","actions":[{"loop":2,"body":["nap"]}]}]})"),
      "$.tasks[0].actions[0].body[0]");
  EXPECT_EQ(schema_path(R"({"tasks":[{"actions":[]}]})"), "$.tasks[0]");
}

TEST(Config, UndeclaredChannel) {
  EXPECT_THROW(build_task_graph_from_config(json::parse(
                   R"({"tasks":[{"name":"a","actions":[{"read":"nope"}]}]})")),
               UnknownChannel);
}

TEST(Config, MalformedText) {
  EXPECT_THROW(parse_json_text("{"), SchemaError);
  EXPECT_THROW(load_json_file("/nonexistent/app.json"), ConfigError);
}

TEST(BuilderProperty, PipelinesValidateAndTerminate) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    auto r = testing::random_pipeline(rng);
    EXPECT_NO_THROW(validate_app(r.app));
    EXPECT_NO_THROW(simulate(r.app, r.freqs));
  }
}

TEST(BuilderProperty, PacketForwardingTerminates) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto inner = testing::uniform(rng, 1, 8);
    const auto app = build_packet_forwarding(
        inner, testing::uniform(rng, 0, 40), {testing::uniform(rng, 0, 1000)},
        {testing::uniform(rng, 0, 1000)}, {testing::uniform(rng, 0, 1000)},
        testing::uniform(rng, 1, 3));
    EXPECT_NO_THROW(simulate(app, std::vector<Frequency>(inner + 2, Frequency(1000))));
  }
}

}  // namespace
}  // namespace mcemu
