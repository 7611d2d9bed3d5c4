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

#include "mcemu/errors.hpp"
#include "mcemu/kernel.hpp"
#include "mcemu/oracle.hpp"
#include "support/random_apps.hpp"

namespace mcemu {
namespace {

void expect_same_accounts(const SimulationReport& a, const SimulationReport& b) {
  ASSERT_EQ(a.cores.size(), b.cores.size());
  for (std::size_t i = 0; i < a.cores.size(); ++i) {
    EXPECT_EQ(a.cores[i].logical_time, b.cores[i].logical_time) << "core " << i;
    EXPECT_EQ(a.cores[i].busy_time, b.cores[i].busy_time) << "core " << i;
    EXPECT_EQ(a.cores[i].idle_time, b.cores[i].idle_time) << "core " << i;
  }
}

TEST(Oracle, TwoCoreReference) {
  const auto r = simulate_parallel(testing::two_core_app(), testing::two_core_freqs());
  EXPECT_EQ(r.cores[0].logical_time, testing::seconds(7));
  EXPECT_EQ(r.cores[0].idle_time, testing::seconds(1));
  EXPECT_EQ(r.cores[1].logical_time, testing::seconds(7));
  EXPECT_TRUE(r.cores[1].idle_time.is_zero());
  EXPECT_EQ(r.cores[0].task, "T1");
}

TEST(Oracle, SingleTask) {
  const AppGraph app{"one", {{"t", {compute(7), yield(), compute(3)}}}, {}};
  const std::vector<Frequency> f{Frequency(5)};
  expect_same_accounts(simulate(app, f), simulate_parallel(app, f));
}

TEST(Oracle, DetectsDeadlock) {
  const AppGraph app{"cycle",
                     {{"A", {read("x"), write("y")}}, {"B", {read("y"), write("x")}}},
                     {{"x", 1}, {"y", 1}}};
  EXPECT_THROW(simulate_parallel(app, std::vector<Frequency>(2, Frequency(1))),
               Deadlock);
}

TEST(Oracle, LengthMismatch) {
  EXPECT_THROW(simulate_parallel(testing::two_core_app(),
                                 std::vector<Frequency>{Frequency(1)}),
               LengthMismatch);
}

TEST(OracleEquivalence, RandomChannelApps) {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 300; ++i) {
    const auto r = testing::random_channel_app(rng);
    SCOPED_TRACE(i);
    expect_same_accounts(simulate(r.app, r.freqs), simulate_parallel(r.app, r.freqs));
  }
}

TEST(OracleEquivalence, RandomPipelines) {
  std::mt19937_64 rng(4321);
  for (int i = 0; i < 100; ++i) {
    const auto r = testing::random_pipeline(rng);
    SCOPED_TRACE(i);
    expect_same_accounts(simulate(r.app, r.freqs), simulate_parallel(r.app, r.freqs));
  }
}

TEST(OracleEquivalence, PacketForwarding) {
  const auto app = build_packet_forwarding(4, 37, {300}, {2000}, {150}, 2);
  const auto f = testing::table_frequencies();
  const std::vector<Frequency> freqs{f[0], f[5], f[2], f[3], f[1], f[4]};
  expect_same_accounts(simulate(app, freqs), simulate_parallel(app, freqs));
}

TEST(OracleEquivalence, TieBreakingDoesNotMatter) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 100; ++i) {
    const auto r = testing::random_channel_app(rng);
    const auto base = simulate_parallel(r.app, r.freqs);
    for (std::uint64_t seed : {1u, 2u, 3u})
      expect_same_accounts(base, simulate_parallel(r.app, r.freqs, {seed}));
  }
}

TEST(OracleEquivalence, EqualClocksCauseManyTies) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    auto r = testing::random_channel_app(rng);
    r.freqs.assign(r.freqs.size(), Frequency(1000));
    SCOPED_TRACE(i);
    expect_same_accounts(simulate(r.app, r.freqs),
                         simulate_parallel(r.app, r.freqs, {std::uint64_t(i)}));
  }
}

}  // namespace
}  // namespace mcemu
