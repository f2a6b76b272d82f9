#include <gtest/gtest.h>

#include <random>

#include "kserver/errors.hpp"
#include "kserver/offline.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace kserver {
namespace {

using testutil::labels_to_trace;

TEST(OptFlow, Examples) {
  const RequestTrace abca = labels_to_trace({"a", "b", "c", "a"});
  EXPECT_EQ(opt_flow(abca, 2).cost, 1);
  EXPECT_EQ(opt_belady(abca, 2), 1);
  EXPECT_EQ(opt_bruteforce(abca, 2), 1);
  EXPECT_EQ(opt_flow(parse_trace("a 5\nb 1\nc 1\n"), 2).cost, 1);
  EXPECT_EQ(opt_flow(labels_to_trace({"a", "b", "a", "c", "b"}), 3).cost, 0);
  EXPECT_EQ(opt_bruteforce(labels_to_trace({"a", "a", "a"}), 1), 0);
  EXPECT_EQ(opt_bruteforce(labels_to_trace({"a", "b", "a", "b", "a", "b"}), 1), 5);
  EXPECT_EQ(opt_flow(RequestTrace{}, 3).cost, 0);
}

TEST(OptFlow, SixRequestExample) {
  const RequestTrace t = labels_to_trace({"a", "b", "c", "a", "b", "d"});
  EXPECT_EQ(oracle::exhaustive_opt(t, 2), 3);
  EXPECT_EQ(opt_bruteforce(t, 2), 3);
  EXPECT_EQ(opt_flow(t, 2).cost, 3);
  EXPECT_EQ(opt_belady(t, 2), 3);
}

TEST(OptFlow, ScheduleIsValidAndPriced) {
  for (const auto& c : testutil::random_corpus(80, 150)) {
    const OptSchedule s = opt_flow(c.trace, c.k);
    EXPECT_TRUE(is_valid_schedule(s, c.trace, c.k));
    EXPECT_EQ(schedule_cost(s, c.trace), s.cost);
  }
}

TEST(OptFlow, InvalidSchedulesRejected) {
  const RequestTrace t = labels_to_trace({"a", "b", "c"});
  OptSchedule s = opt_flow(t, 2);
  OptSchedule too_many_fresh = s;
  too_many_fresh.predecessor = {0, 0, 0, 0};
  EXPECT_FALSE(is_valid_schedule(too_many_fresh, t, 2));
  EXPECT_TRUE(is_valid_schedule(too_many_fresh, t, 3));
  OptSchedule reused = s;
  reused.predecessor = {0, 0, 1, 1};
  EXPECT_FALSE(is_valid_schedule(reused, t, 2));
  OptSchedule backwards = s;
  backwards.predecessor = {0, 2, 0, 1};
  EXPECT_FALSE(is_valid_schedule(backwards, t, 2));
}

TEST(OptFlow, MatchesExhaustiveOracles) {
  std::mt19937_64 rng(99);
  for (int inst = 0; inst < 300; ++inst) {
    const std::size_t nodes = 1 + rng() % 4;
    const std::size_t len = 1 + rng() % 9;
    std::string text;
    std::vector<Cost> w(nodes);
    for (auto& x : w) x = (rng() & 1) ? 5 : 1;
    for (std::size_t t = 0; t < len; ++t) {
      const std::size_t v = rng() % nodes;
      text += "n" + std::to_string(v) + " " + std::to_string(w[v]) + "\n";
    }
    const RequestTrace trace = parse_trace(text);
    const std::size_t k = 1 + rng() % 3;
    const Cost expect = oracle::exhaustive_opt(trace, k);
    EXPECT_EQ(opt_bruteforce(trace, k), expect) << text;
    EXPECT_EQ(opt_flow(trace, k).cost, expect) << text;
  }
}

TEST(OptBelady, MatchesFlowOnPaging) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const RequestTrace t = generate_random(2 + seed % 30, 250, 1, 7000 + seed);
    const std::size_t k = 1 + seed % 15;
    EXPECT_EQ(opt_belady(t, k), opt_flow(t, k).cost) << "seed " << seed;
  }
  for (std::size_t k = 1; k <= 6; ++k) {
    const RequestTrace t = generate_cyclic(k + 1, 100);
    EXPECT_EQ(opt_belady(t, k), opt_flow(t, k).cost);
  }
}

TEST(OptBelady, RejectsWeightedTraces) {
  EXPECT_THROW(opt_belady(parse_trace("a 2\nb\n"), 1), DomainError);
}

TEST(OptFlow, NonIncreasingInK) {
  for (const auto& c : testutil::random_corpus(16, 200)) {
    Cost prev = opt_flow(c.trace, 1).cost;
    for (std::size_t k = 2; k <= 12; ++k) {
      const Cost cur = opt_flow(c.trace, k).cost;
      EXPECT_LE(cur, prev);
      prev = cur;
    }
  }
}

TEST(OptSingleServer, MatchesFlowAtOneServer) {
  for (const auto& c : testutil::random_corpus(60, 200)) {
    EXPECT_EQ(opt_single_server(c.trace), opt_flow(c.trace, 1).cost);
  }
  EXPECT_EQ(opt_single_server(parse_trace("a 3\nb 2\nb\na\n")), 5);
}

TEST(Capacity, Limits) {
  const RequestTrace t = generate_random(5, 100, 1, 1);
  EXPECT_THROW(opt_flow(t, 2, FlowOptions{50}), CapacityError);
  EXPECT_NO_THROW(opt_flow(t, 2, FlowOptions{100}));
  EXPECT_THROW(opt_bruteforce(generate_random(3, 13, 1, 1), 2), CapacityError);
  EXPECT_THROW(opt_bruteforce(generate_random(3, 5, 1, 1), 5), CapacityError);
  EXPECT_THROW(opt_flow(t, 0), DomainError);
}

}  // namespace
}  // namespace kserver
