#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "kserver/errors.hpp"
#include "kserver/offline.hpp"
#include "kserver/sweep.hpp"
#include "test_util.hpp"

namespace kserver {
namespace {

using testutil::labels_to_trace;

const StrategySpec kLru{StrategyKind::Lru};
const StrategySpec kFifo{StrategyKind::Fifo};
const StrategySpec kFwf{StrategyKind::Fwf};
const StrategySpec kMark{StrategyKind::Mark};

SweepOptions options(std::vector<StrategySpec> s, std::size_t n, std::size_t threads = 1) {
  SweepOptions o;
  o.strategies = std::move(s);
  o.n = n;
  o.mark_trials = 50;
  o.threads = threads;
  return o;
}

std::string csv(const SweepTable& t, const RatioFamily& f, const Rational& d) {
  std::ostringstream ss;
  write_csv(ss, t, f, d);
  return ss.str();
}

TEST(ParseRational, Forms) {
  EXPECT_EQ(parse_rational("3"), 3);
  EXPECT_EQ(parse_rational("-2"), -2);
  EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_rational("7/4"), Rational(7, 4));
  EXPECT_EQ(parse_rational("010"), 10);
  EXPECT_EQ(parse_rational("0.0625"), Rational(1, 16));
  EXPECT_EQ(parse_rational("08/016"), Rational(1, 2));
  EXPECT_THROW(parse_rational(""), DomainError);
  EXPECT_THROW(parse_rational("1/0"), DomainError);
  EXPECT_THROW(parse_rational("x"), DomainError);
  EXPECT_THROW(parse_rational("1.2.3"), DomainError);
}

TEST(RatioFamily, ParseAndEvaluate) {
  const RatioFamily log4 = RatioFamily::parse("log:4");
  EXPECT_EQ(log4.kind, RatioFamily::Kind::LogFactor);
  EXPECT_DOUBLE_EQ(log4(1), 4 * std::log(2.0));
  EXPECT_DOUBLE_EQ(log4(63), 4 * std::log(64.0));
  const RatioFamily ll = RatioFamily::parse("loglog:3");
  EXPECT_DOUBLE_EQ(ll(2), 2 * std::log(std::log(4.0)) + 3);
  const RatioFamily c = RatioFamily::parse("const:5/2");
  EXPECT_DOUBLE_EQ(c(17), 2.5);
  EXPECT_EQ(RatioFamily::parse(c.to_string()).param, c.param);
  EXPECT_THROW(RatioFamily::parse("exp:2"), DomainError);
  EXPECT_THROW(RatioFamily::parse("log"), DomainError);
  for (std::size_t k = 1; k <= 100; ++k) {
    EXPECT_GT(log4(k), 0);
    EXPECT_GT(ll(k), 0);
  }
}

TEST(SideConditions, Families) {
  const SideConditions log4 = check_side_conditions(RatioFamily::parse("log:4"), 64);
  EXPECT_TRUE(log4.c_nondecreasing);
  const SideConditions ll = check_side_conditions(RatioFamily::parse("loglog:3"), 64);
  EXPECT_TRUE(ll.two_ln_k_minus_c_nondecreasing);
  const SideConditions c = check_side_conditions(RatioFamily::parse("const:2"), 64);
  EXPECT_TRUE(c.k_over_c_nondecreasing);
}

TEST(ParseOptMethod, Names) {
  EXPECT_EQ(parse_opt_method("auto"), OptMethod::Auto);
  EXPECT_EQ(parse_opt_method("flow"), OptMethod::Flow);
  EXPECT_EQ(parse_opt_method("belady"), OptMethod::Belady);
  EXPECT_THROW(parse_opt_method("brute"), DomainError);
}

TEST(Sweep, SingleNodeTraceHasNoViolators) {
  const SweepTable t = sweep(labels_to_trace({"a", "a", "a"}), options({kLru, kFwf, kMark}, 5));
  ASSERT_EQ(t.rows.size(), 5u);
  for (const SweepRow& r : t.rows) {
    EXPECT_EQ(r.opt, 0);
    for (const auto& c : r.costs) EXPECT_EQ(c.mean, 0);
  }
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_EQ(count_violators(t, s, RatioFamily::parse("log:4"), 1).count, 0u);
    EXPECT_EQ(count_violators(t, s, RatioFamily::parse("const:1"), 0).count, 0u);
  }
}

TEST(Sweep, SixRequestRow) {
  const RequestTrace trace = labels_to_trace({"a", "b", "c", "a", "b", "d"});
  const SweepTable t = sweep(trace, options({kLru}, 3));
  EXPECT_EQ(t.rows[1].k, 2u);
  EXPECT_EQ(t.rows[1].costs[0].mean, 4);
  EXPECT_EQ(t.rows[1].opt, 3);
  EXPECT_EQ(t.rows[1].opt, opt_bruteforce(trace, 2));
  EXPECT_EQ(t.rows[1].phases, 2u);
  EXPECT_EQ(t.rows[1].avenew, Rational(3, 2));
  EXPECT_EQ(t.opt_single, 5);
}

TEST(Sweep, RowsSortedAndOptNonIncreasing) {
  for (const auto& c : testutil::random_corpus(8, 300)) {
    const SweepTable t = sweep(c.trace, options({kLru, kFifo}, 12, 3));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      EXPECT_EQ(t.rows[i].k, i + 1);
      if (i > 0) EXPECT_LE(t.rows[i].opt, t.rows[i - 1].opt);
    }
    EXPECT_EQ(t.opt_single, opt_flow(c.trace, 1).cost);
  }
}

TEST(Sweep, DeterministicAcrossRunsAndThreadCounts) {
  const RequestTrace trace = generate_random(12, 400, 1, 8);
  const RatioFamily f = RatioFamily::parse("log:4");
  const std::string a = csv(sweep(trace, options({kLru, kMark, kFwf}, 10, 1)), f, 1);
  const std::string b = csv(sweep(trace, options({kLru, kMark, kFwf}, 10, 1)), f, 1);
  const std::string c = csv(sweep(trace, options({kLru, kMark, kFwf}, 10, 4)), f, 1);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(Sweep, ValidatesBeforeRunning) {
  const RequestTrace weighted = parse_trace("a 2\nb\n");
  SweepOptions o = options({kLru}, 2);
  o.opt_method = OptMethod::Belady;
  EXPECT_THROW(sweep(weighted, o), DomainError);
  o.opt_method = OptMethod::Flow;
  o.flow.max_requests = 1;
  EXPECT_THROW(sweep(weighted, o), CapacityError);
  o = options({kLru}, 0);
  EXPECT_THROW(sweep(weighted, o), DomainError);
  o = options({kMark}, 2);
  o.mark_trials = 0;
  EXPECT_THROW(sweep(weighted, o), DomainError);
}

TEST(Sweep, MarkTrialSeedsIndependentOfK) {
  EXPECT_NE(trial_seed(1, 2, 3), trial_seed(1, 3, 2));
  EXPECT_NE(trial_seed(1, 2, 3), trial_seed(2, 2, 3));
  EXPECT_EQ(trial_seed(1, 2, 3), trial_seed(1, 2, 3));
}

// The definition applied to raw integer costs.
std::vector<std::size_t> direct_violators(const RequestTrace& trace, const StrategySpec& s,
                                          std::size_t n, Cost c, Cost d) {
  const Cost opt1 = opt_flow(trace, 1).cost;
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k <= n; ++k) {
    const Cost cost = run(s, k, trace).total_cost;
    const Cost opt = opt_flow(trace, k).cost;
    Cost scale = 1;
    for (Cost e = 0; e < d; ++e) scale *= static_cast<Cost>(n);
    if (cost > 0 && cost >= c * opt && cost * scale >= opt1) out.push_back(k);
  }
  return out;
}

TEST(CountViolators, CyclicConstantFamilyMatchesDirectDefinition) {
  for (std::size_t nodes : {3u, 5u, 9u}) {
    const RequestTrace trace = generate_cyclic(nodes, 120);
    for (const auto& s : {kLru, kFifo, kFwf}) {
      const SweepTable t = sweep(trace, options({s}, 12));
      const ViolatorReport r = count_violators(t, 0, RatioFamily::parse("const:2"), 1);
      const auto direct = direct_violators(trace, s, 12, 2, 1);
      EXPECT_EQ(r.ks, direct) << to_string(s) << " nodes " << nodes;
      EXPECT_EQ(r.count, direct.size());
    }
  }
}

TEST(CountViolators, NoViolatorsBelowRatio) {
  const RequestTrace trace = generate_random(6, 200, 1, 4);
  const SweepTable t = sweep(trace, options({kLru}, 8));
  // c(k) = 1000 exceeds every LRU/OPT ratio here.
  EXPECT_EQ(count_violators(t, 0, RatioFamily::parse("const:1000"), 1).count, 0u);
}

TEST(CountViolators, NonViolatorsWithSignificantCostAreWithinRatio) {
  const RatioFamily f = RatioFamily::parse("log:1");
  for (const auto& c : testutil::random_corpus(6, 300)) {
    const SweepTable t = sweep(c.trace, options({kLru, kFifo}, 16));
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const SweepRow& r = t.rows[i];
        const double cost = to_double(r.costs[s].mean);
        const bool sig = cost * 16 >= static_cast<double>(t.opt_single);
        if (!is_violator(t, i, s, f, 1) && sig && cost > 0) {
          EXPECT_LT(cost, f(r.k) * static_cast<double>(r.opt));
        }
      }
    }
  }
}

TEST(CountViolators, RowIndependence) {
  const RequestTrace trace = generate_random(10, 300, 1, 12);
  const RatioFamily f = RatioFamily::parse("const:3/2");
  const SweepTable with = sweep(trace, options({kLru, kMark, kFifo}, 10));
  const SweepTable without = sweep(trace, options({kLru, kFifo}, 10));
  EXPECT_EQ(count_violators(with, 0, f, 1).ks, count_violators(without, 0, f, 1).ks);
  EXPECT_EQ(count_violators(with, 2, f, 1).ks, count_violators(without, 1, f, 1).ks);
}

TEST(ViolatorBound, ZeroViolatorsAlwaysHolds) {
  const SweepTable t = sweep(labels_to_trace({"a"}), options({kLru}, 4));
  const ViolatorBound b = violator_bound(t, 0, RatioFamily::parse("log:4"), 1);
  EXPECT_EQ(b.count, 0u);
  EXPECT_TRUE(b.holds());
  EXPECT_TRUE(b.applicable);
}

TEST(ViolatorBound, RandomLruAndCyclicFwf) {
  const RatioFamily f = RatioFamily::parse("log:4");
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    EXPECT_TRUE(violator_bound_check(generate_random(40, 600, 1, seed), kLru, f, 1, 64));
  }
  for (std::size_t nodes : {10u, 33u, 65u}) {
    EXPECT_TRUE(violator_bound_check(generate_cyclic(nodes, 600), kFwf, f, 1, 64));
  }
}

TEST(ViolatorBound, Formula) {
  const RequestTrace trace = generate_random(10, 100, 1, 1);
  const SweepTable t = sweep(trace, options({kLru, kMark}, 16));
  const RatioFamily f = RatioFamily::parse("log:4");
  const ViolatorBound lru = violator_bound(t, 0, f, 1, 8.0);
  EXPECT_NEAR(lru.bound, 8.0 * 2 * std::log(16.0) * 16 / f(16), 1e-9);
  const ViolatorBound mark = violator_bound(t, 1, f, 2, 8.0);
  EXPECT_NEAR(mark.bound, 8.0 * 3 * std::log(16.0) * 16 * std::exp(1 - f(16) / 2), 1e-9);
}

TEST(WriteCsv, HeaderAndRowCount) {
  const SweepTable t = sweep(labels_to_trace({"a", "b", "c", "a", "b", "d"}), options({kLru, kFwf}, 8));
  const std::string out = csv(t, RatioFamily::parse("log:4"), 1);
  std::istringstream in(out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "k,strategy,cost,opt,ratio,phases,avenew,violator");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 16u);
}

TEST(WriteGnuplot, NamesBothPlots) {
  const SweepTable t = sweep(labels_to_trace({"a", "b"}), options({kLru}, 2));
  std::ostringstream ss;
  write_gnuplot(ss, t, "out.csv");
  EXPECT_NE(ss.str().find("out.csv"), std::string::npos);
  EXPECT_NE(ss.str().find("competitiveness"), std::string::npos);
  EXPECT_NE(ss.str().find("fault_rate"), std::string::npos);
}

}  // namespace
}  // namespace kserver
