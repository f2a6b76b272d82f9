#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "kserver/offline.hpp"
#include "kserver/rational.hpp"
#include "kserver/strategies.hpp"
#include "kserver/trace.hpp"

namespace kserver {

// Target competitive ratio c(k) for loose-competitiveness checks. The log
// arguments are shifted so c(k) > 0 from k = 1:
//   LogFactor(a)    c(k) = a * ln(k + 1)
//   LogLogOffset(b) c(k) = 2 * ln ln(k + 2) + b
//   Constant(c)     c(k) = c
struct RatioFamily {
  enum class Kind { LogFactor, LogLogOffset, Constant };
  Kind kind = Kind::LogFactor;
  Rational param = 4;

  double operator()(std::size_t k) const;

  // Accepts log:A, loglog:B, const:C with A, B, C as integers, decimals or p/q.
  static RatioFamily parse(std::string_view text);
  std::string to_string() const;
};

// Parses "3", "-2", "0.25", "7/4" exactly. Throws DomainError.
Rational parse_rational(std::string_view text);

struct SideConditions {
  bool k_over_c_nondecreasing = true;       // needed for conservative strategies
  bool two_ln_k_minus_c_nondecreasing = true;  // needed for Mark
  bool c_nondecreasing = true;
};

// Checks the monotonicity hypotheses numerically over k = 1..n.
SideConditions check_side_conditions(const RatioFamily& family, std::size_t n);

enum class OptMethod { Auto, Flow, Belady };
OptMethod parse_opt_method(std::string_view text);

struct SweepOptions {
  std::vector<StrategySpec> strategies;
  std::size_t n = 1;
  OptMethod opt_method = OptMethod::Auto;
  std::size_t mark_trials = 1000;
  std::uint64_t seed = kDefaultSeed;
  FlowOptions flow;
  std::size_t threads = 0;  // 0: hardware concurrency
};

struct StrategyCost {
  Rational mean;            // exact; the mean over trials for Mark
  double std_error = 0.0;   // 0 for deterministic strategies
};

struct SweepRow {
  std::size_t k = 0;
  std::vector<StrategyCost> costs;  // parallel to SweepTable::strategies
  Cost opt = 0;
  std::size_t phases = 0;  // P(k)
  Rational avenew;
  bool avenew_defined = false;
};

struct SweepTable {
  std::vector<StrategySpec> strategies;
  std::vector<SweepRow> rows;  // k = 1..n
  std::size_t n = 0;
  std::size_t trace_length = 0;
  Cost opt_single = 0;  // OPT with one server
};

// Seed of Mark trial `trial` at cache size k; independent of scheduling.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t k, std::size_t trial);

// Throws DomainError / CapacityError for an infeasible configuration before
// any simulation runs.
SweepTable sweep(const RequestTrace& trace, const SweepOptions& options);

struct ViolatorReport {
  std::size_t count = 0;
  std::vector<std::size_t> ks;
  // Mark rows whose verdict is within 3 standard errors of a threshold.
  std::vector<std::size_t> uncertain;
};

// k is a violator when cost(k) > 0 and
//   cost(k) >= max(c(k) * opt(k), opt(1) / n^d).
ViolatorReport count_violators(const SweepTable& table, std::size_t strategy,
                               const RatioFamily& family, const Rational& d);
bool is_violator(const SweepTable& table, std::size_t row, std::size_t strategy,
                 const RatioFamily& family, const Rational& d);

struct ViolatorBound {
  std::size_t count = 0;
  double bound = 0.0;
  bool applicable = false;  // the strategy is conservative or Mark
  bool holds() const { return static_cast<double>(count) <= bound; }
};

inline constexpr double kDefaultViolatorConstant = 8.0;

// Conservative X: C (d+1) ln(n) n / c(n). Mark: C (d+1) ln(n) n exp(1 - c(n)/2).
ViolatorBound violator_bound(const SweepTable& table, std::size_t strategy,
                             const RatioFamily& family, const Rational& d,
                             double constant = kDefaultViolatorConstant);

// Runs the sweep for one strategy and reports whether the bound holds.
bool violator_bound_check(const RequestTrace& trace, const StrategySpec& strategy,
                          const RatioFamily& family, const Rational& d, std::size_t n,
                          const SweepOptions& base = {},
                          double constant = kDefaultViolatorConstant);

// CSV with header k,strategy,cost,opt,ratio,phases,avenew,violator.
void write_csv(std::ostream& out, const SweepTable& table, const RatioFamily& family,
               const Rational& d);

// Gnuplot script plotting competitiveness and fault rate against k from the
// CSV at `csv_path`.
void write_gnuplot(std::ostream& out, const SweepTable& table, const std::string& csv_path);

}  // namespace kserver
