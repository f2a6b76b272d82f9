#include "kserver/sweep.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "kserver/errors.hpp"
#include "kserver/phases.hpp"

namespace kserver {

Rational parse_rational(std::string_view text) {
  auto bad = [&]() { return DomainError("not a rational number: '" + std::string(text) + "'"); };
  if (text.empty()) throw bad();
  std::string s(text);
  bool negative = false;
  if (s[0] == '-' || s[0] == '+') {
    negative = s[0] == '-';
    s.erase(0, 1);
  }
  auto digits = [](const std::string& x) {
    return !x.empty() && x.find_first_not_of("0123456789") == std::string::npos;
  };
  // cpp_int reads a leading 0 as an octal prefix.
  auto integer = [](const std::string& x) {
    const auto first = x.find_first_not_of('0');
    return first == std::string::npos ? BigInt(0) : BigInt(x.substr(first));
  };
  Rational value;
  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    if (!digits(num) || !digits(den)) throw bad();
    BigInt d = integer(den);
    if (d == 0) throw bad();
    value = Rational(integer(num), d);
  } else if (auto dot = s.find('.'); dot != std::string::npos) {
    std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
    if (whole.empty()) whole = "0";
    if (!digits(whole) || !digits(frac)) throw bad();
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
    value = Rational(integer(whole + frac), scale);
  } else {
    if (!digits(s)) throw bad();
    value = Rational(integer(s));
  }
  return negative ? Rational(-value) : value;
}

double RatioFamily::operator()(std::size_t k) const {
  const double x = static_cast<double>(k);
  const double p = to_double(param);
  switch (kind) {
    case Kind::LogFactor: return p * std::log(x + 1.0);
    case Kind::LogLogOffset: return 2.0 * std::log(std::log(x + 2.0)) + p;
    case Kind::Constant: return p;
  }
  return p;
}

RatioFamily RatioFamily::parse(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw DomainError("ratio family must be log:A, loglog:B or const:C");
  }
  std::string_view name = text.substr(0, colon);
  RatioFamily f;
  f.param = parse_rational(text.substr(colon + 1));
  if (name == "log") {
    f.kind = Kind::LogFactor;
  } else if (name == "loglog") {
    f.kind = Kind::LogLogOffset;
  } else if (name == "const") {
    f.kind = Kind::Constant;
  } else {
    throw DomainError("unknown ratio family '" + std::string(name) + "'");
  }
  if (f.kind != Kind::LogLogOffset && f.param <= 0) {
    throw DomainError("ratio family parameter must be positive");
  }
  return f;
}

std::string RatioFamily::to_string() const {
  switch (kind) {
    case Kind::LogFactor: return "log:" + param.str();
    case Kind::LogLogOffset: return "loglog:" + param.str();
    case Kind::Constant: return "const:" + param.str();
  }
  return "?";
}

SideConditions check_side_conditions(const RatioFamily& family, std::size_t n) {
  SideConditions out;
  constexpr double kEps = 1e-12;
  for (std::size_t k = 1; k < n; ++k) {
    const double c0 = family(k), c1 = family(k + 1);
    if (c1 < c0 - kEps) out.c_nondecreasing = false;
    if ((k + 1) / c1 < k / c0 - kEps) out.k_over_c_nondecreasing = false;
    if (2 * std::log(k + 1.0) - c1 < 2 * std::log(static_cast<double>(k)) - c0 - kEps) {
      out.two_ln_k_minus_c_nondecreasing = false;
    }
  }
  return out;
}

OptMethod parse_opt_method(std::string_view text) {
  if (text == "auto") return OptMethod::Auto;
  if (text == "flow") return OptMethod::Flow;
  if (text == "belady") return OptMethod::Belady;
  throw DomainError("unknown opt method '" + std::string(text) + "'");
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t k, std::size_t trial) {
  // splitmix64 finalizer over (k, trial)
  std::uint64_t z = (static_cast<std::uint64_t>(k) << 32) ^ static_cast<std::uint64_t>(trial);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return seed ^ z;
}

namespace {

StrategyCost measure(const StrategySpec& spec, std::size_t k, const RequestTrace& trace,
                     const SweepOptions& options) {
  StrategyCost out;
  if (spec.kind != StrategyKind::Mark) {
    out.mean = Rational(run(spec, k, trace, options.seed, EventLog::CostOnly).total_cost);
    return out;
  }
  const std::size_t trials = options.mark_trials;
  long long sum = 0;
  double sum_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Cost c = run(spec, k, trace, trial_seed(options.seed, k, t), EventLog::CostOnly).total_cost;
    sum += c;
    sum_sq += static_cast<double>(c) * static_cast<double>(c);
  }
  out.mean = Rational(sum, static_cast<long long>(trials));
  if (trials > 1) {
    const double mean = static_cast<double>(sum) / static_cast<double>(trials);
    const double var = (sum_sq - static_cast<double>(trials) * mean * mean) /
                       static_cast<double>(trials - 1);
    out.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(trials));
  }
  return out;
}

}  // namespace

SweepTable sweep(const RequestTrace& trace, const SweepOptions& options) {
  if (options.n < 1) throw DomainError("sweep: n must be >= 1");
  if (options.mark_trials < 1) throw DomainError("sweep: trials must be >= 1");
  OptMethod method = options.opt_method;
  if (method == OptMethod::Auto) method = trace.is_paging() ? OptMethod::Belady : OptMethod::Flow;
  if (method == OptMethod::Belady && !trace.is_paging()) {
    throw DomainError("sweep: the belady solver requires a unit-weight trace");
  }
  if (method == OptMethod::Flow && trace.size() > options.flow.max_requests) {
    throw CapacityError("sweep: trace has " + std::to_string(trace.size()) +
                        " requests, above the flow solver cap of " +
                        std::to_string(options.flow.max_requests));
  }

  SweepTable table;
  table.strategies = options.strategies;
  table.n = options.n;
  table.trace_length = trace.size();
  table.opt_single = opt_single_server(trace);
  table.rows.resize(options.n);

  auto work = [&](std::size_t k) {
    SweepRow row;
    row.k = k;
    row.opt = method == OptMethod::Belady ? opt_belady(trace, k) : opt_flow(trace, k, options.flow).cost;
    const PhasePartition p = partition(trace, k);
    row.phases = p.P();
    row.avenew = p.avenew();
    row.avenew_defined = p.avenew_defined();
    for (const auto& spec : options.strategies) row.costs.push_back(measure(spec, k, trace, options));
    table.rows[k - 1] = std::move(row);
  };

  std::size_t threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, options.n);
  if (threads == 1) {
    for (std::size_t k = 1; k <= options.n; ++k) work(k);
    return table;
  }
  std::atomic<std::size_t> next{1};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k <= options.n; k = next++) {
        try {
          work(k);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return table;
}

namespace {

// cost >= c(k) * opt, exactly for a constant family.
bool reaches_ratio(const Rational& cost, const RatioFamily& family, std::size_t k, Cost opt) {
  if (family.kind == RatioFamily::Kind::Constant) return cost >= family.param * opt;
  return static_cast<long double>(to_double(cost)) >=
         static_cast<long double>(family(k)) * static_cast<long double>(opt);
}

// cost >= opt1 / n^d, i.e. cost * n^d >= opt1.
bool significant(const Rational& cost, Cost opt1, std::size_t n, const Rational& d) {
  if (boost::multiprecision::denominator(d) == 1 && d >= 0 && d <= 64) {
    const auto e = static_cast<unsigned>(boost::multiprecision::numerator(d));
    const BigInt scale = boost::multiprecision::pow(BigInt(n), e);
    return cost * Rational(scale) >= Rational(opt1);
  }
  const long double lhs = static_cast<long double>(to_double(cost)) *
                          std::pow(static_cast<long double>(n), static_cast<long double>(to_double(d)));
  return lhs >= static_cast<long double>(opt1);
}

}  // namespace

bool is_violator(const SweepTable& table, std::size_t row, std::size_t strategy,
                 const RatioFamily& family, const Rational& d) {
  const SweepRow& r = table.rows.at(row);
  const Rational& cost = r.costs.at(strategy).mean;
  if (cost <= 0) return false;
  return reaches_ratio(cost, family, r.k, r.opt) && significant(cost, table.opt_single, table.n, d);
}

ViolatorReport count_violators(const SweepTable& table, std::size_t strategy,
                               const RatioFamily& family, const Rational& d) {
  ViolatorReport report;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const SweepRow& r = table.rows[i];
    if (is_violator(table, i, strategy, family, d)) {
      ++report.count;
      report.ks.push_back(r.k);
    }
    const StrategyCost& c = r.costs.at(strategy);
    if (c.std_error > 0.0) {
      const double mean = to_double(c.mean);
      const double ratio_gap = std::abs(mean - family(r.k) * static_cast<double>(r.opt));
      const double sig_gap =
          std::abs(mean - static_cast<double>(table.opt_single) /
                              std::pow(static_cast<double>(table.n), to_double(d)));
      if (std::min(ratio_gap, sig_gap) < 3.0 * c.std_error) report.uncertain.push_back(r.k);
    }
  }
  return report;
}

ViolatorBound violator_bound(const SweepTable& table, std::size_t strategy,
                             const RatioFamily& family, const Rational& d, double constant) {
  ViolatorBound out;
  const StrategySpec& spec = table.strategies.at(strategy);
  out.count = count_violators(table, strategy, family, d).count;
  out.applicable = is_conservative(spec) || spec.kind == StrategyKind::Mark;
  const double n = static_cast<double>(table.n);
  const double base = constant * (to_double(d) + 1.0) * std::log(n) * n;
  const double cn = family(table.n);
  if (spec.kind == StrategyKind::Mark) {
    out.bound = base * std::exp(1.0 - cn / 2.0);
  } else {
    out.bound = base / cn;
  }
  return out;
}

bool violator_bound_check(const RequestTrace& trace, const StrategySpec& strategy,
                          const RatioFamily& family, const Rational& d, std::size_t n,
                          const SweepOptions& base, double constant) {
  SweepOptions options = base;
  options.strategies = {strategy};
  options.n = n;
  const SweepTable table = sweep(trace, options);
  return violator_bound(table, 0, family, d, constant).holds();
}

namespace {

std::string fixed6(double x) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << x;
  return s.str();
}

std::string format_cost(const StrategyCost& c) {
  if (boost::multiprecision::denominator(c.mean) == 1) return c.mean.str();
  return fixed6(to_double(c.mean));
}

std::string format_ratio(const Rational& cost, Cost opt) {
  if (opt == 0) return cost == 0 ? fixed6(1.0) : "inf";
  return fixed6(to_double(cost / opt));
}

}  // namespace

void write_csv(std::ostream& out, const SweepTable& table, const RatioFamily& family,
               const Rational& d) {
  out << "k,strategy,cost,opt,ratio,phases,avenew,violator\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const SweepRow& r = table.rows[i];
    for (std::size_t s = 0; s < table.strategies.size(); ++s) {
      out << r.k << ',' << to_string(table.strategies[s]) << ',' << format_cost(r.costs[s]) << ','
          << r.opt << ',' << format_ratio(r.costs[s].mean, r.opt) << ',' << r.phases << ','
          << fixed6(to_double(r.avenew)) << ',' << (is_violator(table, i, s, family, d) ? 1 : 0)
          << '\n';
    }
  }
}

void write_gnuplot(std::ostream& out, const SweepTable& table, const std::string& csv_path) {
  out << "# competitiveness and fault rate vs k\n";
  out << "set datafile separator ','\n";
  out << "set key outside right\n";
  out << "set xlabel 'k'\n";
  out << "set terminal pngcairo size 900,600\n";
  auto plot = [&](const std::string& file, const std::string& ylabel, const std::string& column) {
    out << "set output '" << file << "'\n";
    out << "set ylabel '" << ylabel << "'\n";
    out << "plot ";
    for (std::size_t s = 0; s < table.strategies.size(); ++s) {
      const std::string name = to_string(table.strategies[s]);
      if (s > 0) out << ", \\\n     ";
      out << "'" << csv_path << "' every ::1 using 1:(strcol(2) eq '" << name << "' ? " << column
          << " : 1/0) with linespoints title '" << name << "'";
    }
    out << '\n';
  };
  plot("competitiveness.png", "cost / OPT", "$5");
  const std::size_t len = std::max<std::size_t>(table.trace_length, 1);
  plot("fault_rate.png", "cost / |r|", "$3/" + std::to_string(len) + ".0");
}

}  // namespace kserver
