#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "kserver/dualcert.hpp"
#include "kserver/errors.hpp"
#include "kserver/offline.hpp"
#include "kserver/phases.hpp"
#include "kserver/strategies.hpp"
#include "kserver/sweep.hpp"
#include "kserver/trace.hpp"

namespace kserver::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options shared across subcommands; each subcommand registers the ones it uses.
struct RunConfig {
  std::string trace_path;
  std::size_t k = 0;
  std::size_t h = 0;
  std::size_t n = 0;
  std::string strategies = "lru";
  std::uint64_t seed = kDefaultSeed;
  std::size_t trials = 100;
  std::string opt = "auto";
  std::string c_family = "log:4";
  std::string d = "1";
  std::string out_path;
  bool gnuplot = false;
  bool verbose = false;
  bool boundaries = false;
  std::string policy = "max";
  std::string check_path;
  std::size_t threads = 0;
  // generate
  std::size_t nodes = 0;
  std::size_t length = 0;
  Cost weight_max = 1;
  bool cyclic = false;
};

std::vector<StrategySpec> parse_strategy_list(const std::string& csv) {
  std::vector<StrategySpec> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_strategy(item));
  }
  if (out.empty()) throw DomainError("empty strategy list");
  return out;
}

std::string kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::Hit: return "hit";
    case EventKind::FreePlace: return "place";
    case EventKind::Move: return "move";
    case EventKind::Flush: return "flush";
    case EventKind::Reload: return "reload";
  }
  return "?";
}

std::string fixed6(double x) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << x;
  return s.str();
}

// Writes to --out when given, otherwise to `fallback`.
template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DomainError("cannot open output file '" + path + "'");
  fn(file);
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const RequestTrace trace = load_trace(cfg.trace_path);
  const auto specs = parse_strategy_list(cfg.strategies);
  std::vector<SimulationResult> results;
  for (const auto& spec : specs) {
    results.push_back(run(spec, cfg.k, trace, cfg.seed));
    const auto& r = results.back();
    out << "strategy=" << to_string(spec) << " k=" << cfg.k << " cost=" << r.total_cost
        << " moves=" << r.moves << " flushes=" << r.flushes << '\n';
  }
  if (!cfg.out_path.empty()) {
    emit(cfg.out_path, out, [&](std::ostream& os) {
      os << "strategy,request,node,kind,server,evicted,cost\n";
      for (std::size_t s = 0; s < specs.size(); ++s) {
        for (const Event& e : results[s].events) {
          os << to_string(specs[s]) << ',' << e.request << ',' << trace.label(trace[e.request]) << ','
             << kind_name(e.kind) << ',';
          if (e.server != kNoServer) os << e.server;
          os << ',';
          if (e.kind == EventKind::Move) os << trace.label(e.evicted);
          os << ',' << e.cost << '\n';
        }
      }
    });
  }
  return kOk;
}

int cmd_optimal(const RunConfig& cfg, std::ostream& out) {
  const RequestTrace trace = load_trace(cfg.trace_path);
  const OptMethod method = parse_opt_method(cfg.opt);
  const bool want_schedule = cfg.verbose || !cfg.out_path.empty();
  const bool use_belady =
      !want_schedule && (method == OptMethod::Belady || (method == OptMethod::Auto && trace.is_paging()));
  if (method == OptMethod::Belady && want_schedule) {
    throw DomainError("the belady solver reports cost only; use --opt flow for the schedule");
  }
  if (use_belady) {
    out << "k=" << cfg.k << " opt=" << opt_belady(trace, cfg.k) << " method=belady\n";
    return kOk;
  }
  const OptSchedule schedule = opt_flow(trace, cfg.k);
  out << "k=" << cfg.k << " opt=" << schedule.cost << " method=flow\n";
  auto write_schedule = [&](std::ostream& os) {
    os << "request,predecessor,cost\n";
    for (std::size_t j = 1; j < schedule.predecessor.size(); ++j) {
      const std::size_t i = schedule.predecessor[j];
      const Cost c = (i == 0 || trace[i - 1] == trace[j - 1]) ? 0 : trace.weight(trace[i - 1]);
      os << j << ',' << i << ',' << c << '\n';
    }
  };
  if (cfg.verbose) write_schedule(out);
  if (!cfg.out_path.empty()) emit(cfg.out_path, out, write_schedule);
  return kOk;
}

int cmd_certify(const RunConfig& cfg, std::ostream& out) {
  const RequestTrace trace = load_trace(cfg.trace_path);
  const std::size_t h = cfg.h == 0 ? cfg.k : cfg.h;
  if (h > cfg.k) throw UsageError("--h must not exceed --k");
  const std::size_t slack = cfg.k - h + 1;
  const Rational ratio(static_cast<long long>(cfg.k), static_cast<long long>(slack));

  if (!cfg.check_path.empty()) {
    std::ifstream in(cfg.check_path);
    if (!in) throw DomainError("cannot open certificate '" + cfg.check_path + "'");
    const Certificate cert = read_certificate(in);
    if (cert.k != cfg.k) throw DomainError("certificate was issued for a different k");
    const CertificateVerdict v = verify_certificate(cert, trace, h);
    out << "k=" << cert.k << " h=" << h << " cost=" << cert.cost
        << " dual_cost=" << dual_cost(cert.dual, h) << " ratio=" << ratio.str() << '\n';
    out << "feasible=" << (v.feasible ? "yes" : "no")
        << " bound=" << (v.bound_holds ? "yes" : "no")
        << " history=" << (v.history_consistent ? "yes" : "no") << '\n';
    out << "verdict " << (v.ok() ? "PASS" : "FAIL") << '\n';
    return v.ok() ? kOk : kCertificateFailed;
  }

  CertifyOptions options;
  if (cfg.policy == "max") {
    options.policy = RelabelPolicy::MaxLower;
  } else if (cfg.policy == "min") {
    options.policy = RelabelPolicy::MinLower;
  } else {
    throw UsageError("--policy must be max or min");
  }
  options.record_history = !cfg.out_path.empty();
  const CertifiedRun certified = run_greedydual_certified(cfg.k, trace, options);

  const auto violations = trace.size() <= 2000 ? check_feasibility(certified.dual, trace)
                                                : check_feasibility_fast(certified.dual, trace);
  const bool monotone = is_monotone(certified.dual);
  const bool bound = check_primal_dual_bound(certified, cfg.k, h, true);
  const bool pass = violations.empty() && monotone && bound && certified.invariant_failures == 0;

  out << "k=" << cfg.k << " h=" << h << " cost=" << certified.result.total_cost
      << " dual_cost=" << dual_cost(certified.dual, h) << " ratio=" << ratio.str() << '\n';
  out << "feasible=" << (violations.empty() ? "yes" : "no") << " violations=" << violations.size()
      << " monotone=" << (monotone ? "yes" : "no") << " bound=" << (bound ? "yes" : "no")
      << " label_failures=" << certified.invariant_failures << '\n';
  out << "verdict " << (pass ? "PASS" : "FAIL") << '\n';
  if (!cfg.out_path.empty()) {
    emit(cfg.out_path, out, [&](std::ostream& os) { write_certificate(os, make_certificate(certified)); });
  }
  return pass ? kOk : kCertificateFailed;
}

int cmd_phases(const RunConfig& cfg, std::ostream& out) {
  const RequestTrace trace = load_trace(cfg.trace_path);
  if (cfg.k == 0 && cfg.n == 0) throw UsageError("phases needs --k or --n");
  const std::size_t lo = cfg.k != 0 ? cfg.k : 1;
  const std::size_t hi = cfg.k != 0 ? cfg.k : cfg.n;
  emit(cfg.out_path, out, [&](std::ostream& os) {
    os << "k,P,avenew,phase,distinct,new";
    if (cfg.boundaries) os << ",start";
    os << '\n';
    for (std::size_t k = lo; k <= hi; ++k) {
      const PhasePartition p = partition(trace, k);
      for (std::size_t i = 0; i < p.num_phases(); ++i) {
        os << k << ',' << p.P() << ',' << fixed6(to_double(p.avenew())) << ',' << i << ','
           << p.distinct[i] << ',' << p.new_requests[i];
        if (cfg.boundaries) os << ',' << p.boundaries[i];
        os << '\n';
      }
    }
  });
  return kOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  if (cfg.gnuplot && cfg.out_path.empty()) throw UsageError("--gnuplot requires --out");
  const RequestTrace trace = load_trace(cfg.trace_path);
  SweepOptions options;
  options.strategies = parse_strategy_list(cfg.strategies);
  options.n = cfg.n;
  options.opt_method = parse_opt_method(cfg.opt);
  options.mark_trials = cfg.trials;
  options.seed = cfg.seed;
  options.threads = cfg.threads;
  const RatioFamily family = RatioFamily::parse(cfg.c_family);
  const Rational d = parse_rational(cfg.d);
  if (d <= 0) throw DomainError("--d must be positive");

  const SweepTable table = sweep(trace, options);
  emit(cfg.out_path, out, [&](std::ostream& os) { write_csv(os, table, family, d); });
  if (cfg.out_path.empty()) return kOk;

  for (std::size_t s = 0; s < table.strategies.size(); ++s) {
    const ViolatorBound vb = violator_bound(table, s, family, d);
    out << "strategy=" << to_string(table.strategies[s]) << " violators=" << vb.count
        << " bound=" << fixed6(vb.bound)
        << " within_bound=" << (vb.applicable ? (vb.holds() ? "yes" : "no") : "n/a") << '\n';
  }
  if (cfg.gnuplot) {
    std::ofstream gp(cfg.out_path + ".gp", std::ios::binary);
    if (!gp) throw DomainError("cannot open '" + cfg.out_path + ".gp'");
    write_gnuplot(gp, table, cfg.out_path);
  }
  return kOk;
}

int cmd_generate(const RunConfig& cfg, std::ostream& out) {
  const RequestTrace trace = cfg.cyclic ? generate_cyclic(cfg.nodes, cfg.length)
                                        : generate_random(cfg.nodes, cfg.length, cfg.weight_max, cfg.seed);
  emit(cfg.out_path, out, [&](std::ostream& os) { write_trace(os, trace); });
  return kOk;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Competitive analysis of paging and weighted caching strategies", "kserver"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto trace_opt = [&](CLI::App* sub) {
    sub->add_option("--trace", cfg.trace_path, "Trace file (`<label> [<weight>]` per line)")->required();
  };
  auto positive = CLI::PositiveNumber;

  auto* simulate = app.add_subcommand("simulate", "Run online strategies and report their cost");
  trace_opt(simulate);
  simulate->add_option("--k", cfg.k, "Number of servers")->required()->check(positive);
  simulate->add_option("--strategy,--strategies", cfg.strategies,
                       "lru, fifo, fwf, balance, mark, greedydual[:max|:min]; comma separated");
  simulate->add_option("--seed", cfg.seed, "Seed for mark");
  simulate->add_option("--out", cfg.out_path, "Write the event log CSV here");

  auto* optimal = app.add_subcommand("optimal", "Offline optimal cost");
  trace_opt(optimal);
  optimal->add_option("--k", cfg.k, "Number of servers")->required()->check(positive);
  optimal->add_option("--opt", cfg.opt, "auto|flow|belady");
  optimal->add_flag("-v,--verbose", cfg.verbose, "Print the predecessor array");
  optimal->add_option("--out", cfg.out_path, "Write the schedule CSV here");

  auto* certify = app.add_subcommand("certify", "GreedyDual with a checked dual certificate");
  certify->set_help_flag("--help", "Print this help message and exit");
  trace_opt(certify);
  certify->add_option("--k", cfg.k, "Number of servers")->required()->check(positive);
  certify->add_option("--h", cfg.h, "Servers given to OPT (default k)")->check(positive);
  certify->add_option("--policy", cfg.policy, "Relabel policy: max or min");
  certify->add_option("--out", cfg.out_path, "Write the certificate here");
  certify->add_option("--check", cfg.check_path, "Verify an existing certificate instead");

  auto* phases = app.add_subcommand("phases", "k-phase statistics as CSV");
  trace_opt(phases);
  phases->add_option("--k", cfg.k, "Phase size")->check(positive);
  phases->add_option("--n", cfg.n, "Report every k in 1..n")->check(positive);
  phases->add_flag("--boundaries", cfg.boundaries, "Include phase start indices");
  phases->add_option("--out", cfg.out_path, "Write the CSV here");

  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep k = 1..n and count violators");
  trace_opt(sweep_cmd);
  sweep_cmd->add_option("--n", cfg.n, "Largest k")->required()->check(positive);
  sweep_cmd->add_option("--strategies,--strategy", cfg.strategies, "Comma-separated strategies");
  sweep_cmd->add_option("--seed", cfg.seed, "Base seed for mark trials");
  sweep_cmd->add_option("--trials", cfg.trials, "Mark trials per k")->check(positive);
  sweep_cmd->add_option("--opt", cfg.opt, "auto|flow|belady");
  sweep_cmd->add_option("--c-family", cfg.c_family, "log:A | loglog:B | const:C");
  sweep_cmd->add_option("--d", cfg.d, "Significance exponent (rational)");
  sweep_cmd->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
  sweep_cmd->add_option("--out", cfg.out_path, "Write the CSV here");
  sweep_cmd->add_flag("--gnuplot", cfg.gnuplot, "Also write <out>.gp");

  auto* generate = app.add_subcommand("generate", "Write a synthetic trace");
  generate->add_option("--nodes", cfg.nodes, "Number of distinct nodes")->required()->check(positive);
  generate->add_option("--length", cfg.length, "Number of requests")->required();
  generate->add_option("--weight-max", cfg.weight_max, "Weights drawn from 1..W")->check(positive);
  generate->add_option("--seed", cfg.seed, "Seed");
  generate->add_flag("--cyclic", cfg.cyclic, "0,1,...,nodes-1 repeated, unit weights");
  generate->add_option("--out", cfg.out_path, "Write the trace here");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(cfg, out);
    if (optimal->parsed()) return cmd_optimal(cfg, out);
    if (certify->parsed()) return cmd_certify(cfg, out);
    if (phases->parsed()) return cmd_phases(cfg, out);
    if (sweep_cmd->parsed()) return cmd_sweep(cfg, out);
    if (generate->parsed()) return cmd_generate(cfg, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ParseError& e) {
    err << "error: malformed input: " << e.what() << '\n';
    return kDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kUsageError;
}

}  // namespace kserver::cli
