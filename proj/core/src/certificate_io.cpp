#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "kserver/dualcert.hpp"
#include "kserver/errors.hpp"
#include "kserver/rational.hpp"

namespace kserver {

namespace {

constexpr const char* kMagic = "kserver-certificate";
constexpr int kVersion = 1;

}  // namespace

Certificate make_certificate(const CertifiedRun& run) {
  Certificate cert;
  cert.k = run.k;
  cert.cost = run.result.total_cost;
  cert.dual = run.dual;
  if (!run.history.empty()) {
    for (std::size_t n = 0; n < run.history.size(); ++n) cert.snapshots.push_back({n, run.history[n]});
  } else {
    cert.snapshots.push_back({run.dual.num_requests(), run.served});
  }
  return cert;
}

void write_certificate(std::ostream& out, const Certificate& cert) {
  const std::size_t n = cert.dual.num_requests();
  out << kMagic << ' ' << kVersion << '\n';
  out << "k " << cert.k << '\n';
  out << "N " << n << '\n';
  out << "cost " << cert.cost << '\n';
  out << 'a';
  for (Cost x : cert.dual.a) out << ' ' << x;
  out << "\nb";
  for (std::size_t j = 1; j <= n; ++j) out << ' ' << cert.dual.b[j];
  out << '\n';
  for (const auto& snap : cert.snapshots) {
    out << "S " << snap.step;
    for (const auto& e : snap.served) out << ' ' << e.request << ':' << e.moved_at;
    out << '\n';
  }
  out << "end\n";
}

Certificate read_certificate(std::istream& in) {
  Certificate cert;
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&](const char* what) -> std::istringstream {
    if (!std::getline(in, line)) throw ParseError(lineno + 1, std::string("expected ") + what);
    ++lineno;
    return std::istringstream(line);
  };
  auto expect_key = [&](std::istringstream& ss, const std::string& key) {
    std::string tok;
    if (!(ss >> tok) || tok != key) throw ParseError(lineno, "expected '" + key + "'");
  };

  {
    auto ss = next_line("header");
    int version = 0;
    expect_key(ss, kMagic);
    if (!(ss >> version) || version != kVersion) throw ParseError(lineno, "unsupported version");
  }
  std::size_t n = 0;
  {
    auto ss = next_line("k");
    expect_key(ss, "k");
    if (!(ss >> cert.k) || cert.k == 0) throw ParseError(lineno, "bad k");
  }
  {
    auto ss = next_line("N");
    expect_key(ss, "N");
    if (!(ss >> n)) throw ParseError(lineno, "bad N");
  }
  {
    auto ss = next_line("cost");
    expect_key(ss, "cost");
    if (!(ss >> cert.cost)) throw ParseError(lineno, "bad cost");
  }
  cert.dual = DualSolution(n);
  {
    auto ss = next_line("a");
    expect_key(ss, "a");
    for (std::size_t i = 0; i <= n; ++i) {
      if (!(ss >> cert.dual.a[i])) throw ParseError(lineno, "expected N+1 values for a");
    }
  }
  {
    auto ss = next_line("b");
    expect_key(ss, "b");
    for (std::size_t j = 1; j <= n; ++j) {
      if (!(ss >> cert.dual.b[j])) throw ParseError(lineno, "expected N values for b");
    }
  }
  while (true) {
    auto ss = next_line("S or end");
    std::string tok;
    ss >> tok;
    if (tok == "end") break;
    if (tok != "S") throw ParseError(lineno, "expected 'S' or 'end'");
    ServedSnapshot snap;
    if (!(ss >> snap.step)) throw ParseError(lineno, "bad step index");
    std::string pair;
    while (ss >> pair) {
      auto colon = pair.find(':');
      if (colon == std::string::npos) throw ParseError(lineno, "expected i:i- pair");
      try {
        snap.served.push_back({std::stoul(pair.substr(0, colon)), std::stoul(pair.substr(colon + 1))});
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad i:i- pair '" + pair + "'");
      }
    }
    if (snap.served.size() != cert.k) throw ParseError(lineno, "S must list k entries");
    cert.snapshots.push_back(std::move(snap));
  }
  if (cert.snapshots.empty()) throw ParseError(lineno, "certificate lists no S");
  return cert;
}

CertificateVerdict verify_certificate(const Certificate& cert, const RequestTrace& trace,
                                      std::size_t h) {
  if (h < 1 || h > cert.k) throw DomainError("verify_certificate requires 1 <= h <= k");
  CertificateVerdict verdict;
  const std::size_t n = cert.dual.num_requests();
  if (n != trace.size()) return verdict;

  verdict.feasible = check_feasibility_fast(cert.dual, trace).empty();

  const ServedSnapshot& last = cert.snapshots.back();
  WideInt served_b = 0;
  bool entries_ok = last.step == n;
  for (const auto& e : last.served) {
    if (e.moved_at > e.request || e.request > n) {
      entries_ok = false;
      continue;
    }
    if (e.moved_at + 1 <= n) served_b += cert.dual.b[e.moved_at + 1];
  }
  const WideInt slack = static_cast<WideInt>(cert.k) - static_cast<WideInt>(h) + 1;
  verdict.bound_holds = entries_ok && slack * cert.cost <=
                                          static_cast<WideInt>(cert.k) * dual_cost(cert.dual, h) -
                                              slack * served_b;

  verdict.history_consistent = true;
  if (cert.snapshots.size() == n + 1) {
    Cost replayed = 0;
    auto weight_of = [&](std::size_t i) -> Cost { return i == 0 ? 0 : trace.weight(trace[i - 1]); };
    for (std::size_t step = 1; step <= n && verdict.history_consistent; ++step) {
      const auto& before = cert.snapshots[step - 1];
      const auto& after = cert.snapshots[step];
      if (before.step != step - 1 || after.step != step) {
        verdict.history_consistent = false;
        break;
      }
      std::size_t changed = 0;
      for (std::size_t s = 0; s < cert.k; ++s) {
        if (before.served[s] == after.served[s]) continue;
        ++changed;
        const auto& from = before.served[s];
        const auto& to = after.served[s];
        if (to.request != step) {
          verdict.history_consistent = false;
        } else if (to.moved_at == step) {
          replayed += (from.request != 0 && trace[from.request - 1] == trace[step - 1])
                          ? 0
                          : weight_of(from.request);
        } else if (to.moved_at != from.moved_at || from.request == 0 ||
                   trace[from.request - 1] != trace[step - 1]) {
          verdict.history_consistent = false;
        }
      }
      if (changed != 1) verdict.history_consistent = false;
    }
    if (replayed != cert.cost) verdict.history_consistent = false;
  }
  return verdict;
}

}  // namespace kserver
