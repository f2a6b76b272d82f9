#include "kserver/dualcert.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <tuple>

#include "kserver/errors.hpp"
#include "kserver/rational.hpp"

namespace kserver {

namespace {

using Wide = WideInt;

// Node and weight of dual index i; index 0 is the artificial request.
struct DualIndexing {
  const RequestTrace& trace;

  bool artificial(std::size_t i) const { return i == 0; }
  Cost weight(std::size_t i) const { return i == 0 ? 0 : trace.weight(trace[i - 1]); }
  bool same_node(std::size_t i, std::size_t j) const {
    return i != 0 && j != 0 && trace[i - 1] == trace[j - 1];
  }
  Cost distance(std::size_t i, std::size_t j) const { return same_node(i, j) ? 0 : weight(i); }
};

}  // namespace

CertifiedRun run_greedydual_certified(std::size_t k, const RequestTrace& trace,
                                      const CertifyOptions& options) {
  if (k < 1) throw DomainError("number of servers must be >= 1");
  const std::size_t n_total = trace.size();
  const DualIndexing idx{trace};

  CertifiedRun run;
  run.k = k;
  run.result.k = k;
  run.result.events.reserve(n_total);
  run.raise.assign(n_total + 1, 0);
  run.left_at.assign(n_total + 1, n_total + 1);
  run.steps.reserve(n_total + 1);
  run.served.assign(k, ServedEntry{0, 0});

  // cum[n] = raise[1] + ... + raise[n]; b[j] after step n is cum[n] - cum[j-1].
  std::vector<Cost> cum(n_total + 1, 0);
  std::size_t artificial_copies = k;
  std::vector<std::uint32_t> server_on(trace.num_nodes(), kNoServer);

  StepSummary sum;
  run.steps.push_back(sum);
  if (options.record_history) run.history.push_back(run.served);

  for (std::size_t n = 1; n <= n_total; ++n) {
    const NodeId v = trace[n - 1];
    cum[n] = cum[n - 1];
    auto b_at = [&](std::size_t j) -> Cost { return j <= n ? cum[n] - cum[j - 1] : 0; };
    auto high = [&](const ServedEntry& e) { return idx.weight(e.request) - b_at(e.request + 1); };
    auto low = [&](const ServedEntry& e) { return idx.weight(e.request) - b_at(e.moved_at + 1); };

    if (std::uint32_t s = server_on[index(v)]; s != kNoServer) {
      // Stay: the server of request i now serves n; i^- is unchanged.
      run.left_at[run.served[s].request] = n;
      run.served[s].request = n;
      run.result.events.push_back({n - 1, EventKind::Hit, s, {}, 0});
    } else {
      // Relabel: raise a_i (i < n, i not in S) and b_1..b_n uniformly by delta.
      Cost delta = 0;
      if (options.policy == RelabelPolicy::MaxLower) {
        delta = std::numeric_limits<Cost>::max();
        for (const auto& e : run.served) delta = std::min(delta, high(e));
      } else {
        Cost min_low = std::numeric_limits<Cost>::max();
        for (const auto& e : run.served) min_low = std::min(min_low, low(e));
        delta = std::max<Cost>(0, min_low);
      }
      assert(delta >= 0);
      if (delta > 0) {
        assert(artificial_copies == 0);
        cum[n] += delta;
        run.raise[n] = delta;
        sum.a0 += delta;
        sum.sum_a += delta * static_cast<Cost>(n - 1 - k);
        sum.sum_b += delta * static_cast<Cost>(n);
        sum.served_b += delta * static_cast<Cost>(k);
      }

      // Move: any server whose L is now <= 0 may go.
      std::uint32_t chosen = kNoServer;
      auto key = [&](std::uint32_t s) {
        const auto& e = run.served[s];
        if (options.policy == RelabelPolicy::MaxLower) return std::tuple(high(e), e.request, s);
        return std::tuple(low(e), e.moved_at, s);
      };
      for (std::uint32_t s = 0; s < k; ++s) {
        if (low(run.served[s]) > 0) continue;
        if (chosen == kNoServer || key(s) < key(chosen)) chosen = s;
      }
      assert(chosen != kNoServer);

      ServedEntry& e = run.served[chosen];
      const std::size_t from = e.request;
      sum.served_b -= b_at(e.moved_at + 1);
      if (idx.artificial(from)) {
        if (--artificial_copies == 0) run.left_at[0] = n;
        run.result.events.push_back({n - 1, EventKind::FreePlace, chosen, {}, 0});
      } else {
        run.left_at[from] = n;
        const NodeId u = trace[from - 1];
        const Cost w = idx.weight(from);
        server_on[index(u)] = kNoServer;
        sum.cost += w;
        run.result.total_cost += w;
        ++run.result.moves;
        run.result.events.push_back({n - 1, EventKind::Move, chosen, u, w});
      }
      server_on[index(v)] = chosen;
      e = ServedEntry{n, n};
    }

    // Label identities that the analysis relies on.
    bool ok = true;
    for (const auto& e : run.served) {
      const Cost h = high(e);
      const Cost l = low(e);
      if (h < 0 || l > h) ok = false;
    }
    if (!ok) ++run.invariant_failures;

    run.steps.push_back(sum);
    if (options.record_history) run.history.push_back(run.served);
  }

  // Materialize the final dual.
  run.dual = DualSolution(n_total);
  const Cost total = cum[n_total];
  for (std::size_t j = 1; j <= n_total; ++j) run.dual.b[j] = total - cum[j - 1];
  for (std::size_t i = 0; i <= n_total; ++i) {
    const std::size_t left = run.left_at[i];
    run.dual.a[i] = left <= n_total ? total - cum[left] : 0;
  }
  run.result.final_servers.resize(k);
  for (std::size_t s = 0; s < k; ++s) {
    const std::size_t i = run.served[s].request;
    if (i != 0) run.result.final_servers[s] = trace[i - 1];
  }
  return run;
}

Cost dual_cost(const DualSolution& dual, std::size_t h) {
  const std::size_t n = dual.num_requests();
  Cost value = -static_cast<Cost>(h) * dual.a[0];
  for (std::size_t i = 1; i + 1 <= n; ++i) value -= dual.a[i];
  for (std::size_t j = 1; j <= n; ++j) value += dual.b[j];
  return value;
}

namespace {

void require_matching_size(const DualSolution& dual, const RequestTrace& trace) {
  if (dual.num_requests() != trace.size() || dual.b.size() != dual.a.size()) {
    throw DomainError("dual has " + std::to_string(dual.num_requests()) + " requests, trace has " +
                      std::to_string(trace.size()));
  }
}

}  // namespace

std::vector<FeasibilityViolation> check_feasibility(const DualSolution& dual,
                                                    const RequestTrace& trace) {
  const DualIndexing idx{trace};
  require_matching_size(dual, trace);
  const std::size_t n = trace.size();
  std::vector<FeasibilityViolation> out;
  for (std::size_t i = 0; i <= n; ++i) {
    if (dual.a[i] < 0) {
      out.push_back({FeasibilityViolation::Kind::NegativeA, i, 0, dual.a[i], 0});
    }
    for (std::size_t j = i + 1; j <= n; ++j) {
      const Cost lhs = dual.b[j] - dual.a[i];
      const Cost rhs = idx.distance(i, j);
      if (lhs > rhs) out.push_back({FeasibilityViolation::Kind::Constraint, i, j, lhs, rhs});
    }
  }
  return out;
}

std::vector<FeasibilityViolation> check_feasibility_fast(const DualSolution& dual,
                                                         const RequestTrace& trace) {
  const DualIndexing idx{trace};
  require_matching_size(dual, trace);
  const std::size_t n = trace.size();
  std::vector<FeasibilityViolation> out;

  // Scanning right to left: best later j per node, and the two best later j
  // overall on distinct nodes (so one is always on a node other than r_i).
  constexpr std::size_t kNone = SIZE_MAX;
  std::vector<std::size_t> best_same(trace.num_nodes(), kNone);
  std::size_t top1 = kNone, top2 = kNone;
  auto better = [&](std::size_t x, std::size_t y) {
    return y == kNone || dual.b[x] > dual.b[y];
  };

  std::vector<FeasibilityViolation> reversed;
  for (std::size_t i = n + 1; i-- > 0;) {
    if (dual.a[i] < 0) {
      reversed.push_back({FeasibilityViolation::Kind::NegativeA, i, 0, dual.a[i], 0});
    }
    if (i < n) {
      // Later requests i+1..n have already been folded in.
      if (!idx.artificial(i)) {
        const std::size_t v = index(trace[i - 1]);
        if (std::size_t j = best_same[v]; j != kNone) {
          const Cost lhs = dual.b[j] - dual.a[i];
          if (lhs > 0) reversed.push_back({FeasibilityViolation::Kind::Constraint, i, j, lhs, 0});
        }
      }
      std::size_t other = top1;
      if (other != kNone && idx.same_node(i, other)) other = top2;
      if (other != kNone) {
        const Cost lhs = dual.b[other] - dual.a[i];
        const Cost rhs = idx.weight(i);
        if (lhs > rhs) {
          reversed.push_back({FeasibilityViolation::Kind::Constraint, i, other, lhs, rhs});
        }
      }
    }
    if (i == 0) break;
    // Fold request i in as a candidate j for smaller indices.
    const std::size_t v = index(trace[i - 1]);
    if (better(i, best_same[v])) best_same[v] = i;
    if (top1 == kNone) {
      top1 = i;
    } else if (trace[top1 - 1] == trace[i - 1]) {
      if (better(i, top1)) top1 = i;
    } else if (better(i, top1)) {
      top2 = top1;
      top1 = i;
    } else if (better(i, top2)) {
      top2 = i;
    }
  }
  out.assign(reversed.rbegin(), reversed.rend());
  return out;
}

bool is_monotone(const DualSolution& dual) {
  const std::size_t n = dual.num_requests();
  for (std::size_t j = 1; j <= n; ++j) {
    if (dual.b[j] < 0) return false;
    if (j + 1 <= n && dual.b[j] < dual.b[j + 1]) return false;
  }
  return true;
}

namespace {

bool bound_holds(Wide k, Wide h, Wide cost, Wide dual_value, Wide served_b) {
  const Wide slack = k - h + 1;
  return slack * cost <= k * dual_value - slack * served_b;
}

}  // namespace

bool check_primal_dual_bound(const CertifiedRun& run, std::size_t k, std::size_t h,
                             bool every_step) {
  if (h < 1 || h > k) throw DomainError("primal-dual bound requires 1 <= h <= k");
  const DualSolution& dual = run.dual;
  Wide served_b = 0;
  for (const auto& e : run.served) {
    const std::size_t j = e.moved_at + 1;
    if (j <= dual.num_requests()) served_b += dual.b[j];
  }
  if (!bound_holds(k, h, run.result.total_cost, dual_cost(dual, h), served_b)) return false;
  if (every_step) {
    for (const auto& s : run.steps) {
      const Wide value = -static_cast<Wide>(h) * s.a0 - s.sum_a + s.sum_b;
      if (!bound_holds(k, h, s.cost, value, s.served_b)) return false;
    }
  }
  return true;
}

DualSolution dual_at_step(const CertifiedRun& run, std::size_t n) {
  const std::size_t n_total = run.dual.num_requests();
  if (n > n_total) throw DomainError("dual_at_step: step out of range");
  std::vector<Cost> cum(n_total + 1, 0);
  for (std::size_t m = 1; m <= n_total; ++m) cum[m] = cum[m - 1] + run.raise[m];
  DualSolution d(n_total);
  for (std::size_t j = 1; j <= n; ++j) d.b[j] = cum[n] - cum[j - 1];
  for (std::size_t i = 0; i <= n_total; ++i) {
    const std::size_t left = run.left_at[i];
    d.a[i] = left <= n ? cum[n] - cum[left] : 0;
  }
  return d;
}

}  // namespace kserver
