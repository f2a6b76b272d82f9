#pragma once

// Test-only reference implementations. Each one follows a definition
// literally and shares no code with the library route it checks.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <list>
#include <set>
#include <utility>
#include <vector>

#include "kserver/dualcert.hpp"
#include "kserver/strategies.hpp"
#include "kserver/trace.hpp"

namespace kserver::oracle {

// LRU on a recency list; returns (request index, evicted node) per eviction.
inline std::pair<Cost, std::vector<std::pair<std::size_t, NodeId>>> lru(const RequestTrace& trace,
                                                                       std::size_t k) {
  std::list<NodeId> recency;  // front = most recent
  std::vector<std::pair<std::size_t, NodeId>> evictions;
  Cost cost = 0;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const NodeId v = trace[t];
    auto it = std::find(recency.begin(), recency.end(), v);
    if (it != recency.end()) {
      recency.erase(it);
    } else if (recency.size() == k) {
      const NodeId u = recency.back();
      recency.pop_back();
      cost += trace.weight(u);
      evictions.emplace_back(t, u);
    }
    recency.push_front(v);
  }
  return {cost, evictions};
}

// FIFO on an insertion-order list.
inline std::pair<Cost, std::vector<std::pair<std::size_t, NodeId>>> fifo(const RequestTrace& trace,
                                                                        std::size_t k) {
  std::list<NodeId> queue;  // front = oldest
  std::vector<std::pair<std::size_t, NodeId>> evictions;
  Cost cost = 0;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const NodeId v = trace[t];
    if (std::find(queue.begin(), queue.end(), v) != queue.end()) continue;
    if (queue.size() == k) {
      const NodeId u = queue.front();
      queue.pop_front();
      cost += trace.weight(u);
      evictions.emplace_back(t, u);
    }
    queue.push_back(v);
  }
  return {cost, evictions};
}

// Plain exhaustive search over every legal schedule, no memoization.
inline Cost exhaustive_opt(const RequestTrace& trace, std::size_t k) {
  constexpr std::uint32_t kUnplaced = UINT32_MAX;
  std::vector<std::uint32_t> pos(k, kUnplaced);
  std::function<Cost(std::size_t)> go = [&](std::size_t t) -> Cost {
    if (t == trace.size()) return 0;
    const auto v = static_cast<std::uint32_t>(index(trace[t]));
    if (std::find(pos.begin(), pos.end(), v) != pos.end()) return go(t + 1);
    Cost best = std::numeric_limits<Cost>::max();
    for (std::size_t s = 0; s < k; ++s) {
      const std::uint32_t old = pos[s];
      const Cost step = old == kUnplaced ? 0 : trace.weight(node(old));
      pos[s] = v;
      best = std::min(best, step + go(t + 1));
      pos[s] = old;
    }
    return best;
  };
  return go(0);
}

struct PhaseOracle {
  std::vector<std::vector<NodeId>> phases;
  std::vector<std::size_t> new_counts;  // per phase, 0 for the first
};

// Maximal substrings with at most k distinct nodes, built by trial extension.
inline PhaseOracle phases(const RequestTrace& trace, std::size_t k) {
  PhaseOracle out;
  std::size_t start = 0;
  while (start < trace.size()) {
    std::size_t end = start;
    std::set<NodeId> seen;
    while (end < trace.size()) {
      std::set<NodeId> grown = seen;
      grown.insert(trace[end]);
      if (grown.size() > k) break;
      seen = std::move(grown);
      ++end;
    }
    out.phases.emplace_back(trace.requests().begin() + static_cast<std::ptrdiff_t>(start),
                            trace.requests().begin() + static_cast<std::ptrdiff_t>(end));
    start = end;
  }
  for (std::size_t p = 0; p < out.phases.size(); ++p) {
    if (p == 0) {
      out.new_counts.push_back(0);
      continue;
    }
    std::set<NodeId> prev(out.phases[p - 1].begin(), out.phases[p - 1].end());
    std::set<NodeId> cur(out.phases[p].begin(), out.phases[p].end());
    std::size_t fresh = 0;
    for (NodeId v : cur) fresh += prev.count(v) == 0 ? 1 : 0;
    out.new_counts.push_back(fresh);
  }
  return out;
}

struct EagerDualRun {
  DualSolution dual;
  Cost cost = 0;
  std::vector<std::pair<std::size_t, NodeId>> evictions;
};

// The primal-dual GreedyDual with explicit vectors: every raise touches each
// raised a_i and b_j. O(N^2 k); only for small traces.
inline EagerDualRun eager_greedydual(const RequestTrace& trace, std::size_t k, RelabelPolicy policy) {
  const std::size_t N = trace.size();
  EagerDualRun out;
  out.dual = DualSolution(N);
  auto w = [&](std::size_t i) -> Cost { return i == 0 ? 0 : trace.weight(trace[i - 1]); };
  auto b = [&](std::size_t j) -> Cost { return j <= N ? out.dual.b[j] : 0; };
  struct Entry {
    std::size_t i, i_minus;
  };
  std::vector<Entry> S(k, Entry{0, 0});
  for (std::size_t n = 1; n <= N; ++n) {
    const NodeId v = trace[n - 1];
    std::size_t stay = SIZE_MAX;
    for (std::size_t s = 0; s < k; ++s) {
      if (S[s].i != 0 && trace[S[s].i - 1] == v) stay = s;
    }
    if (stay != SIZE_MAX) {
      S[stay].i = n;
      continue;
    }
    Cost delta = std::numeric_limits<Cost>::max();
    if (policy == RelabelPolicy::MaxLower) {
      for (const auto& e : S) delta = std::min(delta, w(e.i) - b(e.i + 1));
    } else {
      for (const auto& e : S) delta = std::min(delta, w(e.i) - b(e.i_minus + 1));
      delta = std::max<Cost>(delta, 0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      bool in_s = false;
      for (const auto& e : S) in_s = in_s || e.i == i;
      if (!in_s) out.dual.a[i] += delta;
    }
    for (std::size_t j = 1; j <= n; ++j) out.dual.b[j] += delta;

    std::size_t chosen = SIZE_MAX;
    auto better = [&](std::size_t x, std::size_t y) {
      const Entry& ex = S[x];
      const Entry& ey = S[y];
      if (policy == RelabelPolicy::MaxLower) {
        auto kx = std::tuple(w(ex.i) - b(ex.i + 1), ex.i, x);
        auto ky = std::tuple(w(ey.i) - b(ey.i + 1), ey.i, y);
        return kx < ky;
      }
      auto kx = std::tuple(w(ex.i) - b(ex.i_minus + 1), ex.i_minus, x);
      auto ky = std::tuple(w(ey.i) - b(ey.i_minus + 1), ey.i_minus, y);
      return kx < ky;
    };
    for (std::size_t s = 0; s < k; ++s) {
      if (b(S[s].i_minus + 1) < w(S[s].i)) continue;
      if (chosen == SIZE_MAX || better(s, chosen)) chosen = s;
    }
    const std::size_t from = S[chosen].i;
    if (from != 0) {
      out.cost += w(from);
      out.evictions.emplace_back(n - 1, trace[from - 1]);
    }
    S[chosen] = Entry{n, n};
  }
  return out;
}

}  // namespace kserver::oracle
