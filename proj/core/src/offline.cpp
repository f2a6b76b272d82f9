#include "kserver/offline.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

#include "kserver/errors.hpp"

namespace kserver {

namespace {

// Min-cost flow by successive shortest paths. Each phase runs Dijkstra on
// reduced costs, folds the distances into the potentials, then pushes a
// blocking flow through the zero-reduced-cost arcs.
class MinCostFlow {
 public:
  using Flow = std::int64_t;
  static constexpr Flow kInfFlow = std::numeric_limits<Flow>::max() / 4;

  explicit MinCostFlow(std::size_t n) : adj_(n), potential_(n, 0), level_(n), iter_(n) {}

  std::size_t add_edge(std::size_t from, std::size_t to, Flow cap, Cost cost) {
    adj_[from].push_back(arcs_.size());
    arcs_.push_back({to, cap, cost});
    adj_[to].push_back(arcs_.size());
    arcs_.push_back({from, 0, -cost});
    return arcs_.size() - 2;
  }

  Flow flow_on(std::size_t arc) const { return arcs_[arc ^ 1].cap; }

  // Sends up to `required` units; all arc costs must be nonnegative.
  std::pair<Flow, Cost> solve(std::size_t s, std::size_t t, Flow required) {
    Flow flow = 0;
    Cost cost = 0;
    while (flow < required && dijkstra(s, t)) {
      while (flow < required && levels(s, t)) {
        std::fill(iter_.begin(), iter_.end(), 0);
        while (flow < required) {
          Flow pushed = push(s, t, required - flow);
          if (pushed == 0) break;
          flow += pushed;
          cost += pushed * (potential_[t] - potential_[s]);
        }
      }
    }
    return {flow, cost};
  }

 private:
  struct Arc {
    std::size_t to;
    Flow cap;
    Cost cost;
  };

  Cost reduced(std::size_t from, const Arc& a) const {
    return a.cost + potential_[from] - potential_[a.to];
  }

  bool dijkstra(std::size_t s, std::size_t t) {
    constexpr Cost kInf = std::numeric_limits<Cost>::max() / 4;
    std::vector<Cost> dist(adj_.size(), kInf);
    using Item = std::pair<Cost, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[s] = 0;
    heap.push({0, s});
    while (!heap.empty()) {
      auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      for (std::size_t id : adj_[u]) {
        const Arc& a = arcs_[id];
        if (a.cap <= 0) continue;
        Cost nd = d + reduced(u, a);
        if (nd < dist[a.to]) {
          dist[a.to] = nd;
          heap.push({nd, a.to});
        }
      }
    }
    if (dist[t] >= kInf) return false;
    for (std::size_t v = 0; v < adj_.size(); ++v) potential_[v] += std::min(dist[v], dist[t]);
    return true;
  }

  // BFS levels over admissible arcs (positive residual, zero reduced cost).
  bool levels(std::size_t s, std::size_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop();
      for (std::size_t id : adj_[u]) {
        const Arc& a = arcs_[id];
        if (a.cap > 0 && reduced(u, a) == 0 && level_[a.to] < 0) {
          level_[a.to] = level_[u] + 1;
          q.push(a.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  // Iterative DFS for one augmenting path in the level graph.
  Flow push(std::size_t s, std::size_t t, Flow limit) {
    std::vector<std::size_t> path;  // arc ids
    std::size_t u = s;
    while (true) {
      if (u == t) {
        Flow f = limit;
        for (std::size_t id : path) f = std::min(f, arcs_[id].cap);
        for (std::size_t id : path) {
          arcs_[id].cap -= f;
          arcs_[id ^ 1].cap += f;
        }
        return f;
      }
      bool advanced = false;
      for (std::size_t& i = iter_[u]; i < adj_[u].size(); ++i) {
        std::size_t id = adj_[u][i];
        const Arc& a = arcs_[id];
        if (a.cap > 0 && reduced(u, a) == 0 && level_[a.to] == level_[u] + 1) {
          path.push_back(id);
          u = a.to;
          advanced = true;
          break;
        }
      }
      if (advanced) continue;
      if (path.empty()) return 0;
      // Dead end: retreat and skip the arc that led here.
      level_[u] = -1;
      std::size_t back = path.back();
      path.pop_back();
      u = arcs_[back ^ 1].to;
      ++iter_[u];
    }
  }

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Arc> arcs_;
  std::vector<Cost> potential_;
  std::vector<int> level_;
  std::vector<std::size_t> iter_;
};

Cost weight_of(const RequestTrace& trace, std::size_t i) {
  return i == 0 ? 0 : trace.weight(trace[i - 1]);
}

Cost distance(const RequestTrace& trace, std::size_t i, std::size_t j) {
  if (i != 0 && trace[i - 1] == trace[j - 1]) return 0;
  return weight_of(trace, i);
}

void require_servers(std::size_t k) {
  if (k < 1) throw DomainError("number of servers must be >= 1");
}

}  // namespace

OptSchedule opt_flow(const RequestTrace& trace, std::size_t k, const FlowOptions& options) {
  require_servers(k);
  const std::size_t n = trace.size();
  if (n > options.max_requests) {
    throw CapacityError("opt_flow: " + std::to_string(n) + " requests exceeds the cap of " +
                        std::to_string(options.max_requests) +
                        "; use the farthest-in-future solver for paging traces or a shorter trace");
  }
  OptSchedule schedule;
  schedule.predecessor.assign(n + 1, 0);
  if (n == 0) return schedule;

  // Matching network. A_i (i = 0..N-1) supplies request i's server, B_j
  // (j = 1..N) demands one. Serving j from the same node is free; only the
  // next occurrence needs a direct arc. Any other pairing costs w(r_i) and is
  // routed through the chain C_{i+1} -> ... -> C_j -> B_j.
  const std::size_t src = 0, sink = 1;
  auto A = [&](std::size_t i) { return 2 + i; };
  auto B = [&](std::size_t j) { return 2 + n + (j - 1); };
  auto C = [&](std::size_t j) { return 2 + 2 * n + (j - 1); };
  MinCostFlow mcf(2 + 3 * n);

  const auto servers = static_cast<MinCostFlow::Flow>(k);
  std::vector<std::size_t> next(n + 1, 0);
  {
    std::vector<std::size_t> last(trace.num_nodes(), 0);
    for (std::size_t j = n; j >= 1; --j) {
      next[j] = last[index(trace[j - 1])];
      last[index(trace[j - 1])] = j;
    }
  }
  std::vector<std::size_t> same_arc(n, SIZE_MAX), chain_in(n, SIZE_MAX), chain_out(n + 1, SIZE_MAX);
  for (std::size_t i = 0; i < n; ++i) {
    const MinCostFlow::Flow cap = i == 0 ? servers : 1;
    mcf.add_edge(src, A(i), cap, 0);
    if (i > 0 && next[i] != 0) same_arc[i] = mcf.add_edge(A(i), B(next[i]), 1, 0);
    chain_in[i] = mcf.add_edge(A(i), C(i + 1), cap, weight_of(trace, i));
  }
  for (std::size_t j = 1; j <= n; ++j) {
    if (j < n) mcf.add_edge(C(j), C(j + 1), servers + static_cast<MinCostFlow::Flow>(n), 0);
    chain_out[j] = mcf.add_edge(C(j), B(j), 1, 0);
    mcf.add_edge(B(j), sink, 1, 0);
  }

  auto [flow, cost] = mcf.solve(src, sink, static_cast<MinCostFlow::Flow>(n));
  if (flow != static_cast<MinCostFlow::Flow>(n)) {
    throw std::logic_error("opt_flow: matching network is not saturated");
  }

  // Decompose: direct arcs first, then pair chain entries with chain exits.
  std::vector<std::pair<std::size_t, MinCostFlow::Flow>> open;  // (i, units)
  for (std::size_t i = 1; i < n; ++i) {
    if (same_arc[i] != SIZE_MAX && mcf.flow_on(same_arc[i]) > 0) schedule.predecessor[next[i]] = i;
  }
  for (std::size_t j = 1; j <= n; ++j) {
    if (MinCostFlow::Flow units = mcf.flow_on(chain_in[j - 1]); units > 0) open.push_back({j - 1, units});
    if (mcf.flow_on(chain_out[j]) > 0) {
      auto& top = open.back();
      schedule.predecessor[j] = top.first;
      if (--top.second == 0) open.pop_back();
    }
  }
  schedule.cost = schedule_cost(schedule, trace);
  if (schedule.cost != cost) throw std::logic_error("opt_flow: schedule cost disagrees with flow cost");
  return schedule;
}

Cost schedule_cost(const OptSchedule& schedule, const RequestTrace& trace) {
  Cost total = 0;
  for (std::size_t j = 1; j < schedule.predecessor.size(); ++j) {
    total += distance(trace, schedule.predecessor[j], j);
  }
  return total;
}

bool is_valid_schedule(const OptSchedule& schedule, const RequestTrace& trace, std::size_t k) {
  const std::size_t n = trace.size();
  if (schedule.predecessor.size() != n + 1) return false;
  std::vector<std::size_t> uses(n + 1, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = schedule.predecessor[j];
    if (i >= j) return false;
    ++uses[i];
  }
  if (uses[0] > k) return false;
  for (std::size_t i = 1; i <= n; ++i) {
    if (uses[i] > 1) return false;
  }
  return true;
}

Cost opt_belady(const RequestTrace& trace, std::size_t k) {
  require_servers(k);
  if (!trace.is_paging()) throw DomainError("opt_belady requires a unit-weight trace");
  const std::size_t n = trace.size();
  constexpr std::size_t kNever = SIZE_MAX;
  std::vector<std::size_t> next_use(n, kNever);
  {
    std::vector<std::size_t> last(trace.num_nodes(), kNever);
    for (std::size_t t = n; t-- > 0;) {
      next_use[t] = last[index(trace[t])];
      last[index(trace[t])] = t;
    }
  }
  std::vector<std::size_t> key(trace.num_nodes(), kNever);
  std::vector<bool> cached(trace.num_nodes(), false);
  std::set<std::pair<std::size_t, std::uint32_t>> by_next;  // (next use, node)
  Cost cost = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t v = index(trace[t]);
    if (cached[v]) {
      by_next.erase({key[v], static_cast<std::uint32_t>(v)});
    } else {
      if (by_next.size() == k) {
        auto victim = std::prev(by_next.end());
        cached[victim->second] = false;
        by_next.erase(victim);
        ++cost;
      }
      cached[v] = true;
    }
    key[v] = next_use[t];
    by_next.insert({key[v], static_cast<std::uint32_t>(v)});
  }
  return cost;
}

Cost opt_bruteforce(const RequestTrace& trace, std::size_t k) {
  require_servers(k);
  if (trace.size() > 12 || k > 4) {
    throw CapacityError("opt_bruteforce: limited to N <= 12 requests and k <= 4 servers");
  }
  constexpr std::uint32_t kUnplaced = UINT32_MAX;
  using State = std::vector<std::uint32_t>;  // sorted server positions
  std::map<std::pair<std::size_t, State>, Cost> memo;

  auto solve = [&](auto& self, std::size_t t, const State& state) -> Cost {
    if (t == trace.size()) return 0;
    auto found = memo.find({t, state});
    if (found != memo.end()) return found->second;
    const auto v = static_cast<std::uint32_t>(index(trace[t]));
    Cost best = std::numeric_limits<Cost>::max();
    if (std::find(state.begin(), state.end(), v) != state.end()) {
      best = self(self, t + 1, state);
    } else {
      for (std::size_t s = 0; s < state.size(); ++s) {
        if (s > 0 && state[s] == state[s - 1]) continue;
        State next = state;
        next[s] = v;
        std::sort(next.begin(), next.end());
        const Cost step = state[s] == kUnplaced ? 0 : trace.weight(node(state[s]));
        best = std::min(best, step + self(self, t + 1, next));
      }
    }
    memo.emplace(std::pair{t, state}, best);
    return best;
  };
  return solve(solve, 0, State(k, kUnplaced));
}

Cost opt_single_server(const RequestTrace& trace) {
  Cost cost = 0;
  for (std::size_t t = 1; t < trace.size(); ++t) {
    if (trace[t] != trace[t - 1]) cost += trace.weight(trace[t - 1]);
  }
  return cost;
}

}  // namespace kserver
