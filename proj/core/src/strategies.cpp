#include "kserver/strategies.hpp"

#include <cassert>
#include <random>
#include <set>
#include <tuple>

#include "kserver/errors.hpp"

namespace kserver {

StrategySpec parse_strategy(std::string_view name) {
  if (name == "lru") return {StrategyKind::Lru};
  if (name == "fifo") return {StrategyKind::Fifo};
  if (name == "fwf") return {StrategyKind::Fwf};
  if (name == "balance") return {StrategyKind::Balance};
  if (name == "mark") return {StrategyKind::Mark};
  if (name == "greedydual" || name == "greedydual:max") {
    return {StrategyKind::GreedyDual, RelabelPolicy::MaxLower};
  }
  if (name == "greedydual:min") return {StrategyKind::GreedyDual, RelabelPolicy::MinLower};
  throw DomainError("unknown strategy '" + std::string(name) + "'");
}

std::string to_string(const StrategySpec& spec) {
  switch (spec.kind) {
    case StrategyKind::Lru: return "lru";
    case StrategyKind::Fifo: return "fifo";
    case StrategyKind::Fwf: return "fwf";
    case StrategyKind::Balance: return "balance";
    case StrategyKind::Mark: return "mark";
    case StrategyKind::GreedyDual:
      return spec.relabel == RelabelPolicy::MaxLower ? "greedydual:max" : "greedydual:min";
  }
  return "?";
}

bool is_conservative(const StrategySpec& spec) {
  switch (spec.kind) {
    case StrategyKind::Lru:
    case StrategyKind::Fifo:
    case StrategyKind::Fwf: return true;
    default: return false;
  }
}

std::vector<std::pair<std::size_t, NodeId>> eviction_sequence(const SimulationResult& result) {
  std::vector<std::pair<std::size_t, NodeId>> out;
  for (const Event& e : result.events) {
    if (e.kind == EventKind::Move) out.emplace_back(e.request, e.evicted);
  }
  return out;
}

namespace {

using ServerIndex = std::uint32_t;

class Recorder {
 public:
  Recorder(std::size_t k, EventLog log, std::size_t expected) : log_(log) {
    result_.k = k;
    if (log_ == EventLog::Full) result_.events.reserve(expected);
  }

  void record(std::size_t t, EventKind kind, ServerIndex s, NodeId evicted = {}, Cost cost = 0) {
    result_.total_cost += cost;
    if (kind == EventKind::Move) ++result_.moves;
    if (kind == EventKind::Flush) ++result_.flushes;
    if (log_ == EventLog::Full) result_.events.push_back({t, kind, s, evicted, cost});
  }

  SimulationResult finish(std::vector<std::optional<NodeId>> servers) {
    result_.final_servers = std::move(servers);
    return std::move(result_);
  }

 private:
  EventLog log_;
  SimulationResult result_;
};

// Server placement bookkeeping shared by the demand-driven strategies.
class Servers {
 public:
  Servers(std::size_t k, std::size_t num_nodes) : pos_(k), at_(num_nodes, kNoServer) {}

  std::size_t k() const { return pos_.size(); }
  ServerIndex on(NodeId v) const { return at_[index(v)]; }
  const std::optional<NodeId>& position(ServerIndex s) const { return pos_[s]; }

  bool has_fresh() const { return next_fresh_ < pos_.size(); }
  ServerIndex take_fresh() { return static_cast<ServerIndex>(next_fresh_++); }

  void place(ServerIndex s, NodeId v) {
    if (pos_[s]) at_[index(*pos_[s])] = kNoServer;
    pos_[s] = v;
    at_[index(v)] = s;
  }

  void remove(ServerIndex s) {
    if (pos_[s]) at_[index(*pos_[s])] = kNoServer;
    pos_[s].reset();
  }

  std::vector<std::optional<NodeId>> snapshot() const { return pos_; }

 private:
  std::vector<std::optional<NodeId>> pos_;
  std::vector<ServerIndex> at_;
  std::size_t next_fresh_ = 0;
};

// Hit / free placement / eviction loop. A policy supplies the eviction rule
// through touched(), placed() and victim().
template <class Policy>
SimulationResult drive(Policy& policy, std::size_t k, const RequestTrace& trace, EventLog log) {
  Servers servers(k, trace.num_nodes());
  Recorder rec(k, log, trace.size());
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const NodeId v = trace[t];
    if (ServerIndex s = servers.on(v); s != kNoServer) {
      rec.record(t, EventKind::Hit, s);
      policy.touched(s, t, v);
      continue;
    }
    if (servers.has_fresh()) {
      ServerIndex s = servers.take_fresh();
      servers.place(s, v);
      rec.record(t, EventKind::FreePlace, s);
      policy.placed(s, t, v, std::nullopt);
      continue;
    }
    ServerIndex s = policy.victim(t, v);
    const NodeId u = *servers.position(s);
    servers.place(s, v);
    rec.record(t, EventKind::Move, s, u, trace.weight(u));
    policy.placed(s, t, v, u);
  }
  return rec.finish(servers.snapshot());
}

// Evicts the server with the minimal key; keys are (stamp, id).
class StampPolicy {
 public:
  enum class Stamp { LastTouch, LastMove };

  StampPolicy(std::size_t k, Stamp stamp) : stamp_(stamp), key_(k, 0) {}

  void touched(ServerIndex s, std::size_t t, NodeId) {
    if (stamp_ == Stamp::LastTouch) rekey(s, t);
  }
  void placed(ServerIndex s, std::size_t t, NodeId, std::optional<NodeId>) {
    order_.erase({key_[s], s});
    key_[s] = t;
    order_.insert({t, s});
  }
  ServerIndex victim(std::size_t, NodeId) { return order_.begin()->second; }

 private:
  void rekey(ServerIndex s, std::size_t t) {
    order_.erase({key_[s], s});
    key_[s] = t;
    order_.insert({t, s});
  }

  Stamp stamp_;
  std::vector<std::size_t> key_;
  std::set<std::pair<std::size_t, ServerIndex>> order_;
};

// Moves the server on u minimizing w(u) + W(u), W the weight it has vacated.
class BalancePolicy {
 public:
  BalancePolicy(std::size_t k, const RequestTrace& trace)
      : trace_(trace), travelled_(k, 0), key_(k, 0) {}

  void touched(ServerIndex, std::size_t, NodeId) {}
  void placed(ServerIndex s, std::size_t, NodeId v, std::optional<NodeId> from) {
    order_.erase({key_[s], s});
    if (from) travelled_[s] += trace_.weight(*from);
    key_[s] = trace_.weight(v) + travelled_[s];
    order_.insert({key_[s], s});
  }
  ServerIndex victim(std::size_t, NodeId) { return order_.begin()->second; }

 private:
  const RequestTrace& trace_;
  std::vector<Cost> travelled_;
  std::vector<Cost> key_;
  std::set<std::pair<Cost, ServerIndex>> order_;
};

// Randomized marking: evicts uniformly among servers whose node has not been
// requested in the current phase; a new phase starts when all are marked.
class MarkPolicy {
 public:
  MarkPolicy(std::size_t k, std::uint64_t seed) : slot_(k, kUnlisted), rng_(seed) {
    unmarked_.reserve(k);
  }

  void touched(ServerIndex s, std::size_t, NodeId) { mark(s); }
  void placed(ServerIndex s, std::size_t, NodeId, std::optional<NodeId>) { mark(s); }

  ServerIndex victim(std::size_t, NodeId) {
    if (unmarked_.empty()) {
      for (ServerIndex s = 0; s < slot_.size(); ++s) {
        slot_[s] = unmarked_.size();
        unmarked_.push_back(s);
      }
    }
    std::uniform_int_distribution<std::size_t> pick(0, unmarked_.size() - 1);
    return unmarked_[pick(rng_)];
  }

 private:
  static constexpr std::size_t kUnlisted = SIZE_MAX;

  void mark(ServerIndex s) {
    std::size_t i = slot_[s];
    if (i == kUnlisted) return;
    ServerIndex last = unmarked_.back();
    unmarked_[i] = last;
    slot_[last] = i;
    unmarked_.pop_back();
    slot_[s] = kUnlisted;
  }

  std::vector<std::size_t> slot_;
  std::vector<ServerIndex> unmarked_;
  std::mt19937_64 rng_;
};

// GreedyDual labels stored relative to a global offset: the effective label
// is raw - offset, so a uniform lowering by delta is offset += delta.
class GreedyDualPolicy {
 public:
  GreedyDualPolicy(std::size_t k, const RequestTrace& trace, RelabelPolicy policy)
      : trace_(trace), policy_(policy), low_(k, 0), high_(k, 0), touch_(k, 0), move_(k, 0) {}

  void touched(ServerIndex s, std::size_t t, NodeId v) {
    erase(s);
    high_[s] = trace_.weight(v) + offset_;
    touch_[s] = t;
    insert(s);
  }

  void placed(ServerIndex s, std::size_t t, NodeId v, std::optional<NodeId>) {
    erase(s);
    low_[s] = high_[s] = trace_.weight(v) + offset_;
    touch_[s] = move_[s] = t;
    insert(s);
  }

  ServerIndex victim(std::size_t, NodeId) {
    ServerIndex s = std::get<2>(*order_.begin());
    Cost delta = 0;
    if (policy_ == RelabelPolicy::MaxLower) {
      delta = high_[s] - offset_;
    } else {
      delta = std::max<Cost>(0, low_[s] - offset_);
    }
    offset_ += delta;
    assert(low_[s] - offset_ <= 0);
    return s;
  }

 private:
  using Key = std::tuple<Cost, std::size_t, ServerIndex>;

  Key key(ServerIndex s) const {
    if (policy_ == RelabelPolicy::MaxLower) return {high_[s], touch_[s], s};
    return {low_[s], move_[s], s};
  }
  void erase(ServerIndex s) {
    if (live_.size() > s && live_[s]) order_.erase(key(s));
  }
  void insert(ServerIndex s) {
    if (live_.size() <= s) live_.resize(s + 1, false);
    live_[s] = true;
    order_.insert(key(s));
  }

  const RequestTrace& trace_;
  RelabelPolicy policy_;
  Cost offset_ = 0;
  std::vector<Cost> low_, high_;
  std::vector<std::size_t> touch_, move_;
  std::vector<bool> live_;
  std::set<Key> order_;
};

SimulationResult run_fwf(std::size_t k, const RequestTrace& trace, EventLog log) {
  Servers servers(k, trace.num_nodes());
  Recorder rec(k, log, trace.size());
  std::vector<ServerIndex> flushed;  // reusable servers, lowest id last
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const NodeId v = trace[t];
    if (ServerIndex s = servers.on(v); s != kNoServer) {
      rec.record(t, EventKind::Hit, s);
      continue;
    }
    if (servers.has_fresh()) {
      ServerIndex s = servers.take_fresh();
      servers.place(s, v);
      rec.record(t, EventKind::FreePlace, s);
      continue;
    }
    if (flushed.empty()) {
      Cost flush_cost = 0;
      for (ServerIndex s = 0; s < k; ++s) {
        flush_cost += trace.weight(*servers.position(s));
        servers.remove(s);
      }
      rec.record(t, EventKind::Flush, kNoServer, {}, flush_cost);
      for (ServerIndex s = static_cast<ServerIndex>(k); s-- > 0;) flushed.push_back(s);
    }
    ServerIndex s = flushed.back();
    flushed.pop_back();
    servers.place(s, v);
    rec.record(t, EventKind::Reload, s);
  }
  return rec.finish(servers.snapshot());
}

void require_servers(std::size_t k) {
  if (k < 1) throw DomainError("number of servers must be >= 1");
}

}  // namespace

SimulationResult run_greedydual(std::size_t k, const RequestTrace& trace, RelabelPolicy policy,
                                EventLog log) {
  require_servers(k);
  GreedyDualPolicy p(k, trace, policy);
  return drive(p, k, trace, log);
}

SimulationResult run(const StrategySpec& spec, std::size_t k, const RequestTrace& trace,
                     std::uint64_t seed, EventLog log) {
  require_servers(k);
  switch (spec.kind) {
    case StrategyKind::Lru: {
      StampPolicy p(k, StampPolicy::Stamp::LastTouch);
      return drive(p, k, trace, log);
    }
    case StrategyKind::Fifo: {
      StampPolicy p(k, StampPolicy::Stamp::LastMove);
      return drive(p, k, trace, log);
    }
    case StrategyKind::Fwf: return run_fwf(k, trace, log);
    case StrategyKind::Balance: {
      BalancePolicy p(k, trace);
      return drive(p, k, trace, log);
    }
    case StrategyKind::Mark: {
      MarkPolicy p(k, seed);
      return drive(p, k, trace, log);
    }
    case StrategyKind::GreedyDual: return run_greedydual(k, trace, spec.relabel, log);
  }
  throw DomainError("unhandled strategy");
}

}  // namespace kserver
