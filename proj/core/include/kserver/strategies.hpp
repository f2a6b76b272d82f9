#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kserver/trace.hpp"

namespace kserver {

// Fixed default seed for every randomized component. Never derived from time.
inline constexpr std::uint64_t kDefaultSeed = 0x6b5e72766572ULL;

enum class StrategyKind { Lru, Fifo, Fwf, Balance, Mark, GreedyDual };

// How far GreedyDual lowers labels when it must evict. Any amount in
// [max(0, min L), min H] is legal; these are the two endpoints.
enum class RelabelPolicy {
  MaxLower,  // lower by min H; reduces to LRU on paging traces
  MinLower,  // lower by min L; reduces to FIFO on paging traces
};

struct StrategySpec {
  StrategyKind kind = StrategyKind::Lru;
  RelabelPolicy relabel = RelabelPolicy::MaxLower;  // GreedyDual only

  friend bool operator==(const StrategySpec&, const StrategySpec&) = default;
};

// Accepts lru, fifo, fwf, balance, mark, greedydual, greedydual:max,
// greedydual:min. Throws DomainError otherwise.
StrategySpec parse_strategy(std::string_view name);
std::string to_string(const StrategySpec& spec);

// LRU, FIFO and FWF. Mark is a marking strategy (at most k moves per k-phase)
// but not conservative: a window with k distinct nodes can straddle a phase
// boundary and see more than k moves.
bool is_conservative(const StrategySpec& spec);

enum class EventKind : std::uint8_t {
  Hit,        // requested node already served; cost 0
  FreePlace,  // a server that never served is placed; cost 0
  Move,       // a server moves from `evicted` to the requested node
  Flush,      // FWF removes every server from the graph; cost = sum of served weights
  Reload,     // FWF places a flushed server; already paid for by the flush
};

inline constexpr std::uint32_t kNoServer = UINT32_MAX;

struct Event {
  std::size_t request = 0;  // 0-based index into the trace
  EventKind kind = EventKind::Hit;
  std::uint32_t server = kNoServer;
  NodeId evicted{};  // Move only
  Cost cost = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

enum class EventLog { Full, CostOnly };

struct SimulationResult {
  std::size_t k = 0;
  std::vector<Event> events;  // empty under EventLog::CostOnly
  Cost total_cost = 0;
  std::size_t moves = 0;    // number of Move events
  std::size_t flushes = 0;  // number of Flush events
  std::vector<std::optional<NodeId>> final_servers;  // indexed by server id
};

// The (request, evicted node) pairs of all Move events, in order.
std::vector<std::pair<std::size_t, NodeId>> eviction_sequence(const SimulationResult& result);

// Runs `spec` with k servers under the free-initial-placement convention.
// Only Mark consumes `seed`.
SimulationResult run(const StrategySpec& spec, std::size_t k, const RequestTrace& trace,
                     std::uint64_t seed = kDefaultSeed, EventLog log = EventLog::Full);

// GreedyDual in label form: per-server labels L <= H, lowered uniformly
// through a global offset when an eviction is needed. Ties among eviction
// candidates go to minimal H, then least recently touched, then lowest server
// id (MaxLower); or minimal L, then least recently moved, then lowest id
// (MinLower).
SimulationResult run_greedydual(std::size_t k, const RequestTrace& trace,
                                RelabelPolicy policy = RelabelPolicy::MaxLower,
                                EventLog log = EventLog::Full);

}  // namespace kserver
