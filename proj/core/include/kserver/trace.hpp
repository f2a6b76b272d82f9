#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kserver {

// Dense node index, assigned in order of first appearance in a trace.
enum class NodeId : std::uint32_t {};

constexpr std::size_t index(NodeId v) noexcept { return static_cast<std::size_t>(v); }
constexpr NodeId node(std::size_t i) noexcept { return static_cast<NodeId>(i); }

// Abstract cost unit. All weights, labels, dual values and costs are integral.
using Cost = std::int64_t;

// An immutable sequence of node requests with a positive integer weight per
// node. Moving a server off node u costs weight(u); a paging trace has all
// weights equal to 1.
class RequestTrace {
 public:
  RequestTrace() = default;

  // Builds a trace from already-interned data. Throws DomainError if a request
  // refers to a node without a weight, if a weight is < 1, if labels and
  // weights disagree in size, or if ids are not in first-appearance order.
  RequestTrace(std::vector<NodeId> requests, std::vector<Cost> weights,
               std::vector<std::string> labels);

  std::size_t size() const noexcept { return requests_.size(); }
  bool empty() const noexcept { return requests_.empty(); }
  std::size_t num_nodes() const noexcept { return weights_.size(); }

  NodeId operator[](std::size_t t) const { return requests_[t]; }
  std::span<const NodeId> requests() const noexcept { return requests_; }
  std::span<const Cost> weights() const noexcept { return weights_; }

  Cost weight(NodeId v) const { return weights_[index(v)]; }
  const std::string& label(NodeId v) const { return labels_[index(v)]; }

  // True when every node has weight 1.
  bool is_paging() const noexcept;

  friend bool operator==(const RequestTrace&, const RequestTrace&) = default;

 private:
  std::vector<NodeId> requests_;
  std::vector<Cost> weights_;
  std::vector<std::string> labels_;
};

// Parses the line-oriented trace format: `<label> [<weight>]` per line, `#`
// starts a comment, blank lines are skipped. A node's weight is fixed by its
// first explicit mention (default 1); a later conflicting weight is a
// ParseError. A weight <= 0 is a DomainError.
RequestTrace parse_trace(std::istream& in);
RequestTrace parse_trace(std::string_view text);
RequestTrace load_trace(const std::string& path);

// Writes `trace` in the format accepted by parse_trace. The weight is written
// on the first request to each node only.
void write_trace(std::ostream& out, const RequestTrace& trace);
std::string serialize(const RequestTrace& trace);

// Uniform random requests over `num_nodes` nodes, weights uniform in
// [1, weight_max]. Deterministic in `seed`.
RequestTrace generate_random(std::size_t num_nodes, std::size_t length, Cost weight_max,
                             std::uint64_t seed);

// 0, 1, ..., num_nodes-1, 0, 1, ... for `length` requests, unit weights.
RequestTrace generate_cyclic(std::size_t num_nodes, std::size_t length);

std::size_t distinct_count(std::span<const NodeId> requests);

}  // namespace kserver
