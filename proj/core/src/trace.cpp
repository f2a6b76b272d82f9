#include "kserver/trace.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "kserver/errors.hpp"

namespace kserver {

RequestTrace::RequestTrace(std::vector<NodeId> requests, std::vector<Cost> weights,
                           std::vector<std::string> labels)
    : requests_(std::move(requests)), weights_(std::move(weights)), labels_(std::move(labels)) {
  if (labels_.size() != weights_.size()) {
    throw DomainError("trace: label and weight tables differ in size");
  }
  for (Cost w : weights_) {
    if (w < 1) throw DomainError("trace: weights must be >= 1");
  }
  // Ids must be dense and interned in order of first appearance.
  std::size_t next_fresh = 0;
  for (NodeId v : requests_) {
    if (index(v) >= weights_.size()) throw DomainError("trace: request to node without weight");
    if (index(v) == next_fresh) {
      ++next_fresh;
    } else if (index(v) > next_fresh) {
      throw DomainError("trace: node ids are not in first-appearance order");
    }
  }
  if (next_fresh != weights_.size()) throw DomainError("trace: weight table has unrequested nodes");
}

bool RequestTrace::is_paging() const noexcept {
  for (Cost w : weights_) {
    if (w != 1) return false;
  }
  return true;
}

namespace {

class Interner {
 public:
  // Returns the id for `label`, creating it with weight `w` if unseen.
  NodeId intern(std::string_view label, Cost w, bool explicit_weight, std::size_t line) {
    auto it = ids_.find(std::string(label));
    if (it == ids_.end()) {
      NodeId v = node(weights_.size());
      ids_.emplace(std::string(label), v);
      labels_.emplace_back(label);
      weights_.push_back(w);
      explicit_.push_back(explicit_weight);
      return v;
    }
    NodeId v = it->second;
    if (explicit_weight) {
      if (explicit_[index(v)] && weights_[index(v)] != w) {
        throw ParseError(line, "conflicting weight for node '" + std::string(label) + "'");
      }
      if (!explicit_[index(v)]) {
        // Earlier bare mentions only carried the provisional default.
        weights_[index(v)] = w;
        explicit_[index(v)] = true;
      }
    }
    return v;
  }

  RequestTrace finish(std::vector<NodeId> requests) {
    return RequestTrace(std::move(requests), std::move(weights_), std::move(labels_));
  }

 private:
  std::unordered_map<std::string, NodeId> ids_;
  std::vector<std::string> labels_;
  std::vector<Cost> weights_;
  std::vector<bool> explicit_;
};

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

RequestTrace parse_trace(std::istream& in) {
  Interner interner;
  std::vector<NodeId> requests;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body(line);
    if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    auto tokens = split_ws(body);
    if (tokens.empty()) continue;
    if (tokens.size() > 2) throw ParseError(lineno, "expected `<label> [<weight>]`");

    Cost w = 1;
    bool explicit_weight = tokens.size() == 2;
    if (explicit_weight) {
      std::string_view tok = tokens[1];
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), w);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError(lineno, "weight '" + std::string(tok) + "' is not an integer");
      }
      if (w <= 0) {
        throw DomainError("line " + std::to_string(lineno) + ": weight must be positive, got " +
                          std::string(tok));
      }
    }
    requests.push_back(interner.intern(tokens[0], w, explicit_weight, lineno));
  }
  return interner.finish(std::move(requests));
}

RequestTrace parse_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace(in);
}

RequestTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open trace file '" + path + "'");
  return parse_trace(in);
}

void write_trace(std::ostream& out, const RequestTrace& trace) {
  std::vector<bool> written(trace.num_nodes(), false);
  for (NodeId v : trace.requests()) {
    out << trace.label(v);
    if (!written[index(v)]) {
      out << ' ' << trace.weight(v);
      written[index(v)] = true;
    }
    out << '\n';
  }
}

std::string serialize(const RequestTrace& trace) {
  std::ostringstream out;
  write_trace(out, trace);
  return out.str();
}

namespace {

// Interns raw node numbers in first-appearance order, labelling them "n<raw>".
RequestTrace intern_raw(const std::vector<std::size_t>& raw, const std::vector<Cost>& raw_weights) {
  std::vector<std::int64_t> id_of(raw_weights.size(), -1);
  std::vector<NodeId> requests;
  std::vector<Cost> weights;
  std::vector<std::string> labels;
  requests.reserve(raw.size());
  for (std::size_t r : raw) {
    if (id_of[r] < 0) {
      id_of[r] = static_cast<std::int64_t>(weights.size());
      weights.push_back(raw_weights[r]);
      labels.push_back("n" + std::to_string(r));
    }
    requests.push_back(node(static_cast<std::size_t>(id_of[r])));
  }
  return RequestTrace(std::move(requests), std::move(weights), std::move(labels));
}

}  // namespace

RequestTrace generate_random(std::size_t num_nodes, std::size_t length, Cost weight_max,
                             std::uint64_t seed) {
  if (num_nodes < 1) throw DomainError("generate_random: num_nodes must be >= 1");
  if (weight_max < 1) throw DomainError("generate_random: weight_max must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Cost> weight_dist(1, weight_max);
  std::vector<Cost> raw_weights(num_nodes);
  for (auto& w : raw_weights) w = weight_dist(rng);
  std::uniform_int_distribution<std::size_t> node_dist(0, num_nodes - 1);
  std::vector<std::size_t> raw(length);
  for (auto& r : raw) r = node_dist(rng);
  return intern_raw(raw, raw_weights);
}

RequestTrace generate_cyclic(std::size_t num_nodes, std::size_t length) {
  if (num_nodes < 2) throw DomainError("generate_cyclic: num_nodes must be >= 2");
  std::vector<std::size_t> raw(length);
  for (std::size_t t = 0; t < length; ++t) raw[t] = t % num_nodes;
  return intern_raw(raw, std::vector<Cost>(num_nodes, 1));
}

std::size_t distinct_count(std::span<const NodeId> requests) {
  std::size_t max_id = 0;
  for (NodeId v : requests) max_id = std::max(max_id, index(v) + 1);
  std::vector<bool> seen(max_id, false);
  std::size_t count = 0;
  for (NodeId v : requests) {
    if (!seen[index(v)]) {
      seen[index(v)] = true;
      ++count;
    }
  }
  return count;
}

}  // namespace kserver
