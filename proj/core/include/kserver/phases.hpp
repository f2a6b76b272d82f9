#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "kserver/rational.hpp"
#include "kserver/trace.hpp"

namespace kserver {

// Greedy left-to-right tiling of a trace into maximal substrings that request
// at most k distinct nodes.
struct PhasePartition {
  std::size_t k = 0;
  std::vector<std::size_t> boundaries;  // start index of each phase
  // new_requests[p] for phase p >= 1 (0-based): distinct nodes of phase p that
  // do not occur in phase p-1. new_requests[0] is 0 and never counted.
  std::vector<std::size_t> new_requests;
  std::vector<std::size_t> distinct;  // distinct nodes per phase

  std::size_t num_phases() const { return boundaries.size(); }
  // Number of phases minus one (0 for an empty trace).
  std::size_t P() const { return boundaries.empty() ? 0 : boundaries.size() - 1; }
  std::size_t total_new() const;
  // Average new requests per phase after the first. Defined as 0 when P = 0;
  // check avenew_defined() before treating it as meaningful.
  Rational avenew() const;
  bool avenew_defined() const { return P() > 0; }
};

PhasePartition partition(const RequestTrace& trace, std::size_t k);

// Shrink property: with k' = ceil(k + 2*avenew(k)), P(k') <= 3/4 P(k).
// nullopt when P(k) = 0.
std::optional<bool> verify_phase_shrink(const RequestTrace& trace, std::size_t k);

// Exact harmonic number H_n. Exact up to n = 10^4; beyond that, the rational
// nearest to ln n + gamma + 1/(2n) - 1/(12 n^2) at double precision.
Rational harmonic(std::size_t n);

// sum over phases p >= 1 of m_p * (H_k - H_{m_p} + 1).
Rational mark_upper_bound(const PhasePartition& p);

// max(0, (k - h + avenew) * P / 2).
Rational opt_phase_lower_bound(const PhasePartition& p, std::size_t h);

}  // namespace kserver
