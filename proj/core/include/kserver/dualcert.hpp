#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "kserver/strategies.hpp"
#include "kserver/trace.hpp"

namespace kserver {

// A solution (a, b) of the dual of the matching LP over requests 0..N, where
// request 0 is an artificial node of weight 0 at distance 0 from everything
// and request t+1 is trace[t].
//
//   maximize  -h*a[0] - sum_{1<=i<=N-1} a[i] + sum_{1<=j<=N} b[j]
//   s.t.      b[j] - a[i] <= d(r_i, r_j)   for 0 <= i < j <= N
//             a[i] >= 0
//
// with d(r_i, r_j) = 0 when r_i == r_j and w(r_i) otherwise. The constraints
// do not depend on h, so one solution lower-bounds OPT(h) for every h.
struct DualSolution {
  std::vector<Cost> a;  // a[0..N]
  std::vector<Cost> b;  // b[0..N]; b[0] is unused and kept at 0

  DualSolution() : a(1, 0), b(1, 0) {}
  explicit DualSolution(std::size_t n) : a(n + 1, 0), b(n + 1, 0) {}

  std::size_t num_requests() const { return a.size() - 1; }

  friend bool operator==(const DualSolution&, const DualSolution&) = default;
};

// One member of the served multiset S: the dual index of the request a server
// last served, and the request at which that server last moved.
struct ServedEntry {
  std::size_t request = 0;
  std::size_t moved_at = 0;

  friend bool operator==(const ServedEntry&, const ServedEntry&) = default;
};

// Aggregates of the dual after processing a request; enough to evaluate the
// potential bound for any h.
struct StepSummary {
  Cost cost = 0;      // distance travelled so far
  Cost a0 = 0;        // a[0]
  Cost sum_a = 0;     // sum_{1<=i<=N-1} a[i]
  Cost sum_b = 0;     // sum_{1<=j<=N} b[j]
  Cost served_b = 0;  // sum over S of b[moved_at + 1]
};

struct CertifiedRun {
  std::size_t k = 0;
  SimulationResult result;
  DualSolution dual;
  std::vector<ServedEntry> served;  // final S, indexed by server id
  std::vector<StepSummary> steps;   // steps[n] after request n, n = 0..N
  std::vector<Cost> raise;          // raise[n]: uniform dual raise at request n
  std::vector<std::size_t> left_at;  // step at which request i left S, N+1 if never
  // S after each request (steps 0..N); empty unless requested.
  std::vector<std::vector<ServedEntry>> history;
  // Count of steps where a label identity failed (0 <= H, L <= H, and
  // b[i+1] <= w(r_i) for i in S). Always 0 for a correct run.
  std::size_t invariant_failures = 0;
};

struct CertifyOptions {
  RelabelPolicy policy = RelabelPolicy::MaxLower;
  bool record_history = false;
};

// GreedyDual in primal-dual form. Server labels are never stored: they are
// read off the dual as H = w(r_i) - b[i+1] and L = w(r_i) - b[i^- + 1]. The
// eviction rule and tie-breaks match run_greedydual, so the event logs agree.
// Every step re-checks the label identities on all k servers: O(N k) time.
CertifiedRun run_greedydual_certified(std::size_t k, const RequestTrace& trace,
                                      const CertifyOptions& options = {});

// -h*a[0] - sum_{1<=i<=N-1} a[i] + sum_{1<=j<=N} b[j].
Cost dual_cost(const DualSolution& dual, std::size_t h);

struct FeasibilityViolation {
  enum class Kind { NegativeA, Constraint };
  Kind kind = Kind::Constraint;
  std::size_t i = 0;
  std::size_t j = 0;  // Constraint only
  Cost lhs = 0;       // b[j] - a[i], or a[i]
  Cost rhs = 0;       // d(r_i, r_j), or 0

  friend bool operator==(const FeasibilityViolation&, const FeasibilityViolation&) = default;
};

// Every violated constraint, by exhaustive O(N^2) enumeration. Both checks
// throw DomainError when the dual and the trace differ in length.
std::vector<FeasibilityViolation> check_feasibility(const DualSolution& dual,
                                                    const RequestTrace& trace);

// O(N) check: for each i only the tightest constraint is tested (largest later
// b on the same node, largest later b on any other node). Empty iff feasible;
// reports at most two violations per i.
std::vector<FeasibilityViolation> check_feasibility_fast(const DualSolution& dual,
                                                         const RequestTrace& trace);

// b[1] >= b[2] >= ... >= b[N] >= 0.
bool is_monotone(const DualSolution& dual);

// Exact check of (k-h+1)*cost <= k*||(a,b)||_h - (k-h+1)*sum_{i in S} b[i^-+1].
// Evaluated on the final dual; with `every_step` also on each StepSummary.
// Requires 1 <= h <= k.
bool check_primal_dual_bound(const CertifiedRun& run, std::size_t k, std::size_t h,
                             bool every_step = true);

// The dual as it stood right after request n.
DualSolution dual_at_step(const CertifiedRun& run, std::size_t n);

struct ServedSnapshot {
  std::size_t step = 0;
  std::vector<ServedEntry> served;  // indexed by server id

  friend bool operator==(const ServedSnapshot&, const ServedSnapshot&) = default;
};

// Plain-text certificate: enough for an external checker to re-verify
// feasibility and the potential bound against the trace. `snapshots` holds S
// after every request when the run recorded history, otherwise only the final S.
struct Certificate {
  std::size_t k = 0;
  Cost cost = 0;
  DualSolution dual;
  std::vector<ServedSnapshot> snapshots;

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

Certificate make_certificate(const CertifiedRun& run);
void write_certificate(std::ostream& out, const Certificate& cert);
// Throws ParseError on malformed input.
Certificate read_certificate(std::istream& in);

struct CertificateVerdict {
  bool feasible = false;
  bool bound_holds = false;
  // With a full per-step history: each step changes exactly one server, and
  // the moves it implies add up to the claimed cost. Vacuously true otherwise.
  bool history_consistent = false;
  bool ok() const { return feasible && bound_holds && history_consistent; }
};

// Re-verifies a certificate from scratch against `trace` for one h.
CertificateVerdict verify_certificate(const Certificate& cert, const RequestTrace& trace,
                                      std::size_t h);

}  // namespace kserver
