#pragma once

#include <cstddef>
#include <vector>

#include "kserver/trace.hpp"

namespace kserver {

// An optimal offline schedule in matching form: predecessor[j] (j = 1..N) is
// the request whose server serves request j next, using dual indexing
// (0 = artificial start, t+1 = trace[t]). predecessor[0] is unused.
struct OptSchedule {
  std::vector<std::size_t> predecessor;
  Cost cost = 0;
};

struct FlowOptions {
  std::size_t max_requests = 5000;
};

// Minimum-cost schedule with k servers, solved as min-cost flow by successive
// shortest paths with node potentials. Throws CapacityError past
// options.max_requests.
OptSchedule opt_flow(const RequestTrace& trace, std::size_t k, const FlowOptions& options = {});

// Farthest-in-future eviction; optimal for paging traces only. Throws
// DomainError on a weighted trace.
Cost opt_belady(const RequestTrace& trace, std::size_t k);

// Exhaustive search over every legal schedule. Test oracle; throws
// CapacityError unless N <= 12 and k <= 4.
Cost opt_bruteforce(const RequestTrace& trace, std::size_t k);

// OPT with a single server: every change of requested node pays the weight of
// the node being left.
Cost opt_single_server(const RequestTrace& trace);

// d(r_pred, r_j) summed over the schedule.
Cost schedule_cost(const OptSchedule& schedule, const RequestTrace& trace);

// predecessor[j] < j for all j, each i >= 1 used at most once, 0 at most k times.
bool is_valid_schedule(const OptSchedule& schedule, const RequestTrace& trace, std::size_t k);

}  // namespace kserver
