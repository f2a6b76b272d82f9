#include "kserver/phases.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "kserver/errors.hpp"

namespace kserver {

std::size_t PhasePartition::total_new() const {
  std::size_t total = 0;
  for (std::size_t p = 1; p < new_requests.size(); ++p) total += new_requests[p];
  return total;
}

Rational PhasePartition::avenew() const {
  if (P() == 0) return Rational(0);
  return Rational(static_cast<long long>(total_new()), static_cast<long long>(P()));
}

PhasePartition partition(const RequestTrace& trace, std::size_t k) {
  if (k < 1) throw DomainError("partition: k must be >= 1");
  PhasePartition out;
  out.k = k;
  if (trace.empty()) return out;

  // stamp[v] = last phase in which v was requested (+1; 0 = never).
  std::vector<std::size_t> stamp(trace.num_nodes(), 0);
  std::size_t phase = 0;  // 1-based id of the current phase
  std::size_t distinct = 0;
  std::size_t fresh = 0;
  auto open_phase = [&](std::size_t t) {
    if (phase > 0) {
      out.distinct.push_back(distinct);
      out.new_requests.push_back(phase == 1 ? 0 : fresh);
    }
    ++phase;
    out.boundaries.push_back(t);
    distinct = 0;
    fresh = 0;
  };

  open_phase(0);
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const std::size_t v = index(trace[t]);
    if (stamp[v] == phase) continue;
    if (distinct == k) open_phase(t);
    if (stamp[v] != phase - 1 || phase == 1) ++fresh;
    stamp[v] = phase;
    ++distinct;
  }
  out.distinct.push_back(distinct);
  out.new_requests.push_back(phase == 1 ? 0 : fresh);
  return out;
}

std::optional<bool> verify_phase_shrink(const RequestTrace& trace, std::size_t k) {
  const PhasePartition base = partition(trace, k);
  if (base.P() == 0) return std::nullopt;
  const Rational target = Rational(static_cast<long long>(k)) + 2 * base.avenew();
  const auto k_prime = static_cast<std::size_t>(ceil_to_int(target));
  const PhasePartition wider = partition(trace, k_prime);
  return 4 * wider.P() <= 3 * base.P();
}

namespace {

constexpr std::size_t kExactHarmonicLimit = 10000;

// Prefix table of exact harmonic numbers, grown on demand.
class HarmonicTable {
 public:
  Rational get(std::size_t n) {
    std::lock_guard lock(mu_);
    if (values_.empty()) values_.push_back(Rational(0));
    while (values_.size() <= n) {
      const auto m = static_cast<long long>(values_.size());
      values_.push_back(values_.back() + Rational(1, m));
    }
    return values_[n];
  }

 private:
  std::mutex mu_;
  std::vector<Rational> values_;
};

HarmonicTable& table() {
  static HarmonicTable t;
  return t;
}

}  // namespace

Rational harmonic(std::size_t n) {
  if (n <= kExactHarmonicLimit) return table().get(n);
  const double x = static_cast<double>(n);
  const double approx = std::log(x) + 0.57721566490153286061 + 1.0 / (2.0 * x) - 1.0 / (12.0 * x * x);
  return Rational(approx);
}

Rational mark_upper_bound(const PhasePartition& p) {
  // sum_p m_p (H_k - H_{m_p} + 1) = (sum m_p)(H_k + 1) - sum_p m_p H_{m_p}
  std::map<std::size_t, std::size_t> multiplicity;
  std::size_t total = 0;
  for (std::size_t i = 1; i < p.new_requests.size(); ++i) {
    const std::size_t m = p.new_requests[i];
    ++multiplicity[m];
    total += m;
  }
  if (total == 0) return Rational(0);
  Rational bound = Rational(static_cast<long long>(total)) * (harmonic(p.k) + 1);
  for (const auto& [m, count] : multiplicity) {
    if (m == 0) continue;
    bound -= Rational(static_cast<long long>(m * count)) * harmonic(m);
  }
  return bound;
}

Rational opt_phase_lower_bound(const PhasePartition& p, std::size_t h) {
  if (h < 1) throw DomainError("opt_phase_lower_bound: h must be >= 1");
  Rational value = (Rational(static_cast<long long>(p.k)) - Rational(static_cast<long long>(h)) +
                    p.avenew()) *
                   Rational(static_cast<long long>(p.P())) / 2;
  return value < 0 ? Rational(0) : value;
}

}  // namespace kserver
