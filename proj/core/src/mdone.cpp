#include "qosalloc/mdone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qosalloc/errors.hpp"

namespace qosalloc::mdone {

namespace {

using Real = long double;

void check_stable(double utilization) {
  if (!(utilization >= 0.0)) throw DomainError("utilisation must be non-negative");
  if (!(utilization < 1.0)) throw InstabilityError("utilisation must be below 1 for a stationary queue");
}

// Poisson(gamma) pmf a_j and upper tails abar_j = sum_{i>=j} a_i for j <= n.
struct ArrivalTerms {
  std::vector<Real> pmf;
  std::vector<Real> upper;
};

ArrivalTerms arrival_terms(Real gamma, std::size_t n) {
  // Extra terms so that upper tails near n are complete.
  const std::size_t span = n + 64;
  ArrivalTerms t;
  t.pmf.resize(span + 1);
  t.pmf[0] = std::exp(-gamma);
  for (std::size_t j = 1; j <= span; ++j) t.pmf[j] = t.pmf[j - 1] * gamma / static_cast<Real>(j);
  t.upper.assign(span + 2, 0.0L);
  for (std::size_t j = span + 1; j-- > 0;) t.upper[j] = t.upper[j + 1] + t.pmf[j];
  t.upper[0] = 1.0L;
  return t;
}

// pi_j·a_0 = pi_0·abar_j + sum_{k=1}^{j-1} pi_k·abar_{j-k+1}, i.e. the
// probability flow down across the cut between j-1 and j equals the flow up.
std::vector<Real> level_crossing_pmf(Real gamma, std::size_t n) {
  std::vector<Real> pi(n + 1, 0.0L);
  pi[0] = 1.0L - gamma;
  if (gamma == 0.0L) return pi;
  const ArrivalTerms a = arrival_terms(gamma, n + 1);
  for (std::size_t j = 1; j <= n; ++j) {
    Real flow_up = pi[0] * a.upper[j];
    for (std::size_t k = 1; k < j; ++k) flow_up += pi[k] * a.upper[j - k + 1];
    pi[j] = flow_up / a.pmf[0];
  }
  return pi;
}

// First index at or after `from` whose mass is below `floor`.
std::size_t tail_extent(const std::vector<Real>& pi, std::size_t from, Real floor) {
  for (std::size_t j = from; j < pi.size(); ++j)
    if (pi[j] < floor) return j;
  return pi.size();
}

}  // namespace

MdoneSpec MdoneSpec::from_rates(double arrival_rate, double service, double frame_duration) {
  if (!(service > 0.0)) throw DomainError("service must be positive");
  if (!(frame_duration > 0.0)) throw DomainError("frame duration must be positive");
  if (arrival_rate < 0.0) throw DomainError("arrival rate must be non-negative");
  MdoneSpec spec{arrival_rate / service, service, frame_duration};
  check_stable(spec.utilization);
  return spec;
}

std::vector<double> stationary_pmf(double utilization, std::size_t l_max) {
  check_stable(utilization);
  const auto pi = level_crossing_pmf(utilization, l_max);
  return {pi.begin(), pi.end()};
}

std::vector<double> stationary_pmf_closed_form(double utilization, std::size_t l_max) {
  check_stable(utilization);
  const Real g = utilization;
  std::vector<double> out(l_max + 1, 0.0);
  out[0] = static_cast<double>(1.0L - g);
  if (l_max >= 1) out[1] = static_cast<double>((1.0L - g) * std::expm1(g));
  for (std::size_t l = 2; l <= l_max; ++l) {
    Real acc = std::exp(static_cast<Real>(l) * g);
    for (std::size_t i = 1; i < l; ++i) {
      const std::size_t m = l - i;
      const Real ig = static_cast<Real>(i) * g;
      // (i·g)^m / m! + (i·g)^{m-1} / (m-1)!
      const Real hi = std::pow(ig, static_cast<Real>(m)) / std::tgamma(static_cast<Real>(m + 1));
      const Real lo = std::pow(ig, static_cast<Real>(m - 1)) / std::tgamma(static_cast<Real>(m));
      const Real sign = (m % 2 == 0) ? 1.0L : -1.0L;
      acc += std::exp(ig) * sign * (hi + lo);
    }
    out[l] = static_cast<double>((1.0L - g) * acc);
  }
  return out;
}

std::vector<double> queue_length_ccdf(double utilization, std::size_t l_max) {
  check_stable(utilization);
  std::vector<double> out(l_max + 1, 0.0);
  if (utilization == 0.0) return out;

  // Grow the computed pmf until the unsummed remainder is negligible next to
  // the smallest requested tail.
  std::size_t n = std::max<std::size_t>(2 * l_max + 2, 64);
  std::vector<Real> pi = level_crossing_pmf(utilization, n);
  const Real floor =
      std::max(pi[l_max + 1] * 1e-24L, static_cast<Real>(std::numeric_limits<double>::denorm_min()));
  while (tail_extent(pi, l_max + 1, floor) == pi.size()) {
    if (n > (1u << 16)) throw SolverError("M/D/1 tail did not decay within 65536 states");
    n *= 2;
    pi = level_crossing_pmf(utilization, n);
  }
  const std::size_t end = tail_extent(pi, l_max + 1, floor);
  Real tail = 0.0L;
  for (std::size_t j = end; j-- > 0;) {
    if (j <= l_max) out[j] = static_cast<double>(tail);
    tail += pi[j];
  }
  return out;
}

double delay_ccdf(const MdoneSpec& spec, std::size_t l) {
  return queue_length_ccdf(spec.utilization, l)[l];
}

double buffer_nonempty_prob(double utilization) {
  check_stable(utilization);
  return utilization;
}

std::size_t truncation_level(double utilization, double tol) {
  check_stable(utilization);
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  std::size_t n = 64;
  while (true) {
    const auto ccdf = queue_length_ccdf(utilization, n);
    for (std::size_t l = 0; l <= n; ++l)
      if (ccdf[l] < tol) return l;
    if (n > (1u << 15)) throw SolverError("truncation level not found");
    n *= 2;
  }
}

}  // namespace qosalloc::mdone
