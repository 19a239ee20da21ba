#include "qosalloc/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "qosalloc/errors.hpp"

namespace qosalloc {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kObjectiveTol = 1e-10;
const double kLogWidthTol = std::sqrt(kObjectiveTol);
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

struct Bracket {
  double lo;
  double hi;
};

// Golden-section search for the minimum of f on [lo, hi].
Bracket golden_section(const std::function<double(double)>& f, double lo, double hi,
                       const char* what) {
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < kMaxIterations; ++it) {
    if (hi - lo < kLogWidthTol) return {lo, hi};
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = f(d);
    }
  }
  throw SolverError(std::string(what) + ": golden-section search did not converge");
}

// Per-user cost after eliminating P through the rate constraint:
//   C(W) = a·W·(e^{k/W} - 1) + b·W
// with a = N_0/(alpha·g), k = u·s·ln2/(Phi·T_D), b = rho·P^cw.
struct ReducedCost {
  double a;
  double k;
  double b;

  double power(double w) const { return a * w * std::expm1(k / w); }
  double operator()(double w) const { return power(w) + b * w; }
  double slope(double w) const {
    const double x = k / w;
    return a * (std::expm1(x) - x * std::exp(x)) + b;
  }
};

}  // namespace

double two_state_target(double backlog, double effective_bw, double frame_duration) {
  return std::min(backlog, frame_duration * effective_bw);
}

double allocation_cost(const Allocation& a, const SystemParams& params) {
  return a.transmit_power + params.pa_efficiency * params.circuit_per_bw * a.bandwidth;
}

Allocation min_power_alloc(double target, double gain, double small_scale,
                           const SystemParams& params) {
  if (target < 0.0) throw DomainError("min_power_alloc: target must be non-negative");
  if (!(gain > 0.0) || !(small_scale > 0.0))
    throw DomainError("min_power_alloc: channel gains must be positive");
  Allocation out;
  out.target = target;
  if (target == 0.0) return out;

  const ReducedCost cost{params.noise_psd / (gain * small_scale),
                         params.packet_size * target * std::numbers::ln2 /
                             (params.rate_gap * params.dl_phase),
                         params.pa_efficiency * params.circuit_per_bw};

  // Spectral-efficiency exponent x = k/W searched over [1e-9, 700].
  const double t_lo = std::log(cost.k / 700.0);
  const double t_hi = std::log(cost.k / 1e-9);
  const Bracket br = golden_section([&](double t) { return cost(std::exp(t)); }, t_lo, t_hi,
                                    "min_power_alloc");

  // Bisect on the sign of C' in a slightly widened golden bracket.
  double w_lo = std::exp(std::max(t_lo, br.lo - 1e-3));
  double w_hi = std::exp(std::min(t_hi, br.hi + 1e-3));
  if (cost.slope(w_lo) > 0.0 || cost.slope(w_hi) < 0.0)
    throw SolverError("min_power_alloc: optimum outside the search bracket");
  int it = 0;
  for (; it < kMaxIterations; ++it) {
    const double mid = 0.5 * (w_lo + w_hi);
    if (mid <= w_lo || mid >= w_hi) break;
    if (cost.slope(mid) < 0.0)
      w_lo = mid;
    else
      w_hi = mid;
  }
  if (it == kMaxIterations) throw SolverError("min_power_alloc: bisection did not converge");

  const double w = cost(w_lo) <= cost(w_hi) ? w_lo : w_hi;
  out.bandwidth = w;
  out.transmit_power = cost.power(w);
  return out;
}

double ptw_ratio(double gain, int antennas, const SystemParams& params) {
  if (!(gain > 0.0)) throw DomainError("ptw_ratio: gain must be positive");
  if (antennas < 1) throw DomainError("ptw_ratio: antenna count must be at least 1");
  const double rho = params.pa_efficiency;
  const double pcw = params.circuit_per_bw;
  const double c = gain * antennas / params.noise_psd;
  const auto f = [&](double r) { return (r / rho + pcw) / std::log2(1.0 + c * r); };

  const Bracket br = golden_section([&](double t) { return f(std::exp(t)); }, std::log(1e-18),
                                    std::log(1e6), "ptw_ratio");
  const double r0 = std::exp(0.5 * (br.lo + br.hi));

  // Newton polish on the stationarity condition written in x = ln(1 + c·r):
  //   e^x·(x - 1) + 1 = c·rho·P^cw.
  const double target = c * rho * pcw;
  double x = std::log1p(c * r0);
  for (int it = 0;; ++it) {
    if (it == kMaxIterations) throw SolverError("ptw_ratio: Newton polish did not converge");
    const double ex = std::exp(x);
    const double step = (ex * (x - 1.0) + 1.0 - target) / (x * ex);
    x -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * x) break;
  }
  const double r = std::expm1(x) / c;

  // |f'(r)| < 1e-10 · f(r) / r.
  const double log_term = std::log2(1.0 + c * r);
  const double slope = (1.0 / rho) / log_term -
                       (r / rho + pcw) * c / ((1.0 + c * r) * std::numbers::ln2 * log_term * log_term);
  if (!(std::abs(slope) * r < 1e-10 * f(r)))
    throw SolverError("ptw_ratio: stationarity residual above tolerance");
  return r;
}

Allocation closed_form_alloc(double target, double gain, int antennas, double ptw,
                             const SystemParams& params) {
  if (target < 0.0) throw DomainError("closed_form_alloc: target must be non-negative");
  if (!(gain > 0.0) || antennas < 1 || !(ptw > 0.0))
    throw DomainError("closed_form_alloc: gain, antennas and P^tw must be positive");
  Allocation out;
  out.target = target;
  if (target == 0.0) return out;
  const double spectral = std::log2(1.0 + gain * antennas * ptw / params.noise_psd);
  out.bandwidth = params.packet_size * target / (params.rate_gap * params.dl_phase * spectral);
  out.transmit_power = ptw * out.bandwidth;
  return out;
}

PowerBreakdown total_power(std::span<const Allocation> allocs, const SystemParams& params) {
  PowerBreakdown p;
  for (const Allocation& a : allocs) {
    p.transmit += a.transmit_power;
    p.bandwidth += a.bandwidth;
  }
  p.circuit_bandwidth = params.circuit_per_bw * p.bandwidth;
  p.circuit_static = params.circuit_static;
  p.total = p.transmit / params.pa_efficiency + p.circuit_bandwidth + p.circuit_static;
  return p;
}

double avg_power_lower_bound(std::span<const UserLink> users, int antennas,
                             const SystemParams& params, double loss_prob) {
  double total = params.circuit_static;
  for (const UserLink& u : users) {
    if (u.arrival_rate == 0.0) continue;
    const double ptw = ptw_ratio(u.large_scale_gain, antennas, params);
    const double spectral = std::log2(1.0 + u.large_scale_gain * antennas * ptw / params.noise_psd);
    total += (ptw / params.pa_efficiency + params.circuit_per_bw) * params.packet_size *
             (1.0 - loss_prob) * u.arrival_rate / (params.rate_gap * params.dl_phase * spectral);
  }
  return total;
}

ResourceBounds required_resource_bounds(std::span<const UserLink> users, int antennas,
                                        const SystemParams& params) {
  ResourceBounds b;
  const double tf = params.frame_duration;
  for (const UserLink& u : users) {
    if (u.arrival_rate == 0.0) continue;
    const double dq = u.qos.delay_bound;
    const double log_inv_eps = -std::log(u.qos.violation_prob);
    const double ptw = ptw_ratio(u.large_scale_gain, antennas, params);
    const double spectral = std::log2(1.0 + u.large_scale_gain * antennas * ptw / params.noise_psd);
    const double exponent = std::log(tf * log_inv_eps / (u.arrival_rate * dq) + 1.0);
    const double bw = params.packet_size * tf * log_inv_eps /
                      (params.rate_gap * params.dl_phase * dq) / (spectral * exponent);
    b.bandwidth += bw;
    b.transmit_power += ptw * bw;
  }
  return b;
}

}  // namespace qosalloc
