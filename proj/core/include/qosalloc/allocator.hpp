#pragma once

#include <span>

#include "qosalloc/scenario.hpp"

// Per-frame power and bandwidth allocation under the effective-bandwidth QoS
// constraint, plus the large-antenna closed forms and resource bounds.
//
// The allocation problem separates across users, so everything here works on
// one user at a time: minimise P + rho·P^cw·W subject to
// achievable_packets(P, W, alpha, g) = s.
namespace qosalloc {

struct Allocation {
  int user_id = -1;
  double transmit_power = 0.0;  ///< P^t [W]
  double bandwidth = 0.0;       ///< W [Hz]
  double target = 0.0;          ///< s [packets/frame]
};

struct PowerBreakdown {
  double total = 0.0;              ///< P_tot [W]
  double transmit = 0.0;           ///< sum of P^t [W], before PA losses
  double bandwidth = 0.0;          ///< sum of W [Hz]
  double circuit_bandwidth = 0.0;  ///< P^cw · sum W [W]
  double circuit_static = 0.0;     ///< P_0^c [W]
};

struct ResourceBounds {
  double transmit_power = 0.0;  ///< upper bound on max_n sum_k P^t_k(n) [W]
  double bandwidth = 0.0;       ///< upper bound on max_n sum_k W_k(n) [Hz]
};

/// min{Q, T_f·E^B}.
double two_state_target(double backlog, double effective_bw, double frame_duration);

/// Objective of the per-user problem: P + rho·P^cw·W.
double allocation_cost(const Allocation& a, const SystemParams& params);

/// Exact minimiser of the per-user problem for instantaneous gain g.
/// Eliminates P through the rate constraint and minimises the remaining
/// convex cost of W by golden-section search on log W, then bisection on its
/// derivative. Throws SolverError if either stage fails to converge.
Allocation min_power_alloc(double target, double gain, double small_scale,
                           const SystemParams& params);

/// P^tw: minimiser over r > 0 of (r/rho + P^cw) / log2(1 + alpha·N_t·r/N_0),
/// the optimal power-to-bandwidth ratio once the channel has hardened.
double ptw_ratio(double gain, int antennas, const SystemParams& params);

/// Large-antenna optimum:
///   W* = u·s / (Phi·T_D·log2(1 + alpha·N_t·P^tw/N_0)),  P* = P^tw·W*.
Allocation closed_form_alloc(double target, double gain, int antennas, double ptw,
                             const SystemParams& params);

/// P_tot = (1/rho)·sum P^t + P^cw·sum W + P_0^c.
PowerBreakdown total_power(std::span<const Allocation> allocs, const SystemParams& params);

/// Average power when every user is served at (1 - eps_D)·lambda_k packets
/// per frame with the hardened-channel optimum; also the minimum achievable
/// as the delay bound grows without limit.
double avg_power_lower_bound(std::span<const UserLink> users, int antennas,
                             const SystemParams& params, double loss_prob);

/// Upper bounds on the per-frame maxima of sum P^t and sum W, reached when
/// every buffer holds at least T_f·E^B packets:
///   sum_k P^tw_k·u·T_f·ln(1/eps)/(Phi·T_D·D^q) / (log2(1 + alpha_k N_t P^tw_k/N_0)
///         · ln(T_f·ln(1/eps)/(lambda_k·D^q) + 1))
/// and the same expression without the P^tw_k factor for bandwidth.
ResourceBounds required_resource_bounds(std::span<const UserLink> users, int antennas,
                                        const SystemParams& params);

}  // namespace qosalloc
