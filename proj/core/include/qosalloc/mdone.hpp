#pragma once

#include <cstddef>
#include <vector>

// Stationary analytics of a Poisson-arrival queue drained at a constant
// rate of s packets per frame (the M/D/1 queue with service time T_f/s).
namespace qosalloc::mdone {

struct MdoneSpec {
  double utilization = 0.0;     ///< gamma = lambda / s, in [0, 1)
  double service = 1.0;         ///< s [packets/frame]
  double frame_duration = 1.0;  ///< T_f [s]

  /// gamma = lambda / s. Throws InstabilityError when gamma >= 1.
  static MdoneSpec from_rates(double arrival_rate, double service, double frame_duration);

  /// Delay that corresponds to l packet service times: T_f·l/s.
  double threshold(std::size_t l) const { return frame_duration * static_cast<double>(l) / service; }
};

/// pi_0 .. pi_{l_max} via the embedded-chain balance, arranged as a
/// level-crossing sum of positive terms and evaluated in long double so the
/// tail stays accurate far below machine epsilon.
std::vector<double> stationary_pmf(double utilization, std::size_t l_max);

/// pi_0 .. pi_{l_max} from the classical alternating-sum closed form.
/// Loses accuracy quickly with l (terms grow like e^{l·gamma}); use only as a
/// cross-check for small l.
std::vector<double> stationary_pmf_closed_form(double utilization, std::size_t l_max);

/// Pr{Q > l} for l = 0 .. l_max, summed from the tail so small values keep
/// full relative precision.
std::vector<double> queue_length_ccdf(double utilization, std::size_t l_max);

/// Pr{D > T_f·l/s} = 1 - sum_{i=0}^{l} pi_i, the M/D/1 waiting-time CCDF at
/// whole multiples of the packet service time. Non-increasing in l, equal to
/// gamma at l = 0 and tending to 0.
double delay_ccdf(const MdoneSpec& spec, std::size_t l);

/// eta = 1 - pi_0 = gamma.
double buffer_nonempty_prob(double utilization);

/// Smallest L with 1 - sum_{l<=L} pi_l < tol.
std::size_t truncation_level(double utilization, double tol = 1e-12);

}  // namespace qosalloc::mdone
