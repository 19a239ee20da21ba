#pragma once

#include <cstddef>
#include <vector>

namespace qosalloc {

/// Frame timing, link-budget and power-model constants. SI units throughout.
struct SystemParams {
  double frame_duration = 1e-4;   ///< T_f [s]
  double dl_phase = 5e-5;         ///< T_D [s]
  double coherence_time = 2e-3;   ///< T_c [s], a multiple of T_f
  double packet_size = 160.0;     ///< u [bits]
  double rate_gap = 0.9;          ///< Phi, (0, 1]
  double noise_psd = 0.0;         ///< N_0 [W/Hz]
  int antennas = 8;               ///< N_t
  double pa_efficiency = 0.5;     ///< rho, (0, 1]
  double circuit_per_bw = 0.0;    ///< P^cw [W/Hz] for the current antenna count
  double circuit_static = 0.0;    ///< P_0^c [W] for the current antenna count

  /// Throws ConfigError when an invariant is broken.
  void validate() const;

  /// Number of frames in one coherence block.
  std::size_t frames_per_block() const;

  /// Copy with a different antenna count. The circuit terms scale linearly
  /// with N_t, as in the reference power model (72·N_t mW/MHz, 136·N_t mW).
  SystemParams with_antennas(int n) const;

  /// Reference parameter set: T_f = 0.1 ms, T_D = 0.05 ms, T_c = 2 ms,
  /// u = 20 bytes, Phi = 0.9, N_0 = -173 dBm/Hz, rho = 0.5.
  static SystemParams reference(int antennas = 8);
};

/// End-to-end QoS budget before it is split into a queueing share.
struct QosBudget {
  double e2e_delay = 1e-3;       ///< D_max [s]
  double loss_prob = 1e-7;       ///< epsilon_D
  double backhaul_delay = 1e-4;  ///< D_B [s], charged only to cell-edge users
};

/// Per-user queueing-delay requirement and the derived effective bandwidth.
struct QueueQoS {
  double delay_bound = 0.0;     ///< D^q_max [s]
  double violation_prob = 0.0;  ///< epsilon^q
  double qos_exponent = 0.0;    ///< theta (0 when the user has no arrivals)
  double effective_bw = 0.0;    ///< E^B [packets/s]
};

struct UserLink {
  int user_id = 0;
  double distance = 0.0;          ///< d_k [m]
  double large_scale_gain = 0.0;  ///< alpha_k (linear)
  std::vector<int> nearby;        ///< A_k
  double arrival_rate = 0.0;      ///< lambda_k [packets/frame]
  bool is_edge = false;
  QueueQoS qos;
};

/// Highway layout. Users fill the lanes round-robin, evenly spaced per lane
/// and centred on the base station, which sits beside the first lane.
struct TopologySpec {
  int users = 160;
  int lanes = 8;
  double lane_width = 4.0;       ///< [m]
  double spacing = 15.0;         ///< d_u, per-lane vehicle spacing [m]
  double comm_range = 100.0;     ///< [m]
  double cell_size = 400.0;      ///< inter-site distance [m]
  double bs_setback = 0.0;       ///< BS distance from the road edge [m]
  double source_rate = 20.0;     ///< uploads per vehicle [packets/s]
  int nearby_count = 0;          ///< > 0 forces |A_k| to the closest N users
};

/// Queueing share of the delay budget: D^q = D_max - T_f (- D_B at the
/// cell edge) and epsilon^q = epsilon_D / 2. The exponent and effective
/// bandwidth are left at zero. Throws ConfigError if the budget is spent.
QueueQoS derive_queue_qos(double e2e_delay, double loss_prob, double frame_duration,
                          double backhaul_delay, bool is_edge);

/// Large-scale gain from the 35.3 + 37.6·log10(d) dB path-loss law.
/// The law is read as a loss, so the returned gain is below one for d > 1 m.
double path_loss(double distance_m);

/// Lays out the users, resolves each A_k, and fills lambda_k, the edge flag
/// and the queueing QoS (including theta and E^B).
std::vector<UserLink> build_highway_topology(const TopologySpec& topo, const SystemParams& sys,
                                             const QosBudget& budget);

}  // namespace qosalloc
