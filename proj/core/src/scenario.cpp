#include "qosalloc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qosalloc/effective_bandwidth.hpp"
#include "qosalloc/errors.hpp"
#include "qosalloc/units.hpp"

namespace qosalloc {

void SystemParams::validate() const {
  if (!(frame_duration > 0.0)) throw ConfigError("system.frame_duration must be positive");
  if (!(dl_phase > 0.0) || dl_phase > frame_duration)
    throw ConfigError("system.dl_phase must lie in (0, frame_duration]");
  if (!(coherence_time > 0.0)) throw ConfigError("system.coherence_time must be positive");
  const double blocks = coherence_time / frame_duration;
  if (std::abs(blocks - std::round(blocks)) > 1e-9 * blocks || std::round(blocks) < 1.0)
    throw ConfigError("system.coherence_time must be a whole number of frames");
  if (!(packet_size > 0.0)) throw ConfigError("system.packet_size must be positive");
  if (!(rate_gap > 0.0 && rate_gap <= 1.0)) throw ConfigError("system.rate_gap must lie in (0, 1]");
  if (!(noise_psd > 0.0)) throw ConfigError("system.noise_psd must be positive");
  if (antennas < 1) throw ConfigError("system.antennas must be at least 1");
  if (!(pa_efficiency > 0.0 && pa_efficiency <= 1.0))
    throw ConfigError("system.pa_efficiency must lie in (0, 1]");
  if (!(circuit_per_bw > 0.0)) throw ConfigError("system.circuit_per_bw must be positive");
  if (circuit_static < 0.0) throw ConfigError("system.circuit_static must be non-negative");
}

std::size_t SystemParams::frames_per_block() const {
  return static_cast<std::size_t>(std::llround(coherence_time / frame_duration));
}

SystemParams SystemParams::with_antennas(int n) const {
  if (n < 1) throw ConfigError("antenna count must be at least 1");
  SystemParams out = *this;
  const double scale = static_cast<double>(n) / static_cast<double>(antennas);
  out.antennas = n;
  out.circuit_per_bw = circuit_per_bw * scale;
  out.circuit_static = circuit_static * scale;
  return out;
}

SystemParams SystemParams::reference(int antennas) {
  SystemParams p;
  p.frame_duration = units::ms_to_s(0.1);
  p.dl_phase = units::ms_to_s(0.05);
  p.coherence_time = units::ms_to_s(2.0);
  p.packet_size = units::bytes_to_bits(20.0);
  p.rate_gap = 0.9;
  p.noise_psd = units::dbm_to_watt(-173.0);
  p.antennas = antennas;
  p.pa_efficiency = 0.5;
  p.circuit_per_bw = units::mw_per_mhz_to_w_per_hz(72.0) * antennas;
  p.circuit_static = units::mw_to_w(136.0) * antennas;
  return p;
}

QueueQoS derive_queue_qos(double e2e_delay, double loss_prob, double frame_duration,
                          double backhaul_delay, bool is_edge) {
  if (!(loss_prob > 0.0 && loss_prob < 1.0))
    throw ConfigError("qos.loss_prob must lie in (0, 1)");
  if (backhaul_delay < 0.0) throw ConfigError("qos.backhaul_delay must be non-negative");
  const double budget = e2e_delay - frame_duration - (is_edge ? backhaul_delay : 0.0);
  if (!(budget > 0.0))
    throw ConfigError("qos.e2e_delay leaves no queueing budget after frame" +
                      std::string(is_edge ? " and backhaul" : "") + " delay");
  QueueQoS q;
  q.delay_bound = budget;
  q.violation_prob = loss_prob / 2.0;
  return q;
}

double path_loss(double distance_m) {
  if (!(distance_m > 0.0)) throw DomainError("path_loss: distance must be positive");
  const double loss_db = 35.3 + 37.6 * std::log10(distance_m);
  return std::pow(10.0, -loss_db / 10.0);
}

namespace {

struct Position {
  double x;
  double y;
};

std::vector<Position> lay_out(const TopologySpec& topo) {
  const int per_lane = (topo.users + topo.lanes - 1) / topo.lanes;
  const double centre = 0.5 * static_cast<double>(per_lane - 1);
  std::vector<Position> pos(static_cast<std::size_t>(topo.users));
  for (int i = 0; i < topo.users; ++i) {
    const int lane = i % topo.lanes;
    const int slot = i / topo.lanes;
    pos[static_cast<std::size_t>(i)] = {(slot - centre) * topo.spacing,
                                        topo.bs_setback + (lane + 0.5) * topo.lane_width};
  }
  return pos;
}

double separation(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

std::vector<UserLink> build_highway_topology(const TopologySpec& topo, const SystemParams& sys,
                                             const QosBudget& budget) {
  if (topo.users < 1) throw ConfigError("topology.users must be at least 1");
  if (topo.lanes < 1) throw ConfigError("topology.lanes must be at least 1");
  if (!(topo.spacing > 0.0)) throw ConfigError("topology.spacing must be positive");
  if (!(topo.lane_width > 0.0)) throw ConfigError("topology.lane_width must be positive");
  if (!(topo.comm_range > 0.0)) throw ConfigError("topology.comm_range must be positive");
  if (!(topo.cell_size > 0.0)) throw ConfigError("topology.cell_size must be positive");
  if (topo.bs_setback < 0.0) throw ConfigError("topology.bs_setback must be non-negative");
  if (topo.source_rate < 0.0) throw ConfigError("topology.source_rate must be non-negative");
  if (topo.nearby_count < 0 || topo.nearby_count > topo.users - 1)
    throw ConfigError("topology.nearby_count must lie in [0, users - 1]");

  const auto pos = lay_out(topo);
  const Position bs{0.0, 0.0};
  std::vector<UserLink> users(pos.size());

  for (std::size_t k = 0; k < pos.size(); ++k) {
    UserLink& u = users[k];
    u.user_id = static_cast<int>(k);
    u.distance = separation(pos[k], bs);
    u.large_scale_gain = path_loss(u.distance);

    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < pos.size(); ++j)
      if (j != k) others.push_back(j);

    if (topo.nearby_count > 0) {
      std::stable_sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
        return separation(pos[a], pos[k]) < separation(pos[b], pos[k]);
      });
      others.resize(static_cast<std::size_t>(topo.nearby_count));
      std::sort(others.begin(), others.end());
    } else {
      std::erase_if(others,
                    [&](std::size_t j) { return !(separation(pos[j], pos[k]) < topo.comm_range); });
    }
    for (std::size_t j : others) u.nearby.push_back(static_cast<int>(j));
    // A lone vehicle still has a queue fed by its own uploads.
    if (u.nearby.empty()) u.nearby.push_back(u.user_id);

    u.arrival_rate =
        static_cast<double>(u.nearby.size()) * topo.source_rate * sys.frame_duration;
    u.is_edge = std::abs(pos[k].x) + topo.comm_range > 0.5 * topo.cell_size;
    u.qos = derive_queue_qos(budget.e2e_delay, budget.loss_prob, sys.frame_duration,
                             budget.backhaul_delay, u.is_edge);
    u.qos = with_effective_bandwidth(u.qos, u.arrival_rate, sys.frame_duration);
  }
  return users;
}

}  // namespace qosalloc
