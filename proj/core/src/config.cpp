#include "qosalloc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "qosalloc/errors.hpp"
#include "qosalloc/units.hpp"

namespace qosalloc {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kKnownKeys = {
    "system.frame_duration_ms",
    "system.dl_phase_ms",
    "system.coherence_time_ms",
    "system.packet_size_bytes",
    "system.rate_gap",
    "system.noise_psd_dbm_per_hz",
    "system.antennas",
    "system.pa_efficiency",
    "system.circuit_per_bw_mw_per_mhz_per_antenna",
    "system.circuit_static_mw_per_antenna",
    "qos.e2e_delay_ms",
    "qos.loss_prob",
    "qos.backhaul_delay_ms",
    "topology.users",
    "topology.lanes",
    "topology.lane_width_m",
    "topology.spacing_m",
    "topology.comm_range_m",
    "topology.cell_size_m",
    "topology.bs_setback_m",
    "topology.source_rate_pps",
    "topology.nearby_count",
    "experiment.seed",
    "experiment.frames",
    "experiment.threads",
    "experiment.policy",
    "experiment.arrivals",
    "experiment.pooled",
    "experiment.tagged_user",
    "experiment.antenna_list",
    "experiment.loss_grid",
    "experiment.bound_antennas",
    "experiment.batches",
    "experiment.power_subsample",
};

class Reader {
public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <class T>
  void get(const std::string& key, T& out) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) return;
    out = convert<T>(key, *v);
  }

  template <class T, class F>
  void get(const std::string& key, double& out, F to_si) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) return;
    out = to_si(convert<double>(key, *v));
  }

  template <class T>
  void get_list(const std::string& key, std::vector<T>& out) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) return;
    out.clear();
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(convert<T>(key, trim(item)));
    if (out.empty()) throw ConfigError(key + ": empty list");
  }

private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  }

  template <class T>
  static T convert(const std::string& key, const std::string& raw) {
    const std::string text = trim(raw);
    if constexpr (std::is_same_v<T, bool>) {
      if (text == "true" || text == "1" || text == "yes") return true;
      if (text == "false" || text == "0" || text == "no") return false;
      throw ConfigError(key + ": expected a boolean, got '" + text + "'");
    } else if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else if constexpr (std::is_floating_point_v<T>) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != text.size())
        throw ConfigError(key + ": expected a number, got '" + text + "'");
      return static_cast<T>(v);
    } else {
      T v{};
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError(key + ": expected an integer, got '" + text + "'");
      return v;
    }
  }

  const pt::ptree& tree_;
};

void check_keys(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(section + ": key outside of a section");
    for (const auto& [key, value] : body) {
      const std::string path = section + "." + key;
      if (!kKnownKeys.contains(path)) throw ConfigError(path + ": unknown key");
    }
  }
}

ArrivalTiming parse_timing(const std::string& name) {
  if (name == "continuous") return ArrivalTiming::kContinuous;
  if (name == "frame-end") return ArrivalTiming::kFrameEnd;
  throw ConfigError("experiment.arrivals: expected continuous or frame-end, got '" + name + "'");
}

std::string timing_name(ArrivalTiming t) {
  return t == ArrivalTiming::kContinuous ? "continuous" : "frame-end";
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

void validate(const Config& cfg) {
  cfg.system.validate();
  derive_queue_qos(cfg.qos.e2e_delay, cfg.qos.loss_prob, cfg.system.frame_duration,
                   cfg.qos.backhaul_delay, true);
  const auto& e = cfg.experiment;
  if (e.frames < 1) throw ConfigError("experiment.frames must be at least 1");
  if (e.threads < 1) throw ConfigError("experiment.threads must be at least 1");
  if (e.batches < 2) throw ConfigError("experiment.batches must be at least 2");
  if (e.tagged_user < 0 || e.tagged_user >= cfg.topology.users)
    throw ConfigError("experiment.tagged_user must name an existing user");
  for (int n : e.antenna_list)
    if (n < 1) throw ConfigError("experiment.antenna_list entries must be positive");
  for (int n : e.bound_antennas)
    if (n < 1) throw ConfigError("experiment.bound_antennas entries must be positive");
  for (double eps : e.loss_grid)
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("experiment.loss_grid entries must lie in (0, 1)");
}

}  // namespace

Policy parse_policy(const std::string& name) {
  if (name == "finite") return Policy::kTwoStateFinite;
  if (name == "large-nt") return Policy::kTwoStateLargeNt;
  if (name == "constant-rate") return Policy::kConstantRate;
  throw ConfigError("policy: expected finite, large-nt or constant-rate, got '" + name + "'");
}

std::string policy_name(Policy p) {
  switch (p) {
    case Policy::kTwoStateFinite: return "finite";
    case Policy::kTwoStateLargeNt: return "large-nt";
    case Policy::kConstantRate: return "constant-rate";
  }
  return "unknown";
}

Config parse_config(std::istream& in, const std::string& source) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  check_keys(tree);
  const Reader r(tree);
  Config cfg;
  SystemParams& s = cfg.system;

  r.get<double>("system.frame_duration_ms", s.frame_duration, units::ms_to_s);
  r.get<double>("system.dl_phase_ms", s.dl_phase, units::ms_to_s);
  r.get<double>("system.coherence_time_ms", s.coherence_time, units::ms_to_s);
  r.get<double>("system.packet_size_bytes", s.packet_size, units::bytes_to_bits);
  r.get("system.rate_gap", s.rate_gap);
  r.get<double>("system.noise_psd_dbm_per_hz", s.noise_psd, units::dbm_to_watt);
  r.get("system.pa_efficiency", s.pa_efficiency);

  // Circuit terms are given per antenna; keep the defaults' per-antenna values
  // when only the antenna count changes.
  double per_bw = units::w_per_hz_to_mw_per_mhz(s.circuit_per_bw) / s.antennas;
  double per_static = units::w_to_mw(s.circuit_static) / s.antennas;
  r.get("system.antennas", s.antennas);
  if (s.antennas < 1) throw ConfigError("system.antennas must be at least 1");
  r.get("system.circuit_per_bw_mw_per_mhz_per_antenna", per_bw);
  r.get("system.circuit_static_mw_per_antenna", per_static);
  s.circuit_per_bw = units::mw_per_mhz_to_w_per_hz(per_bw) * s.antennas;
  s.circuit_static = units::mw_to_w(per_static) * s.antennas;

  r.get<double>("qos.e2e_delay_ms", cfg.qos.e2e_delay, units::ms_to_s);
  r.get("qos.loss_prob", cfg.qos.loss_prob);
  r.get<double>("qos.backhaul_delay_ms", cfg.qos.backhaul_delay, units::ms_to_s);

  TopologySpec& t = cfg.topology;
  r.get("topology.users", t.users);
  r.get("topology.lanes", t.lanes);
  r.get("topology.lane_width_m", t.lane_width);
  r.get("topology.spacing_m", t.spacing);
  r.get("topology.comm_range_m", t.comm_range);
  r.get("topology.cell_size_m", t.cell_size);
  r.get("topology.bs_setback_m", t.bs_setback);
  r.get("topology.source_rate_pps", t.source_rate);
  r.get("topology.nearby_count", t.nearby_count);

  ExperimentSpec& e = cfg.experiment;
  r.get("experiment.seed", e.seed);
  r.get("experiment.frames", e.frames);
  r.get("experiment.threads", e.threads);
  std::string name;
  r.get("experiment.policy", name);
  if (!name.empty()) e.policy = parse_policy(name);
  name.clear();
  r.get("experiment.arrivals", name);
  if (!name.empty()) e.timing = parse_timing(name);
  r.get("experiment.pooled", e.pooled);
  r.get("experiment.tagged_user", e.tagged_user);
  r.get_list("experiment.antenna_list", e.antenna_list);
  r.get_list("experiment.loss_grid", e.loss_grid);
  r.get_list("experiment.bound_antennas", e.bound_antennas);
  r.get("experiment.batches", e.batches);
  r.get("experiment.power_subsample", e.power_subsample);

  validate(cfg);
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  return parse_config(in, path);
}

std::string write_config(const Config& cfg) {
  const SystemParams& s = cfg.system;
  std::ostringstream os;
  os << std::setprecision(17);
  os << "[system]\n"
     << "frame_duration_ms = " << units::s_to_ms(s.frame_duration) << '\n'
     << "dl_phase_ms = " << units::s_to_ms(s.dl_phase) << '\n'
     << "coherence_time_ms = " << units::s_to_ms(s.coherence_time) << '\n'
     << "packet_size_bytes = " << units::bits_to_bytes(s.packet_size) << '\n'
     << "rate_gap = " << s.rate_gap << '\n'
     << "noise_psd_dbm_per_hz = " << units::watt_to_dbm(s.noise_psd) << '\n'
     << "antennas = " << s.antennas << '\n'
     << "pa_efficiency = " << s.pa_efficiency << '\n'
     << "circuit_per_bw_mw_per_mhz_per_antenna = "
     << units::w_per_hz_to_mw_per_mhz(s.circuit_per_bw) / s.antennas << '\n'
     << "circuit_static_mw_per_antenna = " << units::w_to_mw(s.circuit_static) / s.antennas << '\n';
  os << "\n[qos]\n"
     << "e2e_delay_ms = " << units::s_to_ms(cfg.qos.e2e_delay) << '\n'
     << "loss_prob = " << cfg.qos.loss_prob << '\n'
     << "backhaul_delay_ms = " << units::s_to_ms(cfg.qos.backhaul_delay) << '\n';
  const TopologySpec& t = cfg.topology;
  os << "\n[topology]\n"
     << "users = " << t.users << '\n'
     << "lanes = " << t.lanes << '\n'
     << "lane_width_m = " << t.lane_width << '\n'
     << "spacing_m = " << t.spacing << '\n'
     << "comm_range_m = " << t.comm_range << '\n'
     << "cell_size_m = " << t.cell_size << '\n'
     << "bs_setback_m = " << t.bs_setback << '\n'
     << "source_rate_pps = " << t.source_rate << '\n'
     << "nearby_count = " << t.nearby_count << '\n';
  const ExperimentSpec& e = cfg.experiment;
  os << "\n[experiment]\n"
     << "seed = " << e.seed << '\n'
     << "frames = " << e.frames << '\n'
     << "threads = " << e.threads << '\n'
     << "policy = " << policy_name(e.policy) << '\n'
     << "arrivals = " << timing_name(e.timing) << '\n'
     << "pooled = " << (e.pooled ? "true" : "false") << '\n'
     << "tagged_user = " << e.tagged_user << '\n'
     << "antenna_list = " << join(e.antenna_list) << '\n'
     << "loss_grid = " << join(e.loss_grid) << '\n'
     << "bound_antennas = " << join(e.bound_antennas) << '\n'
     << "batches = " << e.batches << '\n'
     << "power_subsample = " << e.power_subsample << '\n';
  return os.str();
}

Scenario make_scenario(const Config& cfg) {
  return {cfg.system, build_highway_topology(cfg.topology, cfg.system, cfg.qos), cfg.qos.loss_prob};
}

std::string normalized_view(const Config& cfg) {
  const SystemParams& s = cfg.system;
  const Scenario sc = make_scenario(cfg);
  std::ostringstream os;
  os << std::setprecision(10);
  os << "[system]\n"
     << "frame_duration_s = " << s.frame_duration << '\n'
     << "dl_phase_s = " << s.dl_phase << '\n'
     << "coherence_time_s = " << s.coherence_time << " (" << s.frames_per_block()
     << " frames)\n"
     << "packet_size_bits = " << s.packet_size << '\n'
     << "rate_gap = " << s.rate_gap << '\n'
     << "noise_psd_w_per_hz = " << s.noise_psd << '\n'
     << "antennas = " << s.antennas << '\n'
     << "pa_efficiency = " << s.pa_efficiency << '\n'
     << "circuit_per_bw_w_per_hz = " << s.circuit_per_bw << '\n'
     << "circuit_static_w = " << s.circuit_static << '\n';
  os << "\n[qos]\n"
     << "e2e_delay_s = " << cfg.qos.e2e_delay << '\n'
     << "loss_prob = " << cfg.qos.loss_prob << '\n'
     << "backhaul_delay_s = " << cfg.qos.backhaul_delay << '\n';
  std::size_t edge = 0;
  for (const UserLink& u : sc.users) edge += u.is_edge ? 1 : 0;
  os << "\n[topology]\n"
     << "users = " << sc.users.size() << " (" << edge << " at the cell edge)\n";
  os << "\n[users]\n"
     << "# id, distance_m, gain, nearby, lambda_pkt_per_frame, edge, dq_s, eps_q, theta, eb_pkt_per_s\n";
  for (const UserLink& u : sc.users)
    os << u.user_id << ", " << u.distance << ", " << u.large_scale_gain << ", " << u.nearby.size()
       << ", " << u.arrival_rate << ", " << (u.is_edge ? 1 : 0) << ", " << u.qos.delay_bound << ", "
       << u.qos.violation_prob << ", " << u.qos.qos_exponent << ", " << u.qos.effective_bw << '\n';
  return os.str();
}

}  // namespace qosalloc
