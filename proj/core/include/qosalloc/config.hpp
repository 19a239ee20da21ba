#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qosalloc/queue_sim.hpp"
#include "qosalloc/scenario.hpp"

// INI-style configuration with sections [system], [qos], [topology] and
// [experiment]. Keys carry their unit in the name (e.g. noise_psd_dbm_per_hz,
// frame_duration_ms); values are converted to SI here and nowhere else.
// Missing keys take the reference values; unknown keys are rejected.
namespace qosalloc {

struct ExperimentSpec {
  std::uint64_t seed = 1;
  std::size_t frames = 200000;
  unsigned threads = 1;
  Policy policy = Policy::kTwoStateFinite;
  ArrivalTiming timing = ArrivalTiming::kContinuous;
  bool pooled = true;       ///< pool delays of all users sharing the tagged user's QoS
  int tagged_user = 0;
  std::vector<int> antenna_list{2, 4, 8, 16, 32};
  std::vector<double> loss_grid{1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
  std::vector<int> bound_antennas{4, 8, 16};
  std::size_t batches = 20;
  std::size_t power_subsample = 1000;
};

struct Config {
  SystemParams system = SystemParams::reference();
  QosBudget qos;
  TopologySpec topology;
  ExperimentSpec experiment;
};

/// Parses and validates. Errors are ConfigError naming the offending key.
Config parse_config(std::istream& in, const std::string& source = "<config>");
Config load_config(const std::string& path);

/// Serialises back to the config units; parse_config(write_config(c)) == c.
std::string write_config(const Config& cfg);

/// Human-readable SI view of the configuration and the derived per-user QoS.
std::string normalized_view(const Config& cfg);

/// Builds the users and bundles everything the simulator needs.
Scenario make_scenario(const Config& cfg);

Policy parse_policy(const std::string& name);
std::string policy_name(Policy p);

}  // namespace qosalloc
