#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qosalloc/config.hpp"

// Experiment drivers behind the command-line tool. The compute functions
// return plain rows; the cmd_* wrappers write CSV artifacts plus a run
// manifest into an output directory and map failures onto exit codes.
namespace qosalloc::harness {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kPropertyViolation = 2,
  kSolverFailure = 3,
};

std::string_view version();

/// Command-line overrides applied on top of the [experiment] section.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> frames;
  std::optional<unsigned> threads;
  std::optional<std::string> mode;
};

Config apply(Config cfg, const Overrides& o);

/// 64-bit FNV-1a of the canonical config text, as 16 hex digits.
std::string config_hash(const Config& cfg);

struct BoundRow {
  std::size_t level = 0;     ///< l
  double threshold = 0.0;    ///< T_f·l/s [s]
  double empirical = 0.0;
  double std_error = 0.0;    ///< binomial standard error of `empirical`
  double batch_error = 0.0;  ///< batch-means standard error (accounts for correlated delays)
  double mdone = 0.0;
  double upper_bound = 0.0;
};

struct BoundValidation {
  int tagged_user = 0;
  std::vector<int> measured_users;
  double utilization = 0.0;
  double service = 0.0;      ///< s = T_f·E^B [packets/frame]
  std::vector<BoundRow> rows;
  DelayStats stats;
  bool conserved = true;
  std::vector<std::string> violations;
};

/// Simulated delay CCDF, M/D/1 CCDF and the exponential bound over
/// D_th = T_f·l/s for l = 0 .. ceil(s·D^q_max/T_f).
BoundValidation validate_bound(const Config& cfg);

struct Table2Row {
  int antennas = 0;
  NormalizedMetrics ratios;
  double mean_power = 0.0;        ///< E[P_tot] [W]
  double power_lower_bound = 0.0; ///< [W]
  double max_transmit = 0.0;      ///< max_n sum P^t [W]
  double transmit_bound = 0.0;    ///< [W]
  double max_bandwidth = 0.0;     ///< max_n sum W [Hz]
  double bandwidth_bound = 0.0;   ///< [Hz]
  double energy_efficiency = 0.0; ///< [bit/J]
  std::uint64_t arrivals = 0;
  std::uint64_t departures = 0;
  std::uint64_t resident = 0;
  std::vector<PowerSample> trace;
};

struct Table2 {
  std::vector<Table2Row> rows;
  std::vector<std::string> violations;
};

/// One run of the configured policy per antenna count, with common random
/// numbers across the sweep.
Table2 table2(const Config& cfg);

struct ResourceRow {
  double loss_prob = 0.0;
  int antennas = 0;
  double transmit_bound = 0.0;  ///< [W]
  double bandwidth_bound = 0.0; ///< [Hz]
};

struct ResourceSweep {
  std::vector<ResourceRow> rows;
  std::vector<std::string> violations;
};

ResourceSweep required_resources(const Config& cfg);

/// Coefficient of determination of the least-squares line through (x, y).
double r_squared(const std::vector<double>& x, const std::vector<double>& y);

/// Subcommands. Each writes its CSV, a manifest.json and, where relevant,
/// power.csv into `out_dir`, reports to `log`, and returns an ExitCode.
int cmd_validate_config(const std::string& config_path, const Overrides& o, std::ostream& out);
int cmd_validate_bound(const std::string& config_path, const Overrides& o, const std::string& out_dir,
                       std::ostream& log);
int cmd_table2(const std::string& config_path, const Overrides& o, const std::string& out_dir,
               std::ostream& log, bool channel_trace = false);
int cmd_required_resources(const std::string& config_path, const Overrides& o,
                           const std::string& out_dir, std::ostream& log);

}  // namespace qosalloc::harness
