#include "qosalloc/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qosalloc/allocator.hpp"
#include "qosalloc/channel.hpp"
#include "qosalloc/effective_bandwidth.hpp"
#include "qosalloc/errors.hpp"
#include "qosalloc/mdone.hpp"

#ifndef QOSALLOC_VERSION
#define QOSALLOC_VERSION "0.0.0"
#endif

namespace qosalloc::harness {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string_view version() { return QOSALLOC_VERSION; }

Config apply(Config cfg, const Overrides& o) {
  if (o.seed) cfg.experiment.seed = *o.seed;
  if (o.frames) {
    if (*o.frames < 1) throw ConfigError("--frames must be at least 1");
    cfg.experiment.frames = *o.frames;
  }
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("--threads must be at least 1");
    cfg.experiment.threads = *o.threads;
  }
  if (o.mode) cfg.experiment.policy = parse_policy(*o.mode);
  return cfg;
}

std::string config_hash(const Config& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : write_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool same_qos(const UserLink& a, const UserLink& b) {
  auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y)); };
  return close(a.arrival_rate, b.arrival_rate) && close(a.qos.delay_bound, b.qos.delay_bound) &&
         close(a.qos.violation_prob, b.qos.violation_prob);
}

SimOptions sim_options(const Config& cfg) {
  SimOptions o;
  o.policy = cfg.experiment.policy;
  o.timing = cfg.experiment.timing;
  o.frames = cfg.experiment.frames;
  o.seed = cfg.experiment.seed;
  o.threads = cfg.experiment.threads;
  o.batches = cfg.experiment.batches;
  o.power_subsample = cfg.experiment.power_subsample;
  return o;
}

void write_header(std::ostream& out, const Config& cfg, std::string_view command) {
  out << "# qosalloc " << version() << '\n'
      << "# command " << command << '\n'
      << "# config_hash " << config_hash(cfg) << '\n'
      << "# seed " << cfg.experiment.seed << '\n';
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  const fs::path path = fs::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path.string() + ": cannot open for writing");
  return out;
}

ordered_json manifest(const Config& cfg, std::string_view command, const std::vector<std::string>& outputs) {
  const Scenario sc = make_scenario(cfg);
  const SystemParams& s = cfg.system;
  ordered_json j;
  j["tool"] = "qosalloc";
  j["version"] = std::string(version());
  j["command"] = std::string(command);
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.experiment.seed;
  j["system"] = {{"frame_duration_s", s.frame_duration},
                 {"dl_phase_s", s.dl_phase},
                 {"coherence_time_s", s.coherence_time},
                 {"packet_size_bits", s.packet_size},
                 {"rate_gap", s.rate_gap},
                 {"noise_psd_w_per_hz", s.noise_psd},
                 {"antennas", s.antennas},
                 {"pa_efficiency", s.pa_efficiency},
                 {"circuit_per_bw_w_per_hz", s.circuit_per_bw},
                 {"circuit_static_w", s.circuit_static}};
  j["qos"] = {{"e2e_delay_s", cfg.qos.e2e_delay},
              {"loss_prob", cfg.qos.loss_prob},
              {"backhaul_delay_s", cfg.qos.backhaul_delay}};
  const TopologySpec& t = cfg.topology;
  j["topology"] = {{"users", t.users},         {"lanes", t.lanes},
                   {"lane_width_m", t.lane_width}, {"spacing_m", t.spacing},
                   {"comm_range_m", t.comm_range}, {"cell_size_m", t.cell_size},
                   {"bs_setback_m", t.bs_setback}, {"source_rate_pps", t.source_rate},
                   {"nearby_count", t.nearby_count}};
  const ExperimentSpec& e = cfg.experiment;
  j["experiment"] = {{"frames", e.frames},
                     {"threads", e.threads},
                     {"policy", policy_name(e.policy)},
                     {"arrivals", e.timing == ArrivalTiming::kContinuous ? "continuous" : "frame-end"},
                     {"pooled", e.pooled},
                     {"tagged_user", e.tagged_user},
                     {"antenna_list", e.antenna_list},
                     {"loss_grid", e.loss_grid},
                     {"bound_antennas", e.bound_antennas},
                     {"batches", e.batches},
                     {"power_subsample", e.power_subsample}};
  ordered_json users = ordered_json::array();
  for (const UserLink& u : sc.users)
    users.push_back({{"id", u.user_id},
                     {"distance_m", u.distance},
                     {"gain", u.large_scale_gain},
                     {"nearby", u.nearby.size()},
                     {"lambda_pkt_per_frame", u.arrival_rate},
                     {"edge", u.is_edge},
                     {"delay_bound_s", u.qos.delay_bound},
                     {"violation_prob", u.qos.violation_prob},
                     {"theta", u.qos.qos_exponent},
                     {"effective_bw_pkt_per_s", u.qos.effective_bw}});
  j["users"] = std::move(users);
  j["outputs"] = outputs;
  return j;
}

void write_manifest(const std::string& dir, const Config& cfg, std::string_view command,
                    const std::vector<std::string>& outputs) {
  std::ofstream out = open_output(dir, "manifest.json");
  out << manifest(cfg, command, outputs).dump(2) << '\n';
}

void write_power_csv(const std::string& dir, const Config& cfg, std::string_view command,
                     const std::vector<std::pair<int, const std::vector<PowerSample>*>>& traces) {
  std::ofstream out = open_output(dir, "power.csv");
  write_header(out, cfg, command);
  out << "antennas,frame,transmit_W,bandwidth_Hz,total_W\n";
  for (const auto& [nt, trace] : traces)
    for (const PowerSample& p : *trace)
      out << nt << ',' << p.frame << ',' << num(p.transmit) << ',' << num(p.bandwidth) << ','
          << num(p.total) << '\n';
}

int report(const std::vector<std::string>& violations, std::ostream& log) {
  for (const std::string& v : violations) log << "violation: " << v << '\n';
  return violations.empty() ? kOk : kPropertyViolation;
}

template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SolverError& e) {
    log << "solver error: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const InstabilityError& e) {
    log << "unstable: " << e.what() << '\n';
    return kPropertyViolation;
  } catch (const DomainError& e) {
    log << "invalid parameter: " << e.what() << '\n';
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    log << "output error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace

BoundValidation validate_bound(const Config& cfg) {
  const Scenario sc = make_scenario(cfg);
  BoundValidation v;
  v.tagged_user = cfg.experiment.tagged_user;
  const UserLink& tagged = sc.users.at(static_cast<std::size_t>(v.tagged_user));
  if (cfg.experiment.pooled) {
    for (const UserLink& u : sc.users)
      if (same_qos(u, tagged)) v.measured_users.push_back(u.user_id);
  } else {
    v.measured_users.push_back(tagged.user_id);
  }

  const double tf = sc.params.frame_duration;
  if (tagged.arrival_rate == 0.0) {
    v.rows.push_back({});
    return v;
  }
  v.service = tf * tagged.qos.effective_bw;
  v.utilization = tagged.arrival_rate / v.service;
  const auto levels =
      static_cast<std::size_t>(std::ceil(v.service * tagged.qos.delay_bound / tf - 1e-9));
  const mdone::MdoneSpec spec{v.utilization, v.service, tf};
  const std::vector<double> analytic = mdone::queue_length_ccdf(v.utilization, levels);

  SimOptions opts = sim_options(cfg);
  opts.measured_users = v.measured_users;
  opts.account_power = false;
  opts.power_subsample = 0;
  for (std::size_t l = 0; l <= levels; ++l) opts.thresholds.push_back(spec.threshold(l));
  v.stats = run(sc, opts);
  v.conserved = v.stats.arrivals == v.stats.departures + v.stats.resident;
  if (!v.conserved) v.violations.push_back("flow conservation");

  const double n = static_cast<double>(v.stats.samples);
  for (std::size_t l = 0; l <= levels; ++l) {
    BoundRow r;
    r.level = l;
    r.threshold = spec.threshold(l);
    r.empirical = v.stats.ccdf(l);
    r.std_error = n > 0 ? std::sqrt(r.empirical * (1.0 - r.empirical) / n) : 0.0;
    r.batch_error = v.stats.ccdf_std_error[l];
    r.mdone = analytic[l];
    r.upper_bound =
        delay_violation_upper_bound(tagged.qos.qos_exponent, tagged.qos.effective_bw, r.threshold);
    const double allowance =
        3.0 * std::max(r.batch_error,
                       n > 0 ? std::sqrt(r.upper_bound * (1.0 - r.upper_bound) / n) : 0.0);
    if (r.empirical > r.upper_bound + allowance)
      v.violations.push_back("simulated CCDF above the bound at l = " + std::to_string(l));
    if (r.mdone > r.upper_bound * (1.0 + 1e-12))
      v.violations.push_back("M/D/1 CCDF above the bound at l = " + std::to_string(l));
    v.rows.push_back(r);
  }
  return v;
}

Table2 table2(const Config& cfg) {
  const Scenario base = make_scenario(cfg);
  Table2 t;
  SimOptions opts = sim_options(cfg);
  for (int nt : cfg.experiment.antenna_list) {
    Scenario sc = base;
    sc.params = cfg.system.with_antennas(nt);
    const DelayStats st = run(sc, opts);
    Table2Row r;
    r.antennas = nt;
    r.ratios = normalized_metrics(st, sc.users, nt, sc.params, sc.loss_prob);
    r.mean_power = st.total.mean;
    r.power_lower_bound = avg_power_lower_bound(sc.users, nt, sc.params, sc.loss_prob);
    const ResourceBounds b = required_resource_bounds(sc.users, nt, sc.params);
    r.max_transmit = st.transmit.max;
    r.transmit_bound = b.transmit_power;
    r.max_bandwidth = st.bandwidth.max;
    r.bandwidth_bound = b.bandwidth;
    r.energy_efficiency = st.energy_efficiency;
    r.arrivals = st.arrivals;
    r.departures = st.departures;
    r.resident = st.resident;
    r.trace = st.trace;

    const std::string tag = "N_t = " + std::to_string(nt) + ": ";
    if (r.arrivals != r.departures + r.resident) t.violations.push_back(tag + "flow conservation");
    if (r.ratios.power < 1.0 - 3.0 * r.ratios.power_std_error)
      t.violations.push_back(tag + "average power below its lower bound");
    if (r.ratios.transmit_req >= 1.0) t.violations.push_back(tag + "transmit power above its bound");
    if (r.ratios.bandwidth_req >= 1.0) t.violations.push_back(tag + "bandwidth above its bound");
    t.rows.push_back(std::move(r));
  }
  return t;
}

ResourceSweep required_resources(const Config& cfg) {
  ResourceSweep sweep;
  for (double eps : cfg.experiment.loss_grid) {
    QosBudget budget = cfg.qos;
    budget.loss_prob = eps;
    for (int nt : cfg.experiment.bound_antennas) {
      const SystemParams params = cfg.system.with_antennas(nt);
      const auto users = build_highway_topology(cfg.topology, params, budget);
      const ResourceBounds b = required_resource_bounds(users, nt, params);
      sweep.rows.push_back({eps, nt, b.transmit_power, b.bandwidth});
    }
  }
  auto at = [&](std::size_t e, std::size_t a) -> const ResourceRow& {
    return sweep.rows[e * cfg.experiment.bound_antennas.size() + a];
  };
  for (const ResourceRow& r : sweep.rows)
    if (!(std::isfinite(r.transmit_bound) && std::isfinite(r.bandwidth_bound) &&
          r.transmit_bound > 0.0 && r.bandwidth_bound > 0.0))
      sweep.violations.push_back("non-positive or non-finite bound at eps = " + sci(r.loss_prob) +
                                 ", N_t = " + std::to_string(r.antennas));
  for (std::size_t e = 0; e < cfg.experiment.loss_grid.size(); ++e)
    for (std::size_t a = 1; a < cfg.experiment.bound_antennas.size(); ++a) {
      const ResourceRow& lo = at(e, a - 1);
      const ResourceRow& hi = at(e, a);
      if (hi.antennas <= lo.antennas) continue;
      if (!(hi.bandwidth_bound < lo.bandwidth_bound))
        sweep.violations.push_back("bandwidth bound not decreasing in N_t at eps = " + sci(lo.loss_prob));
      if (!(hi.transmit_bound > lo.transmit_bound))
        sweep.violations.push_back("power bound not increasing in N_t at eps = " + sci(lo.loss_prob));
    }
  return sweep;
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (syy == 0.0) return 1.0;
  return sxy * sxy / (sxx * syy);
}

int cmd_validate_config(const std::string& config_path, const Overrides& o, std::ostream& out) {
  return guarded(out, [&] {
    const Config cfg = apply(load_config(config_path), o);
    out << "# config_hash " << config_hash(cfg) << '\n' << normalized_view(cfg);
    return static_cast<int>(kOk);
  });
}

int cmd_validate_bound(const std::string& config_path, const Overrides& o, const std::string& out_dir,
                       std::ostream& log) {
  return guarded(log, [&] {
    const Config cfg = apply(load_config(config_path), o);
    const BoundValidation v = validate_bound(cfg);
    {
      std::ofstream out = open_output(out_dir, "ccdf.csv");
      write_header(out, cfg, "validate-bound");
      out << "# tagged_user " << v.tagged_user << ", pooled_users " << v.measured_users.size()
          << ", utilization " << num(v.utilization) << ", service_pkt_per_frame " << num(v.service)
          << ", delay_samples " << v.stats.samples << '\n';
      out << "threshold_s,empirical,mdone,upper_bound,level,binomial_se,batch_se\n";
      for (const BoundRow& r : v.rows)
        out << sci(r.threshold) << ',' << sci(r.empirical) << ',' << sci(r.mdone) << ','
            << sci(r.upper_bound) << ',' << r.level << ',' << sci(r.std_error) << ','
            << sci(r.batch_error) << '\n';
    }
    write_manifest(out_dir, cfg, "validate-bound", {"ccdf.csv"});
    log << "validate-bound: " << v.rows.size() << " thresholds, " << v.stats.samples
        << " delay samples, arrivals " << v.stats.arrivals << " = departures " << v.stats.departures
        << " + resident " << v.stats.resident << '\n';
    return report(v.violations, log);
  });
}

int cmd_table2(const std::string& config_path, const Overrides& o, const std::string& out_dir,
               std::ostream& log, bool channel_trace) {
  return guarded(log, [&] {
    const Config cfg = apply(load_config(config_path), o);
    const Table2 t = table2(cfg);
    {
      std::ofstream out = open_output(out_dir, "summary.csv");
      write_header(out, cfg, "table2");
      out << "antennas,power_ratio,power_ratio_se,transmit_req_ratio,bandwidth_req_ratio,"
             "mean_power_W,power_lower_bound_W,max_transmit_W,transmit_bound_W,max_bandwidth_Hz,"
             "bandwidth_bound_Hz,energy_efficiency_bit_per_J,arrivals,departures,resident\n";
      for (const Table2Row& r : t.rows)
        out << r.antennas << ',' << num(r.ratios.power) << ',' << sci(r.ratios.power_std_error) << ','
            << num(r.ratios.transmit_req) << ',' << num(r.ratios.bandwidth_req) << ','
            << num(r.mean_power) << ',' << num(r.power_lower_bound) << ',' << num(r.max_transmit)
            << ',' << num(r.transmit_bound) << ',' << num(r.max_bandwidth) << ','
            << num(r.bandwidth_bound) << ',' << num(r.energy_efficiency) << ',' << r.arrivals << ','
            << r.departures << ',' << r.resident << '\n';
    }
    std::vector<std::string> outputs{"summary.csv"};
    if (cfg.experiment.power_subsample > 0) {
      std::vector<std::pair<int, const std::vector<PowerSample>*>> traces;
      for (const Table2Row& r : t.rows) traces.emplace_back(r.antennas, &r.trace);
      write_power_csv(out_dir, cfg, "table2", traces);
      outputs.push_back("power.csv");
    }
    if (channel_trace) {
      const std::size_t block = cfg.system.frames_per_block();
      const std::size_t blocks = (cfg.experiment.frames + block - 1) / block;
      const ChannelTrace trace =
          sample_trace(static_cast<std::size_t>(cfg.topology.users), blocks, cfg.system.antennas,
                       block, cfg.experiment.seed);
      std::ofstream out = open_output(out_dir, "channel.csv");
      write_header(out, cfg, "table2");
      write_trace_csv(out, trace);
      outputs.push_back("channel.csv");
    }
    write_manifest(out_dir, cfg, "table2", outputs);
    for (const Table2Row& r : t.rows)
      log << "N_t = " << r.antennas << ": power ratio " << num(r.ratios.power) << " +- "
          << num(r.ratios.power_std_error) << ", P_req ratio " << num(r.ratios.transmit_req)
          << ", W_req ratio " << num(r.ratios.bandwidth_req) << '\n';
    return report(t.violations, log);
  });
}

int cmd_required_resources(const std::string& config_path, const Overrides& o,
                           const std::string& out_dir, std::ostream& log) {
  return guarded(log, [&] {
    const Config cfg = apply(load_config(config_path), o);
    const ResourceSweep sweep = required_resources(cfg);
    {
      std::ofstream out = open_output(out_dir, "fig4.csv");
      write_header(out, cfg, "required-resources");
      out << "eps_D,N_t,P_bound_W,W_bound_Hz\n";
      for (const ResourceRow& r : sweep.rows)
        out << sci(r.loss_prob) << ',' << r.antennas << ',' << num(r.transmit_bound) << ','
            << num(r.bandwidth_bound) << '\n';
    }
    write_manifest(out_dir, cfg, "required-resources", {"fig4.csv"});
    log << "required-resources: " << sweep.rows.size() << " points\n";
    return report(sweep.violations, log);
  });
}

}  // namespace qosalloc::harness
