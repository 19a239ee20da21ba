#include "qosalloc/queue_sim.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <thread>

#include "qosalloc/channel.hpp"
#include "qosalloc/errors.hpp"

namespace qosalloc {

double QueueState::backlog() const {
  double q = 0.0;
  for (const Packet& p : packets) q += p.remaining;
  return q;
}

void step(QueueState& state, std::size_t frame, double rate, std::span<const double> arrival_offsets,
          StepResult& out) {
  out.departed = 0.0;
  out.completed = 0;
  out.waits.clear();
  for (double off : arrival_offsets) {
    if (!(off >= 0.0 && off <= 1.0)) throw DomainError("step: arrival offset outside [0, 1]");
    state.packets.push_back({frame, off, 1.0, false});
  }
  if (rate < 0.0) throw DomainError("step: service rate must be non-negative");
  if (rate == 0.0) return;

  // Server clock as an offset within this frame.
  double clock = 0.0;
  while (!state.packets.empty()) {
    Packet& p = state.packets.front();
    const double arrived = static_cast<double>(static_cast<std::int64_t>(p.arrival_frame) -
                                               static_cast<std::int64_t>(frame)) +
                           p.arrival_offset;
    const double begin = std::max(clock, arrived);
    if (begin >= 1.0) break;
    if (!p.started) {
      out.waits.push_back(begin - arrived);
      p.started = true;
    }
    const double available = (1.0 - begin) * rate;
    if (p.remaining <= available) {
      clock = begin + p.remaining / rate;
      out.departed += p.remaining;
      ++out.completed;
      state.packets.pop_front();
    } else {
      p.remaining -= available;
      out.departed += available;
      break;
    }
  }
}

std::uint64_t sample_arrivals(double rate, Engine& rng) {
  if (rate < 0.0) throw DomainError("sample_arrivals: rate must be non-negative");
  if (rate == 0.0) return 0;
  std::poisson_distribution<std::uint64_t> dist(rate);
  return dist(rng);
}

double DelayStats::ccdf(std::size_t i) const {
  return samples == 0 ? 0.0 : static_cast<double>(exceed.at(i)) / static_cast<double>(samples);
}

namespace {

constexpr std::size_t kChunkFrames = 4096;
constexpr auto kNoBlock = std::numeric_limits<std::uint64_t>::max();

double frame_capacity(const UserLink& u, double frame_duration) {
  return frame_duration * u.qos.effective_bw;
}

struct UnitAllocation {
  double power = 0.0;
  double bandwidth = 0.0;
};

// Everything one user needs while its frames are simulated.
struct UserLane {
  const UserLink* link = nullptr;
  QueueState queue;
  Engine rng;
  double capacity = 0.0;    // T_f·E^B [packets/frame]
  bool measured = false;
  double delay_bound = 0.0; // D^q_max [frames]

  std::uint64_t block = kNoBlock;
  UnitAllocation unit;

  std::vector<std::uint64_t> below;  // below[j]: delays with exactly j thresholds beneath them
  std::vector<std::uint64_t> batch_below;    // the same per batch, [batch][j]
  std::vector<std::uint64_t> batch_samples;
  std::size_t batch = 0;
  std::vector<std::uint64_t> histogram;
  std::uint64_t overflow = 0;
  std::uint64_t samples = 0;
  std::uint64_t violations = 0;
  std::uint64_t arrivals = 0;
  std::uint64_t departures = 0;

  std::vector<double> offsets;
  StepResult result;
};

struct Runner {
  const Scenario& sc;
  const SimOptions& opts;
  std::vector<double> thresholds_frames;
  std::size_t frames_per_block = 1;
  std::vector<UnitAllocation> hardened;  // per user, large-N_t policy only

  UnitAllocation unit_for(UserLane& lane, std::size_t frame) {
    const UserLink& u = *lane.link;
    if (opts.policy == Policy::kTwoStateLargeNt) return hardened[static_cast<std::size_t>(u.user_id)];
    const std::uint64_t block = frame / frames_per_block;
    if (block != lane.block) {
      const double g = block_gain(opts.seed, u.user_id, block, sc.params.antennas);
      const Allocation a = min_power_alloc(1.0, u.large_scale_gain, g, sc.params);
      lane.unit = {a.transmit_power, a.bandwidth};
      lane.block = block;
    }
    return lane.unit;
  }

  void simulate(UserLane& lane, std::size_t first, std::size_t last, double* power, double* bw) {
    std::uniform_real_distribution<double> where(0.0, 1.0);
    for (std::size_t f = first; f < last; ++f) {
      lane.batch = f * opts.batches / opts.frames;
      const std::uint64_t count = sample_arrivals(lane.link->arrival_rate, lane.rng);
      lane.arrivals += count;
      lane.offsets.resize(count);
      if (opts.timing == ArrivalTiming::kFrameEnd) {
        std::fill(lane.offsets.begin(), lane.offsets.end(), 1.0);
      } else {
        for (double& o : lane.offsets) o = where(lane.rng);
        std::sort(lane.offsets.begin(), lane.offsets.end());
      }
      step(lane.queue, f, lane.capacity, lane.offsets, lane.result);
      lane.departures += lane.result.completed;

      if (lane.measured) {
        for (double w : lane.result.waits) record(lane, w);
      }

      const double served = opts.policy == Policy::kConstantRate ? lane.capacity
                                                                 : lane.result.departed;
      double p = 0.0;
      double w = 0.0;
      if (opts.account_power && served > 0.0) {
        const UnitAllocation unit = unit_for(lane, f);
        p = unit.power * served;
        w = unit.bandwidth * served;
      }
      power[f - first] = p;
      bw[f - first] = w;
    }
  }

  void record(UserLane& lane, double wait) {
    ++lane.samples;
    const auto beneath = static_cast<std::size_t>(
        std::lower_bound(thresholds_frames.begin(), thresholds_frames.end(), wait) -
        thresholds_frames.begin());
    ++lane.below[beneath];
    ++lane.batch_below[lane.batch * lane.below.size() + beneath];
    ++lane.batch_samples[lane.batch];
    if (wait > lane.delay_bound) ++lane.violations;
    const auto bin = static_cast<std::size_t>(wait);
    if (bin < lane.histogram.size())
      ++lane.histogram[bin];
    else
      ++lane.overflow;
  }
};

Summary finish(double sum, double max, const std::vector<double>& batch_sums,
               const std::vector<std::size_t>& batch_sizes, std::size_t frames) {
  Summary s;
  s.mean = sum / static_cast<double>(frames);
  s.max = max;
  std::vector<double> means;
  for (std::size_t b = 0; b < batch_sums.size(); ++b)
    if (batch_sizes[b] > 0) means.push_back(batch_sums[b] / static_cast<double>(batch_sizes[b]));
  if (means.size() > 1) {
    double m = 0.0;
    for (double v : means) m += v;
    m /= static_cast<double>(means.size());
    double ss = 0.0;
    for (double v : means) ss += (v - m) * (v - m);
    const double n = static_cast<double>(means.size());
    s.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return s;
}

}  // namespace

DelayStats run(const Scenario& sc, const SimOptions& opts) {
  sc.params.validate();
  if (opts.frames < 1) throw ConfigError("experiment.frames must be at least 1");
  if (opts.batches < 1) throw ConfigError("experiment.batches must be at least 1");
  const std::size_t users = sc.users.size();
  const double tf = sc.params.frame_duration;

  Runner runner{sc, opts, {}, sc.params.frames_per_block(), {}};

  DelayStats stats;
  stats.frames = opts.frames;
  stats.frame_duration = tf;
  stats.thresholds = opts.thresholds;
  std::sort(stats.thresholds.begin(), stats.thresholds.end());
  for (double t : stats.thresholds) {
    if (t < 0.0) throw ConfigError("CCDF thresholds must be non-negative");
    runner.thresholds_frames.push_back(t / tf);
  }

  if (opts.policy == Policy::kTwoStateLargeNt) {
    runner.hardened.resize(users);
    for (const UserLink& u : sc.users) {
      if (u.arrival_rate == 0.0) continue;
      const double ptw = ptw_ratio(u.large_scale_gain, sc.params.antennas, sc.params);
      const Allocation a = closed_form_alloc(1.0, u.large_scale_gain, sc.params.antennas, ptw, sc.params);
      runner.hardened[static_cast<std::size_t>(u.user_id)] = {a.transmit_power, a.bandwidth};
    }
  }

  std::vector<UserLane> lanes(users);
  for (std::size_t k = 0; k < users; ++k) {
    const UserLink& u = sc.users[k];
    if (u.user_id != static_cast<int>(k)) throw ConfigError("user ids must be 0..K-1 in order");
    UserLane& lane = lanes[k];
    lane.link = &u;
    lane.queue.user_id = u.user_id;
    lane.rng.seed(substream_seed(opts.seed, {static_cast<std::uint64_t>(StreamTag::kArrivals),
                                             static_cast<std::uint64_t>(k)}));
    lane.capacity = frame_capacity(u, tf);
    lane.measured = opts.measured_users.empty() ||
                    std::find(opts.measured_users.begin(), opts.measured_users.end(), u.user_id) !=
                        opts.measured_users.end();
    lane.delay_bound = u.qos.delay_bound / tf;
    lane.below.assign(stats.thresholds.size() + 1, 0);
    lane.batch_below.assign(opts.batches * lane.below.size(), 0);
    lane.batch_samples.assign(opts.batches, 0);
    lane.histogram.assign(opts.histogram_bins, 0);
    if (u.arrival_rate > 0.0 && u.arrival_rate >= lane.capacity)
      std::clog << "warning: user " << u.user_id << " is unstable (lambda >= T_f*E^B)\n";
  }

  const unsigned threads =
      static_cast<unsigned>(std::clamp<std::size_t>(opts.threads, 1, std::max<std::size_t>(users, 1)));
  std::vector<double> power(users * kChunkFrames);
  std::vector<double> bandwidth(users * kChunkFrames);

  double sum_tx = 0.0, sum_bw = 0.0, sum_tot = 0.0;
  double max_tx = 0.0, max_bw = 0.0, max_tot = 0.0;
  std::vector<double> batch_tx(opts.batches, 0.0), batch_bw(opts.batches, 0.0),
      batch_tot(opts.batches, 0.0);
  std::vector<std::size_t> batch_n(opts.batches, 0);
  const SystemParams& p = sc.params;

  for (std::size_t first = 0; first < opts.frames; first += kChunkFrames) {
    const std::size_t last = std::min(opts.frames, first + kChunkFrames);
    auto work = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t k = lo; k < hi; ++k)
        runner.simulate(lanes[k], first, last, &power[k * kChunkFrames], &bandwidth[k * kChunkFrames]);
    };
    if (threads == 1) {
      work(0, users);
    } else {
      std::vector<std::jthread> pool;
      const std::size_t per = (users + threads - 1) / threads;
      for (std::size_t lo = 0; lo < users; lo += per)
        pool.emplace_back(work, lo, std::min(users, lo + per));
    }

    for (std::size_t f = first; f < last; ++f) {
      double tx = 0.0, bw = 0.0;
      for (std::size_t k = 0; k < users; ++k) {
        tx += power[k * kChunkFrames + (f - first)];
        bw += bandwidth[k * kChunkFrames + (f - first)];
      }
      const double tot = tx / p.pa_efficiency + p.circuit_per_bw * bw + p.circuit_static;
      sum_tx += tx;
      sum_bw += bw;
      sum_tot += tot;
      max_tx = std::max(max_tx, tx);
      max_bw = std::max(max_bw, bw);
      max_tot = std::max(max_tot, tot);
      const std::size_t b = f * opts.batches / opts.frames;
      batch_tx[b] += tx;
      batch_bw[b] += bw;
      batch_tot[b] += tot;
      ++batch_n[b];
      if (opts.power_subsample > 0 && f % opts.power_subsample == 0)
        stats.trace.push_back({f, tx, bw, tot});
    }
  }

  stats.exceed.assign(stats.thresholds.size(), 0);
  stats.histogram.assign(opts.histogram_bins, 0);
  double mean_arrivals = 0.0;
  for (const UserLane& lane : lanes) {
    stats.arrivals += lane.arrivals;
    stats.departures += lane.departures;
    stats.resident += lane.queue.packets.size();
    mean_arrivals += static_cast<double>(lane.arrivals) / static_cast<double>(opts.frames);
    if (!lane.measured) continue;
    stats.samples += lane.samples;
    stats.violations += lane.violations;
    stats.histogram_overflow += lane.overflow;
    for (std::size_t i = 0; i < lane.histogram.size(); ++i) stats.histogram[i] += lane.histogram[i];
    // Delays with j thresholds beneath them exceed thresholds 0..j-1.
    std::vector<std::uint64_t> exceed(stats.thresholds.size(), 0);
    std::uint64_t running = 0;
    for (std::size_t j = stats.thresholds.size(); j-- > 0;) {
      running += lane.below[j + 1];
      exceed[j] = running;
    }
    for (std::size_t i = 0; i < exceed.size(); ++i) stats.exceed[i] += exceed[i];
    if (opts.per_user) stats.per_user_exceed.push_back(std::move(exceed));
  }

  // Each (user, batch) pair is one nearly independent group; the standard
  // error is that of a ratio estimator over the groups.
  stats.ccdf_std_error.assign(stats.thresholds.size(), 0.0);
  if (stats.samples > 0) {
    const double n = static_cast<double>(stats.samples);
    std::size_t groups = 0;
    std::vector<double> ss(stats.thresholds.size(), 0.0);
    for (const UserLane& lane : lanes) {
      if (!lane.measured) continue;
      const std::size_t width = lane.below.size();
      for (std::size_t b = 0; b < opts.batches; ++b) {
        ++groups;
        const auto ng = static_cast<double>(lane.batch_samples[b]);
        std::uint64_t running = 0;
        for (std::size_t j = stats.thresholds.size(); j-- > 0;) {
          running += lane.batch_below[b * width + j + 1];
          const double d = static_cast<double>(running) - stats.ccdf(j) * ng;
          ss[j] += d * d;
        }
      }
    }
    if (groups > 1) {
      const auto g = static_cast<double>(groups);
      for (std::size_t j = 0; j < ss.size(); ++j)
        stats.ccdf_std_error[j] = std::sqrt(g / (g - 1.0) * ss[j]) / n;
    }
  }

  stats.transmit = finish(sum_tx, max_tx, batch_tx, batch_n, opts.frames);
  stats.bandwidth = finish(sum_bw, max_bw, batch_bw, batch_n, opts.frames);
  stats.total = finish(sum_tot, max_tot, batch_tot, batch_n, opts.frames);
  if (opts.account_power && stats.total.mean > 0.0)
    stats.energy_efficiency = p.packet_size * (1.0 - sc.loss_prob) * mean_arrivals /
                              (p.dl_phase * stats.total.mean);
  return stats;
}

NormalizedMetrics normalized_metrics(const DelayStats& stats, std::span<const UserLink> users,
                                     int antennas, const SystemParams& params, double loss_prob) {
  NormalizedMetrics m;
  const double bound = avg_power_lower_bound(users, antennas, params, loss_prob);
  const ResourceBounds req = required_resource_bounds(users, antennas, params);
  m.power = stats.total.mean / bound;
  m.power_std_error = stats.total.std_error / bound;
  m.transmit_req = req.transmit_power > 0.0 ? stats.transmit.max / req.transmit_power : 0.0;
  m.bandwidth_req = req.bandwidth > 0.0 ? stats.bandwidth.max / req.bandwidth : 0.0;
  return m;
}

}  // namespace qosalloc
