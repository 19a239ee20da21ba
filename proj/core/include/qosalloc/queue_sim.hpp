#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "qosalloc/allocator.hpp"
#include "qosalloc/rng.hpp"
#include "qosalloc/scenario.hpp"

// Frame-driven Monte-Carlo simulation of the per-user downlink queues.
//
// Time is measured in frames; frame n covers [n, n+1). Each user's server
// drains its FIFO queue as a fluid at a constant rate of T_f·E^B packets per
// frame whenever the queue is non-empty, so a packet's service takes
// 1/(T_f·E^B) frames and may straddle frame boundaries. Packets arrive at
// continuous instants (Poisson process) or, optionally, all at the end of the
// frame they were generated in, which reproduces the batch recursion
//   Q(n+1) = max{Q(n) - s(n), 0} + a(n)
// exactly. The recorded delay is the queueing delay: the time from arrival
// until the server starts on the packet.
namespace qosalloc {

enum class Policy {
  kTwoStateFinite,   ///< serve min{backlog, T_f·E^B}; allocate for the instantaneous gain
  kTwoStateLargeNt,  ///< same service; hardened channel, closed-form allocation
  kConstantRate,     ///< allocate T_f·E^B every frame whatever the backlog
};

enum class ArrivalTiming { kContinuous, kFrameEnd };

struct Packet {
  std::uint64_t arrival_frame = 0;
  double arrival_offset = 0.0;  ///< position within the arrival frame, [0, 1]
  double remaining = 1.0;       ///< unserved fraction of the packet
  bool started = false;
};

struct QueueState {
  int user_id = 0;
  std::deque<Packet> packets;

  /// Q: whole unserved packets plus the unserved fraction of the head.
  double backlog() const;
};

struct StepResult {
  double departed = 0.0;            ///< b: work done this frame [packets]
  std::size_t completed = 0;        ///< packets whose service finished
  std::vector<double> waits;        ///< queueing delays of packets started this frame [frames]
};

/// Advances `state` through frame `frame` with service rate `rate` packets per
/// frame. `arrival_offsets` are positions in [0, 1] within the frame, sorted
/// ascending; an offset of 1 means the packet only joins at the frame end.
/// `out` is overwritten.
void step(QueueState& state, std::size_t frame, double rate, std::span<const double> arrival_offsets,
          StepResult& out);

/// Poisson-distributed arrival count with mean `rate` packets per frame.
std::uint64_t sample_arrivals(double rate, Engine& rng);

struct Scenario {
  SystemParams params;
  std::vector<UserLink> users;
  double loss_prob = 1e-7;  ///< epsilon_D
};

struct SimOptions {
  Policy policy = Policy::kTwoStateFinite;
  ArrivalTiming timing = ArrivalTiming::kContinuous;
  std::size_t frames = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::vector<double> thresholds;      ///< CCDF thresholds [s], any order
  std::vector<int> measured_users;     ///< users whose delays are pooled; empty = all
  bool per_user = false;               ///< also keep per-user threshold counts
  std::size_t histogram_bins = 64;     ///< delay histogram, bin width T_f
  std::size_t batches = 20;            ///< batch-means blocks for standard errors
  std::size_t power_subsample = 0;     ///< keep every n-th frame's totals; 0 = none
  bool account_power = true;
};

struct PowerSample {
  std::size_t frame = 0;
  double transmit = 0.0;
  double bandwidth = 0.0;
  double total = 0.0;
};

struct Summary {
  double mean = 0.0;
  double max = 0.0;
  double std_error = 0.0;  ///< batch-means standard error of the mean
};

struct DelayStats {
  std::size_t frames = 0;
  double frame_duration = 0.0;

  std::vector<double> thresholds;             ///< sorted [s]
  std::vector<std::uint64_t> exceed;          ///< delays > thresholds[i]
  std::vector<double> ccdf_std_error;         ///< batch-means standard error of ccdf(i)
  std::vector<std::vector<std::uint64_t>> per_user_exceed;  ///< [user][i] when requested
  std::vector<std::uint64_t> histogram;       ///< bin i holds delays in [i·T_f, (i+1)·T_f)
  std::uint64_t histogram_overflow = 0;
  std::uint64_t samples = 0;                  ///< delays recorded
  std::uint64_t violations = 0;               ///< delays above the user's own D^q_max

  std::uint64_t arrivals = 0;                 ///< all users
  std::uint64_t departures = 0;               ///< packets fully served
  std::uint64_t resident = 0;                 ///< packets still queued at the end

  Summary transmit;   ///< sum_k P^t_k per frame [W]
  Summary bandwidth;  ///< sum_k W_k per frame [Hz]
  Summary total;      ///< P_tot per frame [W]
  double energy_efficiency = 0.0;  ///< delivered bits per joule
  std::vector<PowerSample> trace;

  /// Empirical Pr{D > thresholds[i]}.
  double ccdf(std::size_t i) const;
};

/// Runs the queues and the allocator for `opts.frames` frames. Deterministic
/// in (scenario, opts); the thread count does not affect the result.
DelayStats run(const Scenario& scenario, const SimOptions& opts);

struct NormalizedMetrics {
  double power = 0.0;           ///< E[P_tot] / average-power lower bound
  double power_std_error = 0.0;
  double transmit_req = 0.0;    ///< max sum P^t / its upper bound
  double bandwidth_req = 0.0;   ///< max sum W / its upper bound
};

/// Simulated averages and maxima relative to the hardened-channel bounds.
NormalizedMetrics normalized_metrics(const DelayStats& stats, std::span<const UserLink> users,
                                     int antennas, const SystemParams& params, double loss_prob);

}  // namespace qosalloc
