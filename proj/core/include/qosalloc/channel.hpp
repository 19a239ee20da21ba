#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qosalloc/rng.hpp"
#include "qosalloc/scenario.hpp"

namespace qosalloc {

/// g = ||h||^2 for h with N_t i.i.d. unit-variance circularly-symmetric
/// complex Gaussian entries (each real/imaginary part has variance 1/2), so
/// g ~ Gamma(N_t, 1).
double sample_gain(int antennas, Engine& rng);

/// Gain of `user` in coherence block `block`. Each (seed, user, block) owns a
/// substream, and the entries of h are drawn in order, so the gain for N_t
/// antennas is a partial sum of the gain for any larger antenna count.
double block_gain(std::uint64_t seed, int user, std::uint64_t block, int antennas);

/// Packets deliverable in one DL phase:
///   s = Phi·T_D·W/u · log2(1 + alpha·P·g / (N_0·W)),
/// continuously extended to s = 0 at W = 0. Throws DomainError on negative input.
double achievable_packets(double power, double bandwidth, double gain, double small_scale,
                          const SystemParams& params);

/// Block-fading gains for a set of users over consecutive coherence blocks.
struct ChannelTrace {
  std::uint64_t seed = 0;
  std::size_t block_length = 1;             ///< frames per coherence block
  std::vector<std::vector<double>> gains;   ///< gains[user][block]

  /// Gain in force during `frame`.
  double at(std::size_t user, std::size_t frame) const {
    return gains[user][frame / block_length];
  }
};

ChannelTrace sample_trace(std::size_t users, std::size_t blocks, int antennas,
                          std::size_t block_length, std::uint64_t seed);

/// CSV dump with columns user,block,gain.
void write_trace_csv(std::ostream& out, const ChannelTrace& trace);

}  // namespace qosalloc
