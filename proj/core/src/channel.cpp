#include "qosalloc/channel.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "qosalloc/errors.hpp"

namespace qosalloc {

double sample_gain(int antennas, Engine& rng) {
  if (antennas < 1) throw DomainError("antenna count must be at least 1");
  std::normal_distribution<double> half(0.0, std::sqrt(0.5));
  double g = 0.0;
  for (int i = 0; i < antennas; ++i) {
    const double re = half(rng);
    const double im = half(rng);
    g += re * re + im * im;
  }
  return g;
}

double block_gain(std::uint64_t seed, int user, std::uint64_t block, int antennas) {
  Engine rng(substream_seed(seed, {static_cast<std::uint64_t>(StreamTag::kChannel),
                                   static_cast<std::uint64_t>(user), block}));
  return sample_gain(antennas, rng);
}

double achievable_packets(double power, double bandwidth, double gain, double small_scale,
                          const SystemParams& params) {
  if (power < 0.0 || bandwidth < 0.0 || gain < 0.0 || small_scale < 0.0)
    throw DomainError("achievable_packets: negative input");
  if (bandwidth == 0.0 || power == 0.0) return 0.0;
  const double snr = gain * power * small_scale / (params.noise_psd * bandwidth);
  return params.rate_gap * params.dl_phase * bandwidth / params.packet_size * std::log1p(snr) /
         std::log(2.0);
}

ChannelTrace sample_trace(std::size_t users, std::size_t blocks, int antennas,
                          std::size_t block_length, std::uint64_t seed) {
  ChannelTrace trace;
  trace.seed = seed;
  trace.block_length = block_length;
  trace.gains.assign(users, std::vector<double>(blocks));
  for (std::size_t k = 0; k < users; ++k)
    for (std::size_t b = 0; b < blocks; ++b)
      trace.gains[k][b] = block_gain(seed, static_cast<int>(k), b, antennas);
  return trace;
}

void write_trace_csv(std::ostream& out, const ChannelTrace& trace) {
  out << "user,block,gain\n" << std::setprecision(17);
  for (std::size_t k = 0; k < trace.gains.size(); ++k)
    for (std::size_t b = 0; b < trace.gains[k].size(); ++b)
      out << k << ',' << b << ',' << trace.gains[k][b] << '\n';
}

}  // namespace qosalloc
