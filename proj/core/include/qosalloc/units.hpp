#pragma once

#include <cmath>

// Conversions between the human-facing config units and the SI values used
// everywhere else. Nothing outside the config boundary should call these.
namespace qosalloc::units {

inline constexpr double kMilli = 1e-3;
inline constexpr double kMega = 1e6;
inline constexpr double kBitsPerByte = 8.0;

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

inline double ms_to_s(double ms) { return ms * kMilli; }
inline double s_to_ms(double s) { return s / kMilli; }

inline double mw_per_mhz_to_w_per_hz(double v) { return v * kMilli / kMega; }
inline double w_per_hz_to_mw_per_mhz(double v) { return v * kMega / kMilli; }

inline double mw_to_w(double v) { return v * kMilli; }
inline double w_to_mw(double v) { return v / kMilli; }

inline double bytes_to_bits(double v) { return v * kBitsPerByte; }
inline double bits_to_bytes(double v) { return v / kBitsPerByte; }

}  // namespace qosalloc::units
