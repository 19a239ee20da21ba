#pragma once

#include <optional>

#include "qosalloc/scenario.hpp"

// Effective bandwidth of a Poisson source and the exponential bound on the
// queueing-delay violation probability that it guarantees.
//
// Units: lambda in packets per frame, T_f and delays in seconds, E^B in
// packets per second.
namespace qosalloc {

/// QoS exponent that makes exp(-theta·E^B·D^q_max) equal epsilon^q:
///   theta = ln(T_f·ln(1/eps) / (lambda·D^q_max) + 1).
/// Returns nullopt when lambda == 0 (no arrivals, so no constraint).
std::optional<double> qos_exponent(double arrival_rate, double frame_duration, double delay_bound,
                                   double violation_prob);

/// E^B(theta) = lambda / (T_f·theta) · (e^theta - 1).
double effective_bandwidth_poisson(double arrival_rate, double frame_duration, double qos_exp);

/// E^B written directly in terms of the delay requirement:
///   ln(1/eps) / (D^q_max · ln(T_f·ln(1/eps) / (lambda·D^q_max) + 1)).
/// Zero when lambda == 0.
double effective_bandwidth_qos(double arrival_rate, double frame_duration, double delay_bound,
                               double violation_prob);

/// exp(-theta·E^B·D_th).
double delay_violation_upper_bound(double qos_exp, double effective_bw, double threshold);

/// Copy of `qos` with theta and E^B filled for the given arrival rate.
QueueQoS with_effective_bandwidth(QueueQoS qos, double arrival_rate, double frame_duration);

}  // namespace qosalloc
