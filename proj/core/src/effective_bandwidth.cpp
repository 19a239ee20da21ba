#include "qosalloc/effective_bandwidth.hpp"

#include <cmath>
#include <string>

#include "qosalloc/errors.hpp"

namespace qosalloc {

namespace {

void check_requirement(double frame_duration, double delay_bound, double violation_prob) {
  if (!(frame_duration > 0.0)) throw DomainError("frame duration must be positive");
  if (!(delay_bound > 0.0)) throw DomainError("queueing delay bound must be positive");
  if (!(violation_prob > 0.0 && violation_prob < 1.0))
    throw DomainError("violation probability must lie in (0, 1)");
}

// ln(1/eps) without forming 1/eps.
double log_inverse(double violation_prob) { return -std::log(violation_prob); }

}  // namespace

std::optional<double> qos_exponent(double arrival_rate, double frame_duration, double delay_bound,
                                   double violation_prob) {
  check_requirement(frame_duration, delay_bound, violation_prob);
  if (arrival_rate < 0.0) throw DomainError("arrival rate must be non-negative");
  if (arrival_rate == 0.0) return std::nullopt;
  const double ratio =
      frame_duration * log_inverse(violation_prob) / (arrival_rate * delay_bound);
  return std::log1p(ratio);
}

double effective_bandwidth_poisson(double arrival_rate, double frame_duration, double qos_exp) {
  if (!(qos_exp > 0.0)) throw DomainError("QoS exponent must be positive");
  if (!(frame_duration > 0.0)) throw DomainError("frame duration must be positive");
  if (arrival_rate < 0.0) throw DomainError("arrival rate must be non-negative");
  return arrival_rate / frame_duration * (std::expm1(qos_exp) / qos_exp);
}

double effective_bandwidth_qos(double arrival_rate, double frame_duration, double delay_bound,
                               double violation_prob) {
  const auto theta = qos_exponent(arrival_rate, frame_duration, delay_bound, violation_prob);
  if (!theta) return 0.0;
  return log_inverse(violation_prob) / (delay_bound * *theta);
}

double delay_violation_upper_bound(double qos_exp, double effective_bw, double threshold) {
  if (!(qos_exp > 0.0) || !(effective_bw > 0.0))
    throw DomainError("upper bound needs positive theta and E^B");
  if (threshold < 0.0) throw DomainError("delay threshold must be non-negative");
  return std::exp(-qos_exp * effective_bw * threshold);
}

QueueQoS with_effective_bandwidth(QueueQoS qos, double arrival_rate, double frame_duration) {
  const auto theta =
      qos_exponent(arrival_rate, frame_duration, qos.delay_bound, qos.violation_prob);
  qos.qos_exponent = theta.value_or(0.0);
  qos.effective_bw = theta ? log_inverse(qos.violation_prob) / (qos.delay_bound * *theta) : 0.0;
  return qos;
}

}  // namespace qosalloc
