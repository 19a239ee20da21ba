#include <doctest.h>

#include <boost/math/special_functions/lambert_w.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "qosalloc/allocator.hpp"
#include "qosalloc/channel.hpp"
#include "qosalloc/errors.hpp"

using namespace qosalloc;

namespace {

// Cost of the feasible point with bandwidth w: P is forced by the rate constraint.
double forced_cost(double w, double s, double alpha, double g, const SystemParams& p) {
  const double k = p.packet_size * s * std::numbers::ln2 / (p.rate_gap * p.dl_phase);
  const double power = p.noise_psd / (alpha * g) * w * std::expm1(k / w);
  return power + p.pa_efficiency * p.circuit_per_bw * w;
}

double grid_oracle(double s, double alpha, double g, const SystemParams& p) {
  const double k = p.packet_size * s * std::numbers::ln2 / (p.rate_gap * p.dl_phase);
  double best = std::numeric_limits<double>::infinity();
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double x = std::exp(std::log(1e-4) + (std::log(60.0) - std::log(1e-4)) * i / (n - 1));
    best = std::min(best, forced_cost(k / x, s, alpha, g, p));
  }
  return best;
}

}  // namespace

TEST_CASE("two-state target") {
  CHECK(two_state_target(0.0, 7934.0, 1e-4) == 0.0);
  CHECK(two_state_target(5.0, 7940.0, 1e-4) == doctest::Approx(0.794));
  CHECK(two_state_target(0.3, 7940.0, 1e-4) == doctest::Approx(0.3));
}

TEST_CASE("zero target allocates nothing") {
  const SystemParams p = SystemParams::reference();
  const Allocation a = min_power_alloc(0.0, 1e-11, 8.0, p);
  CHECK(a.transmit_power == 0.0);
  CHECK(a.bandwidth == 0.0);
  CHECK(allocation_cost(a, p) == 0.0);
  const Allocation c = closed_form_alloc(0.0, 1e-11, 8, 1e-7, p);
  CHECK(c.transmit_power == 0.0);
  CHECK(c.bandwidth == 0.0);
}

TEST_CASE("solver beats a dense grid and meets the rate exactly") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ls(-3.0, 1.0), ld(std::log(5.0), std::log(300.0));
  std::uniform_int_distribution<int> nt(1, 64);
  for (int i = 0; i < 60; ++i) {
    const int antennas = nt(rng);
    const SystemParams p = SystemParams::reference(antennas);
    Engine ch(rng());
    const double s = std::exp(ls(rng)), alpha = 1e-12 * std::exp(ld(rng)) / 10.0;
    const double g = sample_gain(antennas, ch);
    const Allocation a = min_power_alloc(s, alpha, g, p);
    CHECK(allocation_cost(a, p) <= grid_oracle(s, alpha, g, p) * (1.0 + 1e-6));
    CHECK(achievable_packets(a.transmit_power, a.bandwidth, alpha, g, p) ==
          doctest::Approx(s).epsilon(1e-8));
  }
}

TEST_CASE("optimal spectral efficiency matches the Lambert-W root") {
  const SystemParams p = SystemParams::reference(8);
  for (double g : {0.2, 1.0, 8.0, 40.0}) {
    const double alpha = 1e-12;
    const double a = p.noise_psd / (alpha * g), b = p.pa_efficiency * p.circuit_per_bw;
    const double x_star = 1.0 + boost::math::lambert_w0((b / a - 1.0) / std::numbers::e);
    const double s = 0.8;
    const double k = p.packet_size * s * std::numbers::ln2 / (p.rate_gap * p.dl_phase);
    const Allocation al = min_power_alloc(s, alpha, g, p);
    CHECK(k / al.bandwidth == doctest::Approx(x_star).epsilon(1e-7));
  }
}

TEST_CASE("better channels never cost more") {
  const SystemParams p = SystemParams::reference(8);
  double prev = std::numeric_limits<double>::infinity();
  for (double g = 0.1; g < 100.0; g *= 4.0) {
    const double c = allocation_cost(min_power_alloc(0.7, 2e-12, g, p), p);
    CHECK(c < prev);
    prev = c;
  }
}

TEST_CASE("reduced cost is unimodal") {
  const SystemParams p = SystemParams::reference(8);
  const double s = 0.8, alpha = 2e-12, g = 3.0;
  const Allocation a = min_power_alloc(s, alpha, g, p);
  double prev = forced_cost(a.bandwidth * 1e-3, s, alpha, g, p);
  for (double w = a.bandwidth * 1.1e-3; w < a.bandwidth; w *= 1.1) {
    const double c = forced_cost(w, s, alpha, g, p);
    CHECK(c <= prev);
    prev = c;
  }
  prev = forced_cost(a.bandwidth, s, alpha, g, p);
  for (double w = a.bandwidth * 1.1; w < a.bandwidth * 1e3; w *= 1.1) {
    const double c = forced_cost(w, s, alpha, g, p);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("hardened ratio") {
  const SystemParams p = SystemParams::reference(8);
  const double alpha = 2e-12;
  const double r = ptw_ratio(alpha, 8, p);
  const double c = alpha * 8 / p.noise_psd;
  const auto f = [&](double x) { return (x / p.pa_efficiency + p.circuit_per_bw) / std::log2(1.0 + c * x); };
  CHECK(f(r) < f(r * 1.01));
  CHECK(f(r) < f(r * 0.99));
  CHECK(f(r * 1e-6) > f(r));
  CHECK(f(r * 1e6) > f(r));
  for (double s : {0.01, 0.3, 0.8, 5.0}) {
    const Allocation a = min_power_alloc(s, alpha, 8.0, p);
    CHECK(a.transmit_power / a.bandwidth == doctest::Approx(r).epsilon(1e-6));
  }
  CHECK_THROWS_AS(ptw_ratio(0.0, 8, p), DomainError);
  CHECK_THROWS_AS(ptw_ratio(alpha, 0, p), DomainError);
}

TEST_CASE("closed form equals the solver on a hardened channel") {
  for (int nt : {2, 8, 32}) {
    const SystemParams p = SystemParams::reference(nt);
    for (double alpha : {1e-13, 2e-12, 5e-11}) {
      const double ptw = ptw_ratio(alpha, nt, p);
      for (double s : {0.05, 0.8, 3.0}) {
        const Allocation cf = closed_form_alloc(s, alpha, nt, ptw, p);
        const Allocation num = min_power_alloc(s, alpha, nt, p);
        CHECK(cf.bandwidth == doctest::Approx(num.bandwidth).epsilon(1e-6));
        CHECK(cf.transmit_power == doctest::Approx(num.transmit_power).epsilon(1e-6));
        const Allocation twice = closed_form_alloc(2.0 * s, alpha, nt, ptw, p);
        CHECK(twice.bandwidth == doctest::Approx(2.0 * cf.bandwidth).epsilon(1e-12));
        CHECK(twice.transmit_power == doctest::Approx(2.0 * cf.transmit_power).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("total power") {
  const SystemParams p = SystemParams::reference(8);
  CHECK(total_power({}, p).total == doctest::Approx(1.088));
  const std::vector<Allocation> one{{0, 1.0, 1e6, 1.0}};
  CHECK(total_power(one, p).total == doctest::Approx(3.664).epsilon(1e-12));
  std::vector<Allocation> two{{0, 0.3, 2e5, 1.0}, {1, 0.5, 4e5, 1.0}};
  const double base = total_power(two, p).total;
  for (Allocation& a : two) a.transmit_power *= 2.0;
  CHECK(total_power(two, p).total - base == doctest::Approx(0.8 / 0.5).epsilon(1e-12));
}

TEST_CASE("average power lower bound") {
  const SystemParams p = SystemParams::reference(8);
  std::vector<UserLink> users(3);
  for (int k = 0; k < 3; ++k) {
    users[k].user_id = k;
    users[k].large_scale_gain = 1e-12 * (k + 1);
  }
  CHECK(avg_power_lower_bound(users, 8, p, 1e-7) == doctest::Approx(p.circuit_static));
  users[1].arrival_rate = 0.1;
  const double one = avg_power_lower_bound(users, 8, p, 1e-7);
  users[1].arrival_rate = 0.2;
  const double two = avg_power_lower_bound(users, 8, p, 1e-7);
  CHECK(one > p.circuit_static);
  CHECK(two > one);
  CHECK(two - p.circuit_static == doctest::Approx(2.0 * (one - p.circuit_static)).epsilon(1e-12));
}

TEST_CASE("required resource bounds") {
  const SystemParams p8 = SystemParams::reference(8);
  std::vector<UserLink> users(2);
  for (int k = 0; k < 2; ++k) {
    users[k].user_id = k;
    users[k].large_scale_gain = 1e-12;
    users[k].arrival_rate = 0.16;
    users[k].qos = {8e-4, 5e-8, 0.0, 0.0};
  }
  const ResourceBounds b8 = required_resource_bounds(users, 8, p8);
  const ResourceBounds b16 = required_resource_bounds(users, 16, SystemParams::reference(16));
  CHECK(b8.bandwidth > 0.0);
  CHECK(b8.transmit_power > 0.0);
  CHECK(b16.bandwidth < b8.bandwidth);
  CHECK(b16.transmit_power > b8.transmit_power);
  // Each user at full service rate T_f·E^B with the hardened allocation.
  const double eb = 0.16 / 1e-4 / std::log1p(1e-4 * -std::log(5e-8) / (0.16 * 8e-4)) *
                    std::expm1(std::log1p(1e-4 * -std::log(5e-8) / (0.16 * 8e-4)));
  const Allocation a = closed_form_alloc(1e-4 * eb, 1e-12, 8, ptw_ratio(1e-12, 8, p8), p8);
  CHECK(b8.bandwidth == doctest::Approx(2.0 * a.bandwidth).epsilon(1e-10));
  CHECK(b8.transmit_power == doctest::Approx(2.0 * a.transmit_power).epsilon(1e-10));
}

TEST_CASE("invalid inputs") {
  const SystemParams p = SystemParams::reference();
  CHECK_THROWS_AS(min_power_alloc(-1.0, 1e-12, 1.0, p), DomainError);
  CHECK_THROWS_AS(min_power_alloc(1.0, 0.0, 1.0, p), DomainError);
  CHECK_THROWS_AS(min_power_alloc(1.0, 1e-12, 0.0, p), DomainError);
  CHECK_THROWS_AS(closed_form_alloc(1.0, 1e-12, 8, 0.0, p), DomainError);
}
