#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qosalloc/errors.hpp"
#include "qosalloc/mdone.hpp"
#include "qosalloc/queue_sim.hpp"

using namespace qosalloc;

namespace {

Scenario small_scenario(int users, int nearby, double source_rate = 20.0) {
  const SystemParams p = SystemParams::reference(8);
  TopologySpec topo;
  topo.users = users;
  topo.nearby_count = nearby;
  topo.source_rate = source_rate;
  const QosBudget budget;
  return {p, build_highway_topology(topo, p, budget), budget.loss_prob};
}

}  // namespace

TEST_CASE("Poisson arrivals") {
  Engine rng(1);
  CHECK(sample_arrivals(0.0, rng) == 0);
  const int n = 10000000;
  std::uint64_t zeros = 0;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto a = static_cast<double>(sample_arrivals(0.16, rng));
    zeros += a == 0.0;
    sum += a;
    sq += a * a;
  }
  const double mean = sum / n;
  CHECK(static_cast<double>(zeros) / n == doctest::Approx(std::exp(-0.16)).epsilon(1e-3));
  CHECK(sq / n - mean * mean == doctest::Approx(mean).epsilon(0.02));
  CHECK_THROWS_AS(sample_arrivals(-1.0, rng), DomainError);
}

TEST_CASE("empty queue serves nothing") {
  QueueState q;
  StepResult r;
  step(q, 0, 0.794, {}, r);
  CHECK(r.departed == 0.0);
  CHECK(r.completed == 0);
  CHECK(q.packets.empty());
}

TEST_CASE("fluid FIFO hand trace") {
  QueueState q;
  StepResult r;
  const std::vector<double> five(5, 1.0);
  step(q, 0, 0.0, five, r);
  CHECK(q.backlog() == doctest::Approx(5.0));
  step(q, 1, 0.794, {}, r);
  CHECK(r.departed == doctest::Approx(0.794));
  CHECK(r.completed == 0);
  REQUIRE(r.waits.size() == 1);
  CHECK(r.waits[0] == doctest::Approx(0.0));
  step(q, 2, 0.794, {}, r);
  CHECK(r.completed == 1);
  CHECK(r.departed == doctest::Approx(0.794));
  REQUIRE(r.waits.size() == 1);
  CHECK(r.waits[0] == doctest::Approx(1.0 / 0.794));
  CHECK(q.backlog() == doctest::Approx(5.0 - 2.0 * 0.794));
}

TEST_CASE("arrivals inside a frame wait for the server") {
  QueueState q;
  StepResult r;
  const std::vector<double> at{0.25, 0.5};
  step(q, 0, 2.0, at, r);
  REQUIRE(r.waits.size() == 2);
  CHECK(r.waits[0] == doctest::Approx(0.0));
  CHECK(r.waits[1] == doctest::Approx(0.25));
  CHECK(r.completed == 1);
  CHECK(r.departed == doctest::Approx(1.5));
  CHECK(q.backlog() == doctest::Approx(0.5));
  CHECK_THROWS_AS(step(q, 1, 1.0, std::vector<double>{1.5}, r), DomainError);
  CHECK_THROWS_AS(step(q, 1, -1.0, {}, r), DomainError);
}

TEST_CASE("frame-end arrivals follow the batch recursion") {
  std::mt19937_64 rng(8);
  std::poisson_distribution<int> arrivals(0.6);
  for (double s : {0.3, 0.794, 1.7}) {
    QueueState q;
    StepResult r;
    double expected = 0.0;
    for (std::size_t n = 0; n < 5000; ++n) {
      const double before = q.backlog();
      CHECK(before == doctest::Approx(expected).epsilon(1e-9));
      const std::vector<double> batch(static_cast<std::size_t>(arrivals(rng)), 1.0);
      step(q, n, s, batch, r);
      CHECK(r.departed <= std::min(before, s) + 1e-12);
      CHECK(r.departed == doctest::Approx(std::min(before, s)).epsilon(1e-9));
      const double via_departures = before - r.departed + static_cast<double>(batch.size());
      expected = std::max(expected - s, 0.0) + static_cast<double>(batch.size());
      CHECK(via_departures == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("no arrivals means only static circuit power") {
  Scenario sc = small_scenario(4, 3, 0.0);
  SimOptions o;
  o.frames = 500;
  o.thresholds = {0.0, 1e-4};
  const DelayStats st = run(sc, o);
  CHECK(st.samples == 0);
  CHECK(st.arrivals == 0);
  CHECK(st.ccdf(0) == 0.0);
  CHECK(st.total.mean == doctest::Approx(sc.params.circuit_static));
  CHECK(st.total.max == doctest::Approx(sc.params.circuit_static));
}

TEST_CASE("flow conservation, determinism and thread independence") {
  const Scenario sc = small_scenario(6, 5, 400.0);
  for (Policy pol : {Policy::kTwoStateFinite, Policy::kTwoStateLargeNt, Policy::kConstantRate}) {
    SimOptions o;
    o.policy = pol;
    o.frames = 20000;
    o.seed = 4;
    o.thresholds = {0.0, 1e-4, 3e-4};
    o.power_subsample = 100;
    const DelayStats a = run(sc, o);
    o.threads = 3;
    const DelayStats b = run(sc, o);
    CHECK(a.arrivals > 0);
    CHECK(a.arrivals == a.departures + a.resident);
    CHECK(a.arrivals == b.arrivals);
    CHECK(a.exceed == b.exceed);
    CHECK(a.histogram == b.histogram);
    CHECK(a.total.mean == b.total.mean);
    CHECK(a.total.max == b.total.max);
    CHECK(a.trace.size() == 200);
    o.seed = 5;
    CHECK(run(sc, o).arrivals != a.arrivals);
  }
}

TEST_CASE("constant-rate delays follow the M/D/1 law") {
  const Scenario sc = small_scenario(4, 3, 1000.0);
  const UserLink& u = sc.users[0];
  const double s = sc.params.frame_duration * u.qos.effective_bw;
  const auto spec = mdone::MdoneSpec::from_rates(u.arrival_rate, s, sc.params.frame_duration);
  SimOptions o;
  o.policy = Policy::kConstantRate;
  o.account_power = false;
  o.frames = 400000;
  o.seed = 12;
  for (std::size_t l = 0; l < 4; ++l) o.thresholds.push_back(spec.threshold(l));
  const DelayStats st = run(sc, o);
  for (std::size_t l = 0; l < 4; ++l) {
    CAPTURE(l);
    const double want = mdone::delay_ccdf(spec, l);
    CHECK(std::abs(st.ccdf(l) - want) < 4.0 * st.ccdf_std_error[l] + 1e-12);
    CHECK(st.ccdf_std_error[l] > 0.0);
  }
}

TEST_CASE("unstable users still run") {
  Scenario sc = small_scenario(2, 1, 200.0);
  sc.users[0].qos.effective_bw = 0.5 * sc.users[0].arrival_rate / sc.params.frame_duration;
  SimOptions o;
  o.frames = 20000;
  o.account_power = false;
  const DelayStats st = run(sc, o);
  CHECK(st.resident > 100);
  CHECK(st.arrivals == st.departures + st.resident);
}

TEST_CASE("average power respects its lower bound") {
  const Scenario sc = small_scenario(6, 5, 400.0);
  for (Policy pol : {Policy::kTwoStateFinite, Policy::kTwoStateLargeNt}) {
    SimOptions o;
    o.policy = pol;
    o.frames = 100000;
    o.seed = 21;
    const DelayStats st = run(sc, o);
    const NormalizedMetrics m = normalized_metrics(st, sc.users, 8, sc.params, sc.loss_prob);
    CHECK(m.power >= 1.0 - 3.0 * m.power_std_error);
    CHECK(m.power_std_error > 0.0);
    CHECK(m.bandwidth_req < 1.0);
    if (pol == Policy::kTwoStateLargeNt) {
      CHECK(m.power == doctest::Approx(1.0).epsilon(4.0 * m.power_std_error + 1e-6));
      CHECK(m.transmit_req < 1.0);
    }
    CHECK(st.energy_efficiency > 0.0);
  }
}

TEST_CASE("bad options") {
  const Scenario sc = small_scenario(2, 1);
  SimOptions o;
  o.frames = 0;
  CHECK_THROWS_AS(run(sc, o), ConfigError);
  o.frames = 10;
  o.thresholds = {-1.0};
  CHECK_THROWS_AS(run(sc, o), ConfigError);
}
