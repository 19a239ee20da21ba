#include <doctest.h>

#include <cmath>
#include <set>

#include "qosalloc/errors.hpp"
#include "qosalloc/scenario.hpp"

using namespace qosalloc;

TEST_CASE("queueing share of the delay budget") {
  const QueueQoS interior = derive_queue_qos(1e-3, 1e-7, 1e-4, 1e-4, false);
  CHECK(interior.delay_bound == doctest::Approx(9e-4).epsilon(1e-12));
  CHECK(interior.violation_prob == doctest::Approx(5e-8).epsilon(1e-12));
  const QueueQoS edge = derive_queue_qos(1e-3, 1e-7, 1e-4, 1e-4, true);
  CHECK(edge.delay_bound == doctest::Approx(8e-4).epsilon(1e-12));
  CHECK(edge.violation_prob == doctest::Approx(5e-8).epsilon(1e-12));
  CHECK_THROWS_AS(derive_queue_qos(2e-4, 1e-7, 1e-4, 1e-4, true), ConfigError);
  CHECK_THROWS_AS(derive_queue_qos(1e-3, 0.0, 1e-4, 1e-4, false), ConfigError);
  CHECK_THROWS_AS(derive_queue_qos(1e-3, 1.0, 1e-4, 1e-4, false), ConfigError);
}

TEST_CASE("path loss") {
  CHECK(path_loss(1.0) == doctest::Approx(std::pow(10.0, -3.53)).epsilon(1e-12));
  CHECK(path_loss(10.0) == doctest::Approx(std::pow(10.0, -7.29)).epsilon(1e-12));
  CHECK(path_loss(100.0) == doctest::Approx(std::pow(10.0, -11.05)).epsilon(1e-12));
  CHECK(path_loss(50.0) > path_loss(60.0));
  CHECK_THROWS_AS(path_loss(0.0), DomainError);
  CHECK_THROWS_AS(path_loss(-3.0), DomainError);
}

TEST_CASE("reference parameters") {
  const SystemParams p = SystemParams::reference(8);
  CHECK(p.frames_per_block() == 20);
  CHECK(p.noise_psd == doctest::Approx(std::pow(10.0, -20.3)).epsilon(1e-12));
  CHECK(p.circuit_per_bw == doctest::Approx(5.76e-7).epsilon(1e-12));
  CHECK(p.circuit_static == doctest::Approx(1.088).epsilon(1e-12));
  const SystemParams q = p.with_antennas(16);
  CHECK(q.antennas == 16);
  CHECK(q.circuit_per_bw == doctest::Approx(2.0 * p.circuit_per_bw).epsilon(1e-12));
  CHECK(q.circuit_static == doctest::Approx(2.0 * p.circuit_static).epsilon(1e-12));
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("invalid parameters are rejected") {
  SystemParams p = SystemParams::reference();
  p.dl_phase = 2e-4;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SystemParams::reference();
  p.coherence_time = 2.5e-4;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SystemParams::reference();
  p.rate_gap = 1.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SystemParams::reference();
  p.antennas = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SystemParams::reference();
  p.pa_efficiency = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("highway topology") {
  const SystemParams p = SystemParams::reference();
  const QosBudget budget;
  TopologySpec topo;
  topo.nearby_count = 80;
  const auto users = build_highway_topology(topo, p, budget);
  REQUIRE(users.size() == 160);
  for (const UserLink& u : users) {
    CHECK(u.nearby.size() == 80);
    CHECK(u.arrival_rate == doctest::Approx(0.16).epsilon(1e-12));
    CHECK(std::find(u.nearby.begin(), u.nearby.end(), u.user_id) == u.nearby.end());
    CHECK(u.qos.delay_bound == doctest::Approx(u.is_edge ? 8e-4 : 9e-4).epsilon(1e-12));
    CHECK(u.large_scale_gain == doctest::Approx(path_loss(u.distance)).epsilon(1e-12));
  }

  SUBCASE("range-based neighbourhoods are symmetric") {
    topo.nearby_count = 0;
    const auto ranged = build_highway_topology(topo, p, budget);
    for (const UserLink& u : ranged)
      for (int j : u.nearby) {
        const auto& back = ranged[static_cast<std::size_t>(j)].nearby;
        CHECK(std::find(back.begin(), back.end(), u.user_id) != back.end());
      }
  }

  SUBCASE("a lone vehicle feeds its own queue") {
    topo.users = 1;
    topo.nearby_count = 0;
    const auto lone = build_highway_topology(topo, p, budget);
    REQUIRE(lone.size() == 1);
    CHECK(lone[0].nearby == std::vector<int>{0});
    CHECK(lone[0].arrival_rate == doctest::Approx(20.0 * 1e-4));
  }

  SUBCASE("bad topologies") {
    topo.nearby_count = 160;
    CHECK_THROWS_AS(build_highway_topology(topo, p, budget), ConfigError);
    topo.nearby_count = 0;
    topo.users = 0;
    CHECK_THROWS_AS(build_highway_topology(topo, p, budget), ConfigError);
    topo.users = 4;
    topo.spacing = 0.0;
    CHECK_THROWS_AS(build_highway_topology(topo, p, budget), ConfigError);
  }
}
