// Copyright 2026 The chainsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "chainsim/sim.hpp"

#include <random>

#include "chainsim/errors.hpp"
#include "doctest.h"
#include "test_oracles.hpp"

using namespace chainsim;

namespace {

TopologyConfig single_service_topology(double rate_per_interval, std::int64_t queue_capacity) {
    TopologyConfig topo;
    topo.interval_seconds = 60.0;
    ServiceSpec svc;
    svc.id = "web";
    svc.machine = "m0";
    svc.base_service_time_ms = 10.0;
    svc.per_replica_rate = rate_per_interval;
    svc.replicas = 1;
    svc.cpu_per_replica = 1.0;
    svc.mem_per_replica = 512.0;
    svc.queue_capacity = queue_capacity;
    svc.max_replicas = 8;
    topo.services.push_back(svc);
    return topo;
}

std::vector<MachineSpec> one_machine() { return {{"m0", 16.0, 16384.0, 0.7}}; }

TopologyConfig two_hop_topology() {
    TopologyConfig topo;
    topo.interval_seconds = 60.0;
    for (const char* id : {"A", "B"}) {
        ServiceSpec svc;
        svc.id = id;
        svc.machine = "m0";
        svc.base_service_time_ms = id[0] == 'A' ? 10.0 : 20.0;
        svc.per_replica_rate = 1000.0;
        svc.replicas = 1;
        svc.queue_capacity = 1000;
        topo.services.push_back(svc);
    }
    topo.edges.push_back({"A", "B", 1.0});
    return topo;
}

}  // namespace

TEST_CASE("init_cluster basics") {
    ClusterState state = init_cluster(single_service_topology(100, 10), one_machine(), 7);
    REQUIRE(state.deployments.size() == 1);
    CHECK(state.deployments[0].queue == 0);
    CHECK(state.machines[0].cpu_util == doctest::Approx(1.0 * 0.05 / 16.0));

    // Determinism: same seed gives bit-identical states.
    ClusterState again = init_cluster(single_service_topology(100, 10), one_machine(), 7);
    CHECK(state == again);
}

TEST_CASE("init_cluster rejects over-capacity placement") {
    TopologyConfig topo = single_service_topology(100, 10);
    topo.services[0].cpu_per_replica = 100.0;  // 100 cores on a 16-core machine
    CHECK_THROWS_AS(init_cluster(topo, one_machine(), 1), ConfigError);

    TopologyConfig cyclic = two_hop_topology();
    cyclic.edges.push_back({"B", "A", 1.0});
    CHECK_THROWS_AS(init_cluster(cyclic, one_machine(), 1), ConfigError);
}

TEST_CASE("step with zero arrivals stays idle") {
    ClusterState state = init_cluster(single_service_topology(100, 10), one_machine(), 7);
    IntervalMetrics m = step(state, 0, std::nullopt);
    CHECK(m.arrived == 0);
    CHECK(m.processed == 0);
    CHECK(m.failed == 0);
    CHECK(m.avg_response_time_ms == 0.0);
    CHECK(state.machines[0].cpu_util == doctest::Approx(1.0 * 0.05 / 16.0));
}

TEST_CASE("step applies the min/overflow rule") {
    // capacity 10/interval, queue_capacity 0, arrivals 15 -> processed 10, failed 5
    ClusterState state = init_cluster(single_service_topology(10, 0), one_machine(), 7);
    IntervalMetrics m = step(state, 15, std::nullopt);
    CHECK(m.arrived == 15);
    CHECK(m.processed == 10);
    CHECK(m.failed == 5);
    CHECK(m.queue_delta == 0);
}

TEST_CASE("two-hop response time sums base service times at zero queueing") {
    ClusterState state = init_cluster(two_hop_topology(), one_machine(), 7);
    IntervalMetrics m = step(state, 100, std::nullopt);
    CHECK(m.avg_response_time_ms == doctest::Approx(30.0));  // base_A + base_B
}

TEST_CASE("apply_action clamps replicas and allocations") {
    TopologyConfig topo = single_service_topology(100, 10);
    topo.services[0].cpu_per_replica = 2.0;
    topo.scaling.m = 2;
    ClusterState state = init_cluster(topo, one_machine(), 7);

    SUBCASE("h = +1 adds a replica") {
        state.deployments[0].replicas = 2;
        apply_action(state, {{{"web", +1, 0, 0}}});
        CHECK(state.deployments[0].replicas == 3);
    }
    SUBCASE("h below the floor clamps to 1 replica") {
        apply_action(state, {{{"web", -3, 0, 0}}});
        CHECK(state.deployments[0].replicas == 1);
    }
    SUBCASE("v = +2 steps cpu 2.0 -> 3.0 with headroom") {
        apply_action(state, {{{"web", 0, +2, 0}}});
        CHECK(state.deployments[0].cpu_per_replica == doctest::Approx(3.0));
    }
    SUBCASE("vertical clamp respects machine headroom") {
        state.deployments[0].replicas = 8;  // 16 cores committed of 16
        apply_action(state, {{{"web", 0, +2, 0}}});
        CHECK(state.deployments[0].cpu_per_replica == doctest::Approx(2.0));
    }
    SUBCASE("horizontal clamp respects machine headroom") {
        state.deployments[0].replicas = 8;
        apply_action(state, {{{"web", +1, 0, 0}}});
        CHECK(state.deployments[0].replicas == 8);
    }
    SUBCASE("unknown service is ignored") {
        ClusterState before = state;
        apply_action(state, {{{"nope", +1, +1, +1}}});
        CHECK(state == before);
    }
}

TEST_CASE("action_space sizes match the Cartesian product") {
    CHECK(ActionSpace(1, 1, 1, 1).size() == 9);
    CHECK(ActionSpace(1, 1, 0, 0).size() == 1);
    CHECK(ActionSpace(2, 1, 1, 1).size() == 81);
    CHECK_THROWS_AS(ActionSpace(4, 2, 2, 2, 1'000'000), ConfigError);
}

TEST_CASE("action_space decodes in odometer order") {
    ActionSpace space(1, 1, 1, 1);
    // v varies fastest: index 0 -> (h=-1, v=-1), 1 -> (h=-1, v=0), ...
    CHECK(space.decode(0)[0] == ActionSpace::SubAction{-1, -1});
    CHECK(space.decode(1)[0] == ActionSpace::SubAction{-1, 0});
    CHECK(space.decode(4)[0] == ActionSpace::SubAction{0, 0});
    CHECK(space.decode(8)[0] == ActionSpace::SubAction{1, 1});

    ActionSpace multi(2, 1, 1, 1);
    auto subs = multi.decode(9);  // slot 0 wrapped once: digit (1, 0)
    REQUIRE(subs.size() == 2);
    CHECK(subs[0] == ActionSpace::SubAction{-1, -1});
    CHECK(subs[1] == ActionSpace::SubAction{-1, 0});

    // Enumeration is exhaustive and distinct.
    std::set<std::pair<int, int>> seen;
    for (std::uint64_t i = 0; i < space.size(); ++i) {
        auto sub = space.decode(i)[0];
        seen.insert({sub.h, sub.v});
    }
    CHECK(seen.size() == 9);
    CHECK_THROWS_AS(space.decode(9), DomainError);
}

TEST_CASE("conservation holds exactly over seeded random topologies") {
    std::mt19937_64 rng(2024);
    for (int scenario = 0; scenario < 20; ++scenario) {
        auto random = test_oracles::random_topology(rng);
        ClusterState state = init_cluster(random.topology, random.machines, rng());
        for (int t = 0; t < 500; ++t) {
            auto arrivals = static_cast<std::int64_t>(rng() % 500);
            std::optional<ScalingAction> action;
            if (rng() % 4 == 0) {
                auto which = rng() % state.deployments.size();
                action = ScalingAction{{ServiceDelta{
                    state.deployments[which].spec.id,
                    static_cast<int>(rng() % 3) - 1, static_cast<int>(rng() % 5) - 2,
                    static_cast<int>(rng() % 5) - 2}}};
            }
            IntervalMetrics m = step(state, arrivals, action);
            REQUIRE(m.arrived == m.processed + m.failed + m.queue_delta);
        }
    }
}

TEST_CASE("more replicas never increase same-interval failures") {
    std::mt19937_64 rng(555);
    for (int scenario = 0; scenario < 40; ++scenario) {
        auto random = test_oracles::random_topology(rng);
        std::uint64_t seed = rng();
        auto arrivals = static_cast<std::int64_t>(rng() % 2000);
        auto target = rng() % random.topology.services.size();

        // Warm both copies identically, then diverge on one action.
        ClusterState lean = init_cluster(random.topology, random.machines, seed);
        for (int t = 0; t < 5; ++t) step(lean, arrivals, std::nullopt);
        ClusterState boosted = lean;

        ScalingAction up{{ServiceDelta{random.topology.services[target].id, +1, 0, 0}}};
        IntervalMetrics lean_m = step(lean, arrivals, std::nullopt);
        IntervalMetrics boosted_m = step(boosted, arrivals, up);
        CHECK(boosted_m.failed <= lean_m.failed);
    }
}

TEST_CASE("step is deterministic for identical state, arrivals, action") {
    std::mt19937_64 rng(31);
    auto random = test_oracles::random_topology(rng);
    ClusterState a = init_cluster(random.topology, random.machines, 17);
    ClusterState b = init_cluster(random.topology, random.machines, 17);
    for (int t = 0; t < 100; ++t) {
        auto arrivals = static_cast<std::int64_t>(rng() % 300);
        IntervalMetrics ma = step(a, arrivals, std::nullopt);
        IntervalMetrics mb = step(b, arrivals, std::nullopt);
        REQUIRE(ma.arrived == mb.arrived);
        REQUIRE(ma.processed == mb.processed);
        REQUIRE(ma.failed == mb.failed);
        REQUIRE(ma.avg_response_time_ms == mb.avg_response_time_ms);
        REQUIRE(a == b);
    }
}

TEST_CASE("response time never drops below the critical chain's base sum") {
    std::mt19937_64 rng(808);
    for (int scenario = 0; scenario < 10; ++scenario) {
        auto random = test_oracles::random_topology(rng);
        ClusterState state = init_cluster(random.topology, random.machines, rng());

        // Base-time critical chain from the topology (node-weighted oracle).
        CallGraph graph;
        for (const auto& svc : random.topology.services) graph.nodes.push_back(svc.id);
        for (const auto& edge : random.topology.edges) {
            double base = 0.0;
            for (const auto& svc : random.topology.services)
                if (svc.id == edge.to) base = svc.base_service_time_ms;
            graph.edges.push_back({edge.from, edge.to, base});
        }
        double root_base = 0.0;
        for (const auto& root : graph.roots())
            for (const auto& svc : random.topology.services)
                if (svc.id == root) root_base = std::max(root_base, svc.base_service_time_ms);
        double chain_base = 0.0;
        for (const auto& path : test_oracles::all_root_to_sink_paths(graph)) {
            double base_sum = 0.0;
            for (const auto& svc : random.topology.services)
                for (const auto& node : path)
                    if (svc.id == node) base_sum += svc.base_service_time_ms;
            chain_base = std::max(chain_base, base_sum);
        }

        for (int t = 0; t < 50; ++t) {
            IntervalMetrics m = step(state, static_cast<std::int64_t>(rng() % 800),
                                     std::nullopt);
            if (m.processed > 0) CHECK(m.avg_response_time_ms >= chain_base - 1e-9);
        }
    }
}

TEST_CASE("make_spans covers roots and edges with current latencies") {
    ClusterState state = init_cluster(two_hop_topology(), one_machine(), 7);
    step(state, 100, std::nullopt);
    auto spans = make_spans(state, "42");
    REQUIRE(spans.size() == 2);
    CHECK(!spans[0].parent_service.has_value());
    CHECK(spans[0].service == "A");
    CHECK(spans[1].parent_service.value() == "A");
    CHECK(spans[1].service == "B");
    CHECK(spans[1].processing_time_ms == doctest::Approx(20.0));
}
