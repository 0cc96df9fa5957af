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

// Independent oracles shared by the unit and acceptance suites. These stay
// deliberately naive (exhaustive enumeration, plain recursion) so they do
// not share code paths with the implementations they check.

#pragma once

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "chainsim/chain.hpp"
#include "chainsim/sim.hpp"

namespace test_oracles {

// Random DAG with <= max_nodes nodes and <= max_edges edges. Node ids are
// two-letter strings; edges only go from a lower to a higher shuffled rank,
// which guarantees acyclicity. Weights are multiples of 0.25 so equal-weight
// paths occur and exercise the tie-break.
inline chainsim::CallGraph random_dag(std::mt19937_64& rng, int max_nodes, int max_edges) {
    int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_nodes));
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i)
        names.push_back(std::string(1, static_cast<char>('a' + i / 8)) +
                        static_cast<char>('a' + i % 8));

    chainsim::CallGraph graph;
    graph.nodes = names;

    std::set<std::pair<int, int>> used;
    int edges = n < 2 ? 0 : static_cast<int>(rng() % static_cast<std::uint64_t>(max_edges + 1));
    for (int e = 0; e < edges; ++e) {
        int from = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        int to = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        if (from == to) continue;
        if (from > to) std::swap(from, to);  // forward edges only
        if (!used.insert({from, to}).second) continue;
        double weight = 0.25 * static_cast<double>(rng() % 17);  // 0 .. 4 in 0.25 steps
        graph.edges.push_back({names[static_cast<std::size_t>(from)],
                               names[static_cast<std::size_t>(to)], weight});
    }
    std::sort(graph.edges.begin(), graph.edges.end(), [](const auto& a, const auto& b) {
        return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
    return graph;
}

inline double path_weight(const chainsim::CallGraph& graph,
                          const std::vector<std::string>& path) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        for (const auto& edge : graph.edges)
            if (edge.from == path[i] && edge.to == path[i + 1]) total += edge.weight_ms;
    return total;
}

inline void enumerate_paths(const chainsim::CallGraph& graph, std::vector<std::string>& path,
                            std::vector<std::vector<std::string>>& out) {
    const std::string here = path.back();  // copy: push_back below may reallocate
    bool has_out = false;
    for (const auto& edge : graph.edges) {
        if (edge.from != here) continue;
        has_out = true;
        path.push_back(edge.to);
        enumerate_paths(graph, path, out);
        path.pop_back();
    }
    if (!has_out) out.push_back(path);  // sink reached
}

inline std::vector<std::vector<std::string>> all_root_to_sink_paths(
    const chainsim::CallGraph& graph) {
    std::vector<std::vector<std::string>> out;
    for (const auto& root : graph.roots()) {
        std::vector<std::string> path{root};
        enumerate_paths(graph, path, out);
    }
    return out;
}

// Max-weight root-to-sink path by exhaustive enumeration, ties broken toward
// the lexicographically smaller node sequence.
inline chainsim::Chain brute_force_critical_chain(const chainsim::CallGraph& graph) {
    chainsim::Chain best;
    bool first = true;
    for (const auto& path : all_root_to_sink_paths(graph)) {
        double weight = path_weight(graph, path);
        if (first || weight > best.total_latency_ms ||
            (weight == best.total_latency_ms && path < best.nodes)) {
            best.nodes = path;
            best.total_latency_ms = weight;
            first = false;
        }
    }
    return best;
}

// Random chain-and-fanout topology plus machines for conservation and
// monotonicity runs. Queue capacities vary; machine capacity is ample so
// construction never fails.
struct RandomScenario {
    chainsim::TopologyConfig topology;
    std::vector<chainsim::MachineSpec> machines;
};

inline RandomScenario random_topology(std::mt19937_64& rng, int max_services = 6) {
    RandomScenario scenario;
    int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_services));

    scenario.machines.push_back({"m0", 1e6, 1e9, 0.7});
    scenario.machines.push_back({"m1", 1e6, 1e9, 0.7});

    for (int i = 0; i < n; ++i) {
        chainsim::ServiceSpec spec;
        spec.id = "svc" + std::to_string(i);
        spec.machine = i % 2 == 0 ? "m0" : "m1";
        spec.base_service_time_ms = 5.0 + static_cast<double>(rng() % 20);
        spec.per_replica_rate = 40.0 + static_cast<double>(rng() % 200);
        spec.replicas = 1 + static_cast<int>(rng() % 3);
        spec.cpu_per_replica = 1.0;
        spec.mem_per_replica = 512.0;
        spec.queue_capacity = static_cast<std::int64_t>(rng() % 300);
        spec.max_replicas = 12;
        scenario.topology.services.push_back(spec);
    }
    // Forward edges with random branch probabilities.
    for (int from = 0; from < n; ++from)
        for (int to = from + 1; to < n; ++to) {
            if (rng() % 3 != 0) continue;
            double p = static_cast<double>(rng() % 101) / 100.0;
            scenario.topology.edges.push_back(
                {"svc" + std::to_string(from), "svc" + std::to_string(to), p});
        }
    scenario.topology.interval_seconds = 60.0;
    return scenario;
}

}  // namespace test_oracles
