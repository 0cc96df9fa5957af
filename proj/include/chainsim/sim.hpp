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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "chainsim/chain.hpp"

namespace chainsim {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct MachineSpec {
    std::string id;
    double cpu_cores = 16.0;
    double mem_units = 16384.0;
    double util_threshold = 0.7;  // U_max, in (0, 1]
};

struct ServiceSpec {
    std::string id;
    std::string machine;
    double base_service_time_ms = 10.0;
    double per_replica_rate = 100.0;  // requests/interval at reference allocation
    int replicas = 1;
    double cpu_per_replica = 1.0;     // reference CPU allocation, cores
    double mem_per_replica = 512.0;   // reference memory allocation, units
    std::int64_t queue_capacity = 1000;
    int max_replicas = 10;
    double entry_weight = 1.0;        // share of external arrivals (roots only)
};

struct TopologyEdge {
    std::string from;
    std::string to;
    double branch_probability = 1.0;
};

// Action granularity: h in [-n, n] replicas, v in [-m, m] vertical steps.
struct ScalingBounds {
    int n = 1;
    int m = 2;
    double cpu_step = 0.5;    // cores per vertical step
    double mem_step = 256.0;  // units per vertical step
    double min_cpu = 0.5;     // per-replica allocation floor
    double min_mem = 256.0;
};

struct TopologyConfig {
    double interval_seconds = 60.0;
    std::vector<ServiceSpec> services;
    std::vector<TopologyEdge> edges;
    ScalingBounds scaling;
    double idle_fraction = 0.05;  // CPU a replica burns while idle
};

TopologyConfig load_topology(const std::string& path);
std::vector<MachineSpec> load_machines(const std::string& path);

// ---------------------------------------------------------------------------
// Runtime state
// ---------------------------------------------------------------------------

struct MachineState {
    MachineSpec spec;
    double cpu_util = 0.0;
    double mem_util = 0.0;

    // The binding resource governs pressure.
    double util() const { return cpu_util > mem_util ? cpu_util : mem_util; }

    friend bool operator==(const MachineState&, const MachineState&) = default;
};

struct Deployment {
    ServiceSpec spec;           // reference values
    int machine_index = 0;
    int replicas = 1;
    double cpu_per_replica = 1.0;  // current allocation
    double mem_per_replica = 512.0;
    std::int64_t queue = 0;
    std::int64_t inflight = 0;  // handed down by parents, consumable next interval

    // Last-interval observations.
    double busy = 0.0;          // processed / capacity
    double latency_ms = 0.0;    // per-hop latency
    double queue_delay_ms = 0.0;

    friend bool operator==(const Deployment&, const Deployment&) = default;
};

// Topology edge resolved to deployment indices.
struct ResolvedEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    double branch_probability = 1.0;

    friend bool operator==(const ResolvedEdge&, const ResolvedEdge&) = default;
};

struct ClusterState {
    double interval_seconds = 60.0;
    ScalingBounds scaling;
    double idle_fraction = 0.05;
    std::vector<MachineState> machines;
    std::vector<Deployment> deployments;
    std::vector<ResolvedEdge> edges;                  // validated DAG
    std::vector<std::vector<std::size_t>> out_edges;  // edge indices by source
    std::vector<std::size_t> topo_order;              // deployment indices
    std::vector<std::size_t> root_indices;
    std::mt19937_64 rng;

    const Deployment* find(const std::string& service) const;
    Deployment* find(const std::string& service);

    friend bool operator==(const ClusterState&, const ClusterState&) = default;
};

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

// Hybrid per-deployment delta: h replicas, v_cpu/v_mem vertical steps.
struct ServiceDelta {
    std::string service;
    int h = 0;
    int v_cpu = 0;
    int v_mem = 0;

    bool is_noop() const { return h == 0 && v_cpu == 0 && v_mem == 0; }
    friend bool operator==(const ServiceDelta&, const ServiceDelta&) = default;
};

struct ScalingAction {
    std::vector<ServiceDelta> deltas;

    std::size_t active_count() const;
    friend bool operator==(const ScalingAction&, const ScalingAction&) = default;
};

// The enumerated Cartesian action set: one (h, v) sub-action per
// (machine, resource) slot, |A| = ((2n+1)(2m+1))^(K*I). Enumeration is
// odometer order, slot 0 fastest; within a slot v varies fastest.
class ActionSpace {
public:
    struct SubAction {
        int h = 0;
        int v = 0;
        friend bool operator==(const SubAction&, const SubAction&) = default;
    };

    // Throws ConfigError when the enumerated size would exceed `cap`.
    ActionSpace(int machines, int resource_types, int n, int m,
                std::uint64_t cap = kDefaultCap);

    std::uint64_t size() const { return size_; }
    std::vector<SubAction> decode(std::uint64_t index) const;

    int n() const { return n_; }
    int m() const { return m_; }
    int slots() const { return slots_; }

    static constexpr std::uint64_t kDefaultCap = 1'000'000;

private:
    int n_ = 0;
    int m_ = 0;
    int slots_ = 0;          // K * I
    std::uint64_t base_ = 1; // (2n+1)(2m+1)
    std::uint64_t size_ = 1;
};

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

struct ServiceStats {
    std::int64_t arrived = 0;
    std::int64_t processed = 0;
    std::int64_t failed = 0;
    std::int64_t queue = 0;
    double latency_ms = 0.0;
    double queue_delay_ms = 0.0;
    double busy = 0.0;
};

struct IntervalMetrics {
    std::int64_t arrived = 0;
    std::int64_t processed = 0;
    std::int64_t failed = 0;
    std::int64_t queue_delta = 0;           // sum over services
    double avg_response_time_ms = 0.0;
    double rps = 0.0;
    std::map<std::string, ServiceStats> per_service;
};

// Builds the initial cluster: queues empty, utilizations at the idle
// baseline, RNG seeded. Validates the topology (DAG, placements fit machine
// capacity) and throws ConfigError otherwise.
ClusterState init_cluster(const TopologyConfig& topology,
                          const std::vector<MachineSpec>& machines, std::uint64_t seed);

// Clamping application of a hybrid action:
//   replicas' = clamp(replicas + h, 1, min(max_replicas, machine headroom))
//   alloc'    = clamp(alloc + v * step, min_alloc, machine headroom)
// Unknown services are ignored; components are clamped into [-n,n]/[-m,m].
void apply_action(ClusterState& state, const ScalingAction& action);

// Advances one interval: applies the action, admits external arrivals at the
// roots plus last interval's handoffs, processes up to capacity, counts
// queue overflow as failures, hands processed work to children for the next
// interval, and refreshes latencies and utilizations.
// Guarantees arrived == processed + failed + queue_delta exactly.
IntervalMetrics step(ClusterState& state, std::int64_t arrivals,
                     const std::optional<ScalingAction>& action);

// Spans describing the topology as observed in the last completed interval
// (root spans plus one span per edge, weighted by the child's latency).
std::vector<Span> make_spans(const ClusterState& state, const std::string& trace_id);

// Per-hop latency of the current interval for one deployment.
double hop_latency_ms(const ClusterState& state, std::size_t deployment_index);

// Longest root-to-sink path over current per-hop latencies.
double end_to_end_latency_ms(const ClusterState& state);

}  // namespace chainsim
