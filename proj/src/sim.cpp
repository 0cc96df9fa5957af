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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "chainsim/errors.hpp"

namespace chainsim {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Config loading
// ---------------------------------------------------------------------------

namespace {

json load_json(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ConfigError(std::string("cannot open ") + what + " file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError(std::string(what) + " file '" + path + "': " + e.what());
    }
    return doc;
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : it->get<T>();
}

}  // namespace

TopologyConfig load_topology(const std::string& path) {
    json doc = load_json(path, "topology");
    TopologyConfig topo;
    try {
        topo.interval_seconds = get_or(doc, "interval_seconds", 60.0);
        topo.idle_fraction = get_or(doc, "idle_fraction", 0.05);
        if (doc.contains("scaling")) {
            const auto& s = doc["scaling"];
            topo.scaling.n = get_or(s, "n", 1);
            topo.scaling.m = get_or(s, "m", 2);
            topo.scaling.cpu_step = get_or(s, "cpu_step", 0.5);
            topo.scaling.mem_step = get_or(s, "mem_step", 256.0);
            topo.scaling.min_cpu = get_or(s, "min_cpu", 0.5);
            topo.scaling.min_mem = get_or(s, "min_mem", 256.0);
        }
        for (const auto& svc : doc.at("services")) {
            ServiceSpec spec;
            spec.id = svc.at("id").get<std::string>();
            spec.machine = svc.at("machine").get<std::string>();
            spec.base_service_time_ms = svc.at("base_service_time_ms").get<double>();
            spec.per_replica_rate = svc.at("per_replica_rate").get<double>();
            spec.replicas = get_or(svc, "replicas", 1);
            spec.cpu_per_replica = get_or(svc, "cpu_per_replica", 1.0);
            spec.mem_per_replica = get_or(svc, "mem_per_replica", 512.0);
            spec.queue_capacity = get_or<std::int64_t>(svc, "queue_capacity", 1000);
            spec.max_replicas = get_or(svc, "max_replicas", 10);
            spec.entry_weight = get_or(svc, "entry_weight", 1.0);
            topo.services.push_back(std::move(spec));
        }
        for (const auto& edge : doc.at("edges")) {
            TopologyEdge e;
            e.from = edge.at("from").get<std::string>();
            e.to = edge.at("to").get<std::string>();
            e.branch_probability = get_or(edge, "branch_probability", 1.0);
            topo.edges.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw ConfigError("topology file '" + path + "': " + e.what());
    }
    return topo;
}

std::vector<MachineSpec> load_machines(const std::string& path) {
    json doc = load_json(path, "machines");
    std::vector<MachineSpec> machines;
    try {
        for (const auto& m : doc.at("machines")) {
            MachineSpec spec;
            spec.id = m.at("id").get<std::string>();
            spec.cpu_cores = m.at("cpu_cores").get<double>();
            spec.mem_units = m.at("mem_units").get<double>();
            spec.util_threshold = get_or(m, "util_threshold", 0.7);
            machines.push_back(std::move(spec));
        }
    } catch (const json::exception& e) {
        throw ConfigError("machines file '" + path + "': " + e.what());
    }
    return machines;
}

// ---------------------------------------------------------------------------
// ActionSpace
// ---------------------------------------------------------------------------

ActionSpace::ActionSpace(int machines, int resource_types, int n, int m, std::uint64_t cap) {
    if (machines < 1 || resource_types < 1) throw DomainError("K and I must be >= 1");
    if (n < 0 || m < 0) throw DomainError("n and m must be >= 0");
    n_ = n;
    m_ = m;
    slots_ = machines * resource_types;
    base_ = static_cast<std::uint64_t>(2 * n + 1) * static_cast<std::uint64_t>(2 * m + 1);
    size_ = 1;
    for (int i = 0; i < slots_; ++i) {
        if (size_ > cap / base_)
            throw ConfigError("action space larger than cap " + std::to_string(cap) +
                              ": ((2n+1)(2m+1))^(K*I) with base " + std::to_string(base_) +
                              " and " + std::to_string(slots_) + " slots");
        size_ *= base_;
    }
    if (size_ > cap)
        throw ConfigError("action space larger than cap " + std::to_string(cap));
}

std::vector<ActionSpace::SubAction> ActionSpace::decode(std::uint64_t index) const {
    if (index >= size_) throw DomainError("action index out of range");
    std::vector<SubAction> subs(static_cast<std::size_t>(slots_));
    const std::uint64_t v_card = static_cast<std::uint64_t>(2 * m_ + 1);
    for (int slot = 0; slot < slots_; ++slot) {  // slot 0 fastest
        std::uint64_t digit = index % base_;
        index /= base_;
        subs[static_cast<std::size_t>(slot)] = {
            static_cast<int>(digit / v_card) - n_,  // h
            static_cast<int>(digit % v_card) - m_,  // v varies fastest
        };
    }
    return subs;
}

std::size_t ScalingAction::active_count() const {
    std::size_t count = 0;
    for (const auto& delta : deltas) count += delta.is_noop() ? 0 : 1;
    return count;
}

// ---------------------------------------------------------------------------
// Cluster construction
// ---------------------------------------------------------------------------

namespace {

double committed_cpu(const ClusterState& state, int machine_index, std::size_t skip) {
    double total = 0.0;
    for (std::size_t i = 0; i < state.deployments.size(); ++i) {
        if (i == skip) continue;
        const auto& d = state.deployments[i];
        if (d.machine_index == machine_index) total += d.replicas * d.cpu_per_replica;
    }
    return total;
}

double committed_mem(const ClusterState& state, int machine_index, std::size_t skip) {
    double total = 0.0;
    for (std::size_t i = 0; i < state.deployments.size(); ++i) {
        if (i == skip) continue;
        const auto& d = state.deployments[i];
        if (d.machine_index == machine_index) total += d.replicas * d.mem_per_replica;
    }
    return total;
}

double effective_factor(const Deployment& d) {
    double cpu_factor = d.cpu_per_replica / d.spec.cpu_per_replica;
    double mem_factor = d.mem_per_replica / d.spec.mem_per_replica;
    return std::min(cpu_factor, mem_factor);
}

std::int64_t capacity_per_interval(const Deployment& d) {
    double cap = d.replicas * d.spec.per_replica_rate * effective_factor(d);
    return static_cast<std::int64_t>(std::floor(cap + 1e-9));
}

void refresh_utilization(ClusterState& state) {
    for (std::size_t k = 0; k < state.machines.size(); ++k) {
        double cpu = 0.0, mem = 0.0;
        for (const auto& d : state.deployments) {
            if (d.machine_index != static_cast<int>(k)) continue;
            double active = state.idle_fraction + (1.0 - state.idle_fraction) * d.busy;
            cpu += d.replicas * d.cpu_per_replica * active;
            mem += d.replicas * d.mem_per_replica;
        }
        auto& m = state.machines[k];
        m.cpu_util = std::clamp(cpu / m.spec.cpu_cores, 0.0, 1.0);
        m.mem_util = std::clamp(mem / m.spec.mem_units, 0.0, 1.0);
    }
}

}  // namespace

const Deployment* ClusterState::find(const std::string& service) const {
    for (const auto& d : deployments)
        if (d.spec.id == service) return &d;
    return nullptr;
}

Deployment* ClusterState::find(const std::string& service) {
    for (auto& d : deployments)
        if (d.spec.id == service) return &d;
    return nullptr;
}

ClusterState init_cluster(const TopologyConfig& topology,
                          const std::vector<MachineSpec>& machines, std::uint64_t seed) {
    if (topology.services.empty()) throw ConfigError("topology has no services");
    if (machines.empty()) throw ConfigError("no machines configured");
    if (topology.interval_seconds <= 0.0) throw ConfigError("interval_seconds must be positive");

    ClusterState state;
    state.interval_seconds = topology.interval_seconds;
    state.scaling = topology.scaling;
    state.idle_fraction = topology.idle_fraction;
    state.rng.seed(seed);

    std::map<std::string, int> machine_index;
    for (const auto& spec : machines) {
        if (machine_index.count(spec.id)) throw ConfigError("duplicate machine id " + spec.id);
        if (spec.cpu_cores <= 0 || spec.mem_units <= 0)
            throw ConfigError("machine " + spec.id + " must have positive capacity");
        if (!(spec.util_threshold > 0.0 && spec.util_threshold <= 1.0))
            throw ConfigError("machine " + spec.id + " util_threshold must lie in (0,1]");
        machine_index[spec.id] = static_cast<int>(state.machines.size());
        state.machines.push_back(MachineState{spec, 0.0, 0.0});
    }

    std::map<std::string, std::size_t> service_index;
    for (const auto& spec : topology.services) {
        if (service_index.count(spec.id)) throw ConfigError("duplicate service id " + spec.id);
        auto mit = machine_index.find(spec.machine);
        if (mit == machine_index.end())
            throw ConfigError("service " + spec.id + " placed on unknown machine " + spec.machine);
        if (spec.replicas < 1) throw ConfigError("service " + spec.id + " needs replicas >= 1");
        if (spec.per_replica_rate <= 0)
            throw ConfigError("service " + spec.id + " needs per_replica_rate > 0");
        if (spec.base_service_time_ms < 0)
            throw ConfigError("service " + spec.id + " needs base_service_time_ms >= 0");
        if (spec.cpu_per_replica <= 0 || spec.mem_per_replica <= 0)
            throw ConfigError("service " + spec.id + " needs positive allocations");
        if (spec.queue_capacity < 0)
            throw ConfigError("service " + spec.id + " needs queue_capacity >= 0");
        if (spec.max_replicas < spec.replicas)
            throw ConfigError("service " + spec.id + " max_replicas below initial replicas");

        Deployment d;
        d.spec = spec;
        d.machine_index = mit->second;
        d.replicas = spec.replicas;
        d.cpu_per_replica = spec.cpu_per_replica;
        d.mem_per_replica = spec.mem_per_replica;
        d.latency_ms = spec.base_service_time_ms;
        service_index[spec.id] = state.deployments.size();
        state.deployments.push_back(std::move(d));
    }

    state.out_edges.assign(state.deployments.size(), {});
    std::set<std::pair<std::size_t, std::size_t>> seen_edges;
    for (const auto& edge : topology.edges) {
        auto fit = service_index.find(edge.from);
        auto tit = service_index.find(edge.to);
        if (fit == service_index.end() || tit == service_index.end())
            throw ConfigError("edge " + edge.from + " -> " + edge.to +
                              " references an unknown service");
        if (!(edge.branch_probability >= 0.0 && edge.branch_probability <= 1.0))
            throw ConfigError("edge " + edge.from + " -> " + edge.to +
                              " branch_probability outside [0,1]");
        if (!seen_edges.insert({fit->second, tit->second}).second)
            throw ConfigError("duplicate edge " + edge.from + " -> " + edge.to);
        state.out_edges[fit->second].push_back(state.edges.size());
        state.edges.push_back({fit->second, tit->second, edge.branch_probability});
    }

    // Topological order (Kahn, ascending index for determinism); also the
    // acyclicity check.
    std::vector<int> indegree(state.deployments.size(), 0);
    for (const auto& edge : state.edges) indegree[edge.to] += 1;
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < state.deployments.size(); ++i)
        if (indegree[i] == 0) ready.insert(i);
    while (!ready.empty()) {
        std::size_t node = *ready.begin();
        ready.erase(ready.begin());
        state.topo_order.push_back(node);
        for (auto edge_index : state.out_edges[node])
            if (--indegree[state.edges[edge_index].to] == 0)
                ready.insert(state.edges[edge_index].to);
    }
    if (state.topo_order.size() != state.deployments.size())
        throw ConfigError("topology graph contains a cycle");

    std::set<std::size_t> has_incoming;
    for (const auto& edge : state.edges) has_incoming.insert(edge.to);
    double entry_total = 0.0;
    for (std::size_t i = 0; i < state.deployments.size(); ++i) {
        if (has_incoming.count(i)) continue;
        state.root_indices.push_back(i);
        entry_total += state.deployments[i].spec.entry_weight;
    }
    if (entry_total <= 0.0)
        throw ConfigError("root services need a positive total entry_weight");

    // Placement must fit machine capacity.
    for (std::size_t k = 0; k < state.machines.size(); ++k) {
        double cpu = committed_cpu(state, static_cast<int>(k), state.deployments.size());
        double mem = committed_mem(state, static_cast<int>(k), state.deployments.size());
        const auto& spec = state.machines[k].spec;
        if (cpu > spec.cpu_cores + 1e-9)
            throw ConfigError("machine " + spec.id + " CPU overcommitted: " +
                              std::to_string(cpu) + " > " + std::to_string(spec.cpu_cores));
        if (mem > spec.mem_units + 1e-9)
            throw ConfigError("machine " + spec.id + " memory overcommitted: " +
                              std::to_string(mem) + " > " + std::to_string(spec.mem_units));
    }

    refresh_utilization(state);
    return state;
}

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

void apply_action(ClusterState& state, const ScalingAction& action) {
    const auto& bounds = state.scaling;
    for (const auto& delta : action.deltas) {
        Deployment* d = state.find(delta.service);
        if (d == nullptr) continue;
        std::size_t self = static_cast<std::size_t>(d - state.deployments.data());
        const auto& machine = state.machines[static_cast<std::size_t>(d->machine_index)].spec;
        double other_cpu = committed_cpu(state, d->machine_index, self);
        double other_mem = committed_mem(state, d->machine_index, self);

        // Horizontal first: clamp into [1, max_replicas], then walk back until
        // the commitment fits the machine at the current per-replica sizes.
        int h = std::clamp(delta.h, -bounds.n, bounds.n);
        int target = std::clamp(d->replicas + h, 1, d->spec.max_replicas);
        while (target > d->replicas &&
               (target * d->cpu_per_replica > machine.cpu_cores - other_cpu + 1e-9 ||
                target * d->mem_per_replica > machine.mem_units - other_mem + 1e-9)) {
            --target;
        }
        d->replicas = target;

        // Vertical: clamp into [min_alloc, machine headroom].
        int v_cpu = std::clamp(delta.v_cpu, -bounds.m, bounds.m);
        double cpu_upper = (machine.cpu_cores - other_cpu) / d->replicas;
        d->cpu_per_replica = std::clamp(d->cpu_per_replica + v_cpu * bounds.cpu_step,
                                        bounds.min_cpu, std::max(cpu_upper, bounds.min_cpu));

        int v_mem = std::clamp(delta.v_mem, -bounds.m, bounds.m);
        double mem_upper = (machine.mem_units - other_mem) / d->replicas;
        d->mem_per_replica = std::clamp(d->mem_per_replica + v_mem * bounds.mem_step,
                                        bounds.min_mem, std::max(mem_upper, bounds.min_mem));
    }
}

// ---------------------------------------------------------------------------
// Stepping
// ---------------------------------------------------------------------------

double hop_latency_ms(const ClusterState& state, std::size_t deployment_index) {
    const auto& d = state.deployments[deployment_index];
    return d.latency_ms;
}

double end_to_end_latency_ms(const ClusterState& state) {
    // Longest root-to-sink path over per-hop latencies (node-weighted).
    std::vector<double> best(state.deployments.size(),
                             -std::numeric_limits<double>::infinity());
    for (auto root : state.root_indices) best[root] = state.deployments[root].latency_ms;
    for (auto node : state.topo_order) {
        if (best[node] == -std::numeric_limits<double>::infinity()) continue;
        for (auto edge_index : state.out_edges[node]) {
            const auto& edge = state.edges[edge_index];
            double cand = best[node] + state.deployments[edge.to].latency_ms;
            if (cand > best[edge.to]) best[edge.to] = cand;
        }
    }
    double result = 0.0;
    for (std::size_t i = 0; i < state.deployments.size(); ++i) {
        if (!state.out_edges[i].empty()) continue;  // not a sink
        if (best[i] > result) result = best[i];
    }
    return result;
}

IntervalMetrics step(ClusterState& state, std::int64_t arrivals,
                     const std::optional<ScalingAction>& action) {
    if (arrivals < 0) throw DomainError("arrivals must be >= 0");
    if (action) apply_action(state, *action);

    const std::size_t n_services = state.deployments.size();
    const double interval_ms = state.interval_seconds * 1000.0;

    std::vector<std::int64_t> capacity(n_services), queue_start(n_services),
        arrived(n_services, 0), processed(n_services), failed(n_services);

    for (std::size_t i = 0; i < n_services; ++i) {
        capacity[i] = capacity_per_interval(state.deployments[i]);
        queue_start[i] = state.deployments[i].queue;
        arrived[i] = state.deployments[i].inflight;  // handed down last interval
        state.deployments[i].inflight = 0;
    }

    // Split external arrivals across roots by entry weight (largest
    // remainder, ties to the lower index).
    if (!state.root_indices.empty() && arrivals > 0) {
        double total_weight = 0.0;
        for (auto root : state.root_indices)
            total_weight += state.deployments[root].spec.entry_weight;
        std::vector<std::pair<double, std::size_t>> remainders;
        std::int64_t assigned = 0;
        for (auto root : state.root_indices) {
            double exact = arrivals * state.deployments[root].spec.entry_weight / total_weight;
            auto share = static_cast<std::int64_t>(std::floor(exact));
            arrived[root] += share;
            assigned += share;
            remainders.emplace_back(exact - std::floor(exact), root);
        }
        std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        for (std::int64_t r = arrivals - assigned; r > 0; --r)
            arrived[remainders[static_cast<std::size_t>(arrivals - assigned - r)].second] += 1;
    }

    // Process up to capacity; keep what fits in the queue, fail the rest.
    for (std::size_t i = 0; i < n_services; ++i) {
        auto& d = state.deployments[i];
        std::int64_t consumable = queue_start[i] + arrived[i];
        processed[i] = std::min(consumable, capacity[i]);
        std::int64_t leftover = consumable - processed[i];
        failed[i] = std::max<std::int64_t>(0, leftover - d.spec.queue_capacity);
        d.queue = leftover - failed[i];
    }

    // Hand processed work to children; it becomes consumable next interval.
    for (std::size_t i = 0; i < n_services; ++i) {
        for (auto edge_index : state.out_edges[i]) {
            const auto& edge = state.edges[edge_index];
            std::int64_t pass = processed[i];
            if (edge.branch_probability < 1.0) {
                std::binomial_distribution<std::int64_t> branch(processed[i],
                                                                edge.branch_probability);
                pass = branch(state.rng);
            }
            state.deployments[edge.to].inflight += pass;
        }
    }

    // Per-service observations for this interval.
    for (std::size_t i = 0; i < n_services; ++i) {
        auto& d = state.deployments[i];
        double slowdown = std::min(1.0, effective_factor(d));
        d.queue_delay_ms =
            capacity[i] > 0
                ? static_cast<double>(queue_start[i]) / static_cast<double>(capacity[i]) *
                      interval_ms
                : static_cast<double>(queue_start[i]) * interval_ms;
        d.latency_ms = d.spec.base_service_time_ms / slowdown + d.queue_delay_ms;
        if (capacity[i] > 0)
            d.busy = static_cast<double>(processed[i]) / static_cast<double>(capacity[i]);
        else
            d.busy = queue_start[i] + arrived[i] > 0 ? 1.0 : 0.0;
    }
    refresh_utilization(state);

    IntervalMetrics metrics;
    for (std::size_t i = 0; i < n_services; ++i) {
        const auto& d = state.deployments[i];
        metrics.arrived += arrived[i];
        metrics.processed += processed[i];
        metrics.failed += failed[i];
        metrics.queue_delta += d.queue - queue_start[i];
        metrics.per_service[d.spec.id] = ServiceStats{
            arrived[i], processed[i], failed[i], d.queue,
            d.latency_ms, d.queue_delay_ms, d.busy};
    }
    metrics.rps = static_cast<double>(metrics.processed) / state.interval_seconds;
    metrics.avg_response_time_ms = metrics.processed > 0 ? end_to_end_latency_ms(state) : 0.0;
    return metrics;
}

std::vector<Span> make_spans(const ClusterState& state, const std::string& trace_id) {
    std::vector<Span> spans;
    spans.reserve(state.root_indices.size() + state.edges.size());
    for (auto root : state.root_indices)
        spans.push_back(
            {trace_id, std::nullopt, state.deployments[root].spec.id,
             state.deployments[root].latency_ms});
    for (const auto& edge : state.edges)
        spans.push_back({trace_id, state.deployments[edge.from].spec.id,
                         state.deployments[edge.to].spec.id,
                         state.deployments[edge.to].latency_ms});
    return spans;
}

}  // namespace chainsim
