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

#include "chainsim/control.hpp"

#include <algorithm>
#include <cmath>

#include "chainsim/errors.hpp"

namespace chainsim {

// ---------------------------------------------------------------------------
// Chain analyzer runtime
// ---------------------------------------------------------------------------

ChainAnalyzer::ChainAnalyzer(AnalyzerConfig config) : config_(config) {
    if (config_.span_window < 1) throw ConfigError("span_window must be >= 1");
    if (!(config_.error_threshold > 0.0 && config_.error_threshold < 1.0))
        throw ConfigError("error_threshold must lie in (0,1)");
}

NodeFeatures observe_features(const ClusterState& state, std::size_t deployment_index) {
    const auto& d = state.deployments[deployment_index];
    const auto& machine = state.machines[static_cast<std::size_t>(d.machine_index)];
    return NodeFeatures{d.latency_ms, std::clamp(d.busy, 0.0, 1.0), machine.mem_util};
}

void ChainAnalyzer::observe(const ClusterState& state, std::int64_t interval) {
    span_window_.push_back(make_spans(state, std::to_string(interval)));
    while (span_window_.size() > config_.span_window) span_window_.pop_front();

    for (std::size_t i = 0; i < state.deployments.size(); ++i) {
        const auto& d = state.deployments[i];
        bool critical = d.queue_delay_ms >
                        config_.critical_delay_multiple * d.spec.base_service_time_ms;
        records_.push_back({observe_features(state, i),
                            critical ? NodeClass::kCritical : NodeClass::kNonCritical});
        while (records_.size() > config_.feature_window) records_.pop_front();
    }
    maybe_train();
}

void ChainAnalyzer::maybe_train() {
    std::size_t critical = 0;
    for (const auto& rec : records_) critical += rec.label == NodeClass::kCritical ? 1 : 0;
    bool both_classes = critical > 0 && critical < records_.size();

    if (!tree_) {
        if (both_classes && records_.size() >= config_.min_train_samples) {
            tree_ = train_tree({records_.begin(), records_.end()}, config_.tree_max_depth);
            ++retrain_count_;
        }
        return;
    }

    std::size_t n = std::min(records_.size(), config_.retrain_window);
    if (n == 0) return;
    std::vector<LabeledFeatures> recent(records_.end() - static_cast<std::ptrdiff_t>(n),
                                        records_.end());
    if (check_retrain(*tree_, recent, config_.error_threshold) == RetrainDecision::kRetrain &&
        both_classes) {
        tree_ = train_tree({records_.begin(), records_.end()}, config_.tree_max_depth);
        ++retrain_count_;
    }
}

std::optional<CallGraph> ChainAnalyzer::current_graph() const {
    if (span_window_.empty()) return std::nullopt;
    std::vector<Span> spans;
    for (const auto& batch : span_window_) spans.insert(spans.end(), batch.begin(), batch.end());
    if (spans.empty()) return std::nullopt;
    return build_call_graph(spans);
}

std::optional<Chain> ChainAnalyzer::current_chain() const {
    auto graph = current_graph();
    if (!graph) return std::nullopt;
    return critical_chain(*graph);
}

std::size_t ChainAnalyzer::critical_node(const Chain& chain, const ClusterState& state) const {
    if (chain.nodes.empty()) throw DomainError("critical_node on an empty chain");

    auto latency_of = [&](const std::string& id) {
        const Deployment* d = state.find(id);
        return d == nullptr ? 0.0 : d->latency_ms;
    };

    if (tree_) {
        std::size_t best = chain.nodes.size();
        double best_latency = -1.0;
        for (std::size_t i = 0; i < chain.nodes.size(); ++i) {
            const Deployment* d = state.find(chain.nodes[i]);
            if (d == nullptr) continue;
            std::size_t index = static_cast<std::size_t>(d - state.deployments.data());
            if (classify_node(*tree_, observe_features(state, index)) != NodeClass::kCritical)
                continue;
            if (d->latency_ms > best_latency) {
                best_latency = d->latency_ms;
                best = i;
            }
        }
        if (best < chain.nodes.size()) return best;
    }

    // Bottleneck fallback: highest per-hop latency on the chain.
    std::size_t best = 0;
    double best_latency = latency_of(chain.nodes[0]);
    for (std::size_t i = 1; i < chain.nodes.size(); ++i) {
        double latency = latency_of(chain.nodes[i]);
        if (latency > best_latency) {
            best_latency = latency;
            best = i;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

ScalingAction baseline_threshold(const ClusterState& state, double cpu_threshold) {
    if (!(cpu_threshold > 0.0 && cpu_threshold < 1.0))
        throw DomainError("cpu_threshold must lie in (0,1)");
    ScalingAction action;
    for (const auto& d : state.deployments) {
        ServiceDelta delta{d.spec.id, 0, 0, 0};
        if (d.busy > cpu_threshold)
            delta.h = +1;
        else if (d.busy < cpu_threshold / 2.0 && d.replicas > 1)
            delta.h = -1;
        if (!delta.is_noop()) action.deltas.push_back(delta);
    }
    return action;
}

void DemandHistory::observe(const ClusterState& state) {
    for (const auto& d : state.deployments) {
        auto& series = history_[d.spec.id];
        series.push_back(d.busy * d.cpu_per_replica);
        while (series.size() > window_) series.pop_front();
    }
}

double DemandHistory::peak(const std::string& service) const {
    auto it = history_.find(service);
    if (it == history_.end() || it->second.empty()) return 0.0;
    return *std::max_element(it->second.begin(), it->second.end());
}

ScalingAction baseline_hybrid(const ClusterState& state, const DemandHistory& history,
                              const HybridConfig& config) {
    if (history.empty()) throw DomainError("baseline_hybrid needs a non-empty history");
    const auto& bounds = state.scaling;
    ScalingAction action;
    for (const auto& d : state.deployments) {
        double target = history.peak(d.spec.id) * (1.0 + config.margin);
        // Rounding to whole steps gives a half-step dead-band on both sides.
        auto steps = static_cast<int>(std::lround((target - d.cpu_per_replica) / bounds.cpu_step));

        ServiceDelta delta{d.spec.id, 0, 0, 0};
        delta.v_cpu = std::clamp(steps, -bounds.m, bounds.m);
        delta.v_mem = delta.v_cpu;
        if (steps > bounds.m) delta.h = +1;  // vertical alone cannot cover
        if (steps < -bounds.m && d.replicas > 1) delta.h = -1;

        const auto& machine = state.machines[static_cast<std::size_t>(d.machine_index)].spec;
        double committed_other = 0.0;
        for (const auto& other : state.deployments)
            if (&other != &d && other.machine_index == d.machine_index)
                committed_other += other.replicas * other.cpu_per_replica;
        double per_replica_headroom = (machine.cpu_cores - committed_other) / d.replicas;
        if (target > per_replica_headroom + 1e-9) delta.h = +1;

        if (!delta.is_noop()) action.deltas.push_back(delta);
    }
    return action;
}

// ---------------------------------------------------------------------------
// Control loop
// ---------------------------------------------------------------------------

int control_action_count(const ScalingBounds& bounds) {
    return (2 * bounds.n + 1) * (2 * bounds.m + 1);
}

namespace {

// Decode a per-critical-node action index into (h, v); v varies fastest,
// matching ActionSpace order for a single slot.
std::pair<int, int> decode_control_action(int index, const ScalingBounds& bounds) {
    int v_card = 2 * bounds.m + 1;
    return {index / v_card - bounds.n, index % v_card - bounds.m};
}

std::vector<double> machine_utils(const ClusterState& state) {
    std::vector<double> utils;
    utils.reserve(state.machines.size());
    for (const auto& m : state.machines) utils.push_back(m.util());
    return utils;
}

std::vector<double> machine_thresholds(const ClusterState& state) {
    std::vector<double> thresholds;
    thresholds.reserve(state.machines.size());
    for (const auto& m : state.machines) thresholds.push_back(m.spec.util_threshold);
    return thresholds;
}

}  // namespace

EpisodeResult run_control_loop(const ClusterState& initial, const WorkloadTrace& trace,
                               const ControlConfig& config, QTable qtable,
                               ExperiencePool pool, std::int64_t T, RunMode mode,
                               std::uint64_t seed) {
    if (T < 1) throw DomainError("T must be >= 1");
    if (trace.empty()) throw DomainError("run_control_loop on an empty trace");
    config.agent.validate();

    ClusterState state = initial;
    ChainAnalyzer analyzer(config.analyzer);
    std::mt19937_64 agent_rng(seed);
    const int num_actions = control_action_count(state.scaling);
    const std::vector<LoadLevel> trace_levels = level_series(trace, config.num_levels);

    EpisodeResult result;
    result.metrics.reserve(static_cast<std::size_t>(T));
    result.action_taken.reserve(static_cast<std::size_t>(T));

    std::vector<LoadLevel> levels;  // realized level per elapsed interval
    levels.reserve(static_cast<std::size_t>(T));

    for (std::int64_t t = 0; t < T; ++t) {
        const auto& record = trace.records[static_cast<std::size_t>(t) % trace.size()];
        auto arrivals = static_cast<std::int64_t>(
            std::llround(record.request_rate * trace.interval_seconds));
        LoadLevel level_now = trace_levels[static_cast<std::size_t>(t) % trace.size()];

        // Lines 3-6: observe the previous level, predict the next, trigger on
        // a predicted change.
        bool trigger = false;
        LoadLevel predicted = level_now;
        if (t >= 1 && analyzer.has_observation()) {
            LoadLevel previous = levels.back();
            predicted = previous;
            if (levels.size() >= 2 || config.predictor != PredictorKind::kMarkov) {
                PredictorModel model =
                    fit(levels, config.predictor, config.predictor_window, config.num_levels);
                predicted = predict_next(model, levels);
            }
            trigger = predicted.level != previous.level;
        }

        IntervalMetrics metrics;
        int action_index = -1;
        if (trigger) {
            Chain chain = *analyzer.current_chain();
            std::size_t position = analyzer.critical_node(chain, state);
            RLState s{predicted.level, static_cast<int>(position),
                      latency_bucket(chain.total_latency_ms, config.agent.rt_max_ms)};

            // Line 7: epsilon-greedy over the per-critical-node action set.
            action_index =
                select_action(qtable, s, num_actions, config.agent.epsilon, agent_rng);
            auto [h, v] = decode_control_action(action_index, state.scaling);

            // Line 8: hybrid scaling of the critical node's deployment.
            ScalingAction action;
            action.deltas.push_back(ServiceDelta{chain.nodes[position], h, v, v});
            metrics = step(state, arrivals, action);
            result.actions_fired += 1;

            // Lines 9-14: online SARSA update and pool append (train mode).
            if (mode == RunMode::kTrain &&
                (result.actions_fired - 1) % config.agent.online_train_every == 0) {
                auto next_spans = make_spans(state, std::to_string(t));
                Chain next_chain = critical_chain(build_call_graph(next_spans));
                std::size_t next_position = analyzer.critical_node(next_chain, state);
                RLState s_next{level_now.level, static_cast<int>(next_position),
                               latency_bucket(next_chain.total_latency_ms,
                                              config.agent.rt_max_ms)};
                int a_next =
                    select_action(qtable, s_next, num_actions, config.agent.epsilon, agent_rng);

                double r_q = reward_rt(metrics.avg_response_time_ms, config.agent.rt_max_ms);
                double r_u = reward_util(machine_utils(state), machine_thresholds(state));
                double reward = reward_total(r_q, r_u);

                Transition transition{s, action_index, reward, s_next, a_next};
                if (config.agent.algorithm == RLAlgorithm::kSarsa)
                    sarsa_update(qtable, transition, config.agent.alpha, config.agent.gamma);
                else
                    q_learning_update(qtable, s, action_index, reward, s_next, num_actions,
                                      config.agent.alpha, config.agent.gamma);
                pool.push(transition);
            }
        } else {
            metrics = step(state, arrivals, std::nullopt);
        }

        analyzer.observe(state, t);
        levels.push_back(level_now);
        result.metrics.push_back(std::move(metrics));
        result.action_taken.push_back(action_index);
    }

    result.qtable = std::move(qtable);
    result.pool = std::move(pool);
    return result;
}

TrainResult train_agent(const ClusterState& initial, const WorkloadTrace& trace,
                        ControlConfig config, int episodes, std::int64_t T,
                        std::uint64_t seed, QTable qtable) {
    if (episodes < 1) throw DomainError("episodes must be >= 1");
    TrainResult out;
    out.qtable = std::move(qtable);
    out.pool = ExperiencePool(config.agent.pool_capacity);
    for (int episode = 0; episode < episodes; ++episode) {
        EpisodeResult result = run_control_loop(initial, trace, config, std::move(out.qtable),
                                                std::move(out.pool), T, RunMode::kTrain,
                                                seed + static_cast<std::uint64_t>(episode));
        out.qtable = std::move(result.qtable);
        out.pool = std::move(result.pool);
        if (episode == episodes - 1) {
            out.last_metrics = std::move(result.metrics);
            out.last_actions = std::move(result.action_taken);
        }
        config.agent.epsilon *= config.agent.epsilon_decay;
    }
    return out;
}

}  // namespace chainsim
