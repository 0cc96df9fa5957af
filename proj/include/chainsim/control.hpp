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
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "chainsim/chain.hpp"
#include "chainsim/predictor.hpp"
#include "chainsim/rl.hpp"
#include "chainsim/sim.hpp"
#include "chainsim/trace.hpp"
#include "chainsim/tree.hpp"

namespace chainsim {

// ---------------------------------------------------------------------------
// Chain analyzer runtime
// ---------------------------------------------------------------------------

struct AnalyzerConfig {
    int tree_max_depth = kDefaultTreeDepth;
    double error_threshold = 0.05;        // retrain when error rate exceeds this
    double critical_delay_multiple = 2.0; // label critical when queueing delay
                                          // exceeds this multiple of base time
    std::size_t span_window = 1;          // intervals of spans per graph
    std::size_t feature_window = 1000;    // labeled records kept for training
    std::size_t retrain_window = 200;     // records scored by check_retrain
    std::size_t min_train_samples = 20;
};

// Holds the sliding span window, per-service labeled runtime records, and
// the critical-node decision tree with its retrain trigger.
class ChainAnalyzer {
public:
    explicit ChainAnalyzer(AnalyzerConfig config = {});

    // Feed one completed interval. Trains or retrains the tree when due.
    void observe(const ClusterState& state, std::int64_t interval);

    bool has_observation() const { return !span_window_.empty(); }
    const std::optional<DecisionTree>& tree() const { return tree_; }
    std::int64_t retrain_count() const { return retrain_count_; }

    // Call graph over the span window; empty optional before any observation.
    std::optional<CallGraph> current_graph() const;

    // Critical chain of the current graph.
    std::optional<Chain> current_chain() const;

    // The node scaling should target: the highest-latency chain node the
    // tree classifies critical, falling back to the chain's highest-latency
    // node when the tree is absent or classifies none as critical.
    // Returns the node's index within the chain.
    std::size_t critical_node(const Chain& chain, const ClusterState& state) const;

private:
    void maybe_train();

    AnalyzerConfig config_;
    std::deque<std::vector<Span>> span_window_;
    std::deque<LabeledFeatures> records_;
    std::optional<DecisionTree> tree_;
    std::int64_t retrain_count_ = 0;
};

// Per-service features as the analyzer sees them this interval.
NodeFeatures observe_features(const ClusterState& state, std::size_t deployment_index);

// ---------------------------------------------------------------------------
// Baseline policies
// ---------------------------------------------------------------------------

// Horizontal-only threshold rule: h = +1 when a deployment's CPU busy
// fraction exceeds cpu_threshold, h = -1 below half the threshold with
// replicas to spare, no vertical component.
ScalingAction baseline_threshold(const ClusterState& state, double cpu_threshold);

struct HybridConfig {
    double margin = 0.15;      // safety margin over the windowed peak
    std::size_t window = 48;   // intervals of demand history
};

// Rolling per-replica CPU demand observed per service.
class DemandHistory {
public:
    explicit DemandHistory(std::size_t window = 48) : window_(window) {}
    void observe(const ClusterState& state);
    bool empty() const { return history_.empty(); }
    // Peak per-replica demand over the window; 0 when unobserved.
    double peak(const std::string& service) const;

private:
    std::size_t window_;
    std::map<std::string, std::deque<double>> history_;
};

// Hybrid heuristic: vertical allocation tracks the windowed peak demand plus
// the safety margin (rounded to whole steps, which provides the hysteresis
// dead-band); a replica is added when the maximum vertical step cannot cover
// the target or the target exceeds machine headroom, and removed when even
// the maximum downward step overshoots and replicas remain.
ScalingAction baseline_hybrid(const ClusterState& state, const DemandHistory& history,
                              const HybridConfig& config = {});

// ---------------------------------------------------------------------------
// Control loop
// ---------------------------------------------------------------------------

enum class RunMode { kTrain, kEvaluate };

struct ControlConfig {
    AgentConfig agent;
    PredictorKind predictor = PredictorKind::kMarkov;
    int predictor_window = 5;
    int num_levels = kDefaultNumLevels;
    AnalyzerConfig analyzer;
};

struct EpisodeResult {
    std::vector<IntervalMetrics> metrics;
    std::vector<int> action_taken;  // chosen action index, -1 = trigger idle
    QTable qtable;
    ExperiencePool pool;
    std::int64_t actions_fired = 0;
};

// One episode of the overall procedure: per interval, observe utilization
// and the previous workload level, predict the next level, and when the
// prediction deviates recompute the critical chain and node, pick an
// epsilon-greedy hybrid action for the critical node's deployment, and step
// the simulator. In train mode the post-step reward feeds the configured
// update rule and the transition lands in the experience pool; in evaluate
// mode qtable and pool are returned untouched.
// The trace is replayed cyclically when T exceeds its length.
EpisodeResult run_control_loop(const ClusterState& initial, const WorkloadTrace& trace,
                               const ControlConfig& config, QTable qtable,
                               ExperiencePool pool, std::int64_t T, RunMode mode,
                               std::uint64_t seed);

// Runs `episodes` training episodes from the same initial state with epsilon
// decaying per episode; Q-table and pool persist across episodes. `qtable`
// seeds the first episode (continue training a saved table).
struct TrainResult {
    QTable qtable;
    ExperiencePool pool;
    std::vector<IntervalMetrics> last_metrics;  // final episode
    std::vector<int> last_actions;
};
TrainResult train_agent(const ClusterState& initial, const WorkloadTrace& trace,
                        ControlConfig config, int episodes, std::int64_t T,
                        std::uint64_t seed, QTable qtable = {});

// Number of actions in the per-critical-node hybrid action set.
int control_action_count(const ScalingBounds& bounds);

}  // namespace chainsim
