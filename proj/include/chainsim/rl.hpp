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

#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace chainsim {

// Discrete agent state: workload level, position of the critical node within
// the critical chain, and the bucketized critical-chain latency.
struct RLState {
    int load_level = 0;
    int chain_position = 0;
    int latency_bucket = 0;

    auto operator<=>(const RLState&) const = default;
};

inline constexpr int kLatencyBuckets = 8;

// bucket index = min(floor(latency / (RT_max / 4)), kLatencyBuckets - 1).
int latency_bucket(double latency_ms, double rt_max_ms);

// Tabular action-value function. Unseen (state, action) pairs read as 0.
class QTable {
public:
    double get(const RLState& state, int action) const;
    void set(const RLState& state, int action, double value);

    // argmax_a over `num_actions` actions, unseen cells valued 0; ties break
    // toward the lower action index.
    int argmax(const RLState& state, int num_actions) const;
    double max_value(const RLState& state, int num_actions) const;

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    using Entry = std::pair<std::pair<RLState, int>, double>;
    const std::map<std::pair<RLState, int>, double>& entries() const { return values_; }

    friend bool operator==(const QTable&, const QTable&) = default;

private:
    std::map<std::pair<RLState, int>, double> values_;
};

// One SARSA transition (s, a, R, s', a').
struct Transition {
    RLState state;
    int action = 0;
    double reward = 0.0;
    RLState next_state;
    int next_action = 0;

    friend bool operator==(const Transition&, const Transition&) = default;
};

// Bounded FIFO of transitions replayed during offline training.
class ExperiencePool {
public:
    explicit ExperiencePool(std::size_t capacity = 10'000);

    void push(const Transition& transition);
    std::size_t size() const { return transitions_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return transitions_.empty(); }
    const std::deque<Transition>& transitions() const { return transitions_; }

private:
    std::size_t capacity_;
    std::deque<Transition> transitions_;
};

enum class RLAlgorithm { kSarsa, kQLearning };

RLAlgorithm rl_algorithm_from_name(const std::string& name);
std::string to_string(RLAlgorithm algo);

struct AgentConfig {
    RLAlgorithm algorithm = RLAlgorithm::kSarsa;
    double alpha = 0.1;            // learning rate, (0, 1]
    double gamma = 0.9;            // discount factor, [0, 1]
    double epsilon = 0.1;          // exploration probability, [0, 1]
    double epsilon_decay = 0.995;  // per training episode
    double rt_max_ms = 250.0;      // QoS bound fed to reward_rt
    int online_train_every = 1;    // update every Nth action in train mode
    std::size_t pool_capacity = 10'000;

    void validate() const;  // throws DomainError on out-of-range fields
};

// ---------------------------------------------------------------------------
// Rewards
// ---------------------------------------------------------------------------

// R_u = mean_k |U_k_max - u_k| + 1; equals 1 exactly at zero deviation.
// Throws DomainError on an empty machine set or inputs outside [0, 1].
double reward_util(const std::vector<double>& utils, const std::vector<double>& thresholds);

// R_q = 1 for rt <= RT_max, exp(-((rt - RT_max)/RT_max)^2) beyond; in (0, 1].
double reward_rt(double rt_ms, double rt_max_ms);

// r = R_q / R_u.
double reward_total(double r_q, double r_u);

// ---------------------------------------------------------------------------
// Updates and action selection
// ---------------------------------------------------------------------------

// Q(s,a) += alpha * (R + gamma * Q(s',a') - Q(s,a)). Only (s,a) changes.
void sarsa_update(QTable& q, const Transition& transition, double alpha, double gamma);

// Q(s,a) += alpha * (R + gamma * max_a' Q(s',a') - Q(s,a)), max over the full
// enumerated action set with unseen pairs valued 0.
void q_learning_update(QTable& q, const RLState& state, int action, double reward,
                       const RLState& next_state, int num_actions, double alpha, double gamma);

// Epsilon-greedy: with probability epsilon a uniform action from `rng`,
// otherwise argmax with ties toward the lower index.
int select_action(const QTable& q, const RLState& state, int num_actions, double epsilon,
                  std::mt19937_64& rng);

// Replays the pool through sarsa_update in insertion order, `epochs` times.
// Throws TrainingError on an empty pool or epochs < 1.
void offline_train(const ExperiencePool& pool, QTable& q, double alpha, double gamma,
                   int epochs);

// ---------------------------------------------------------------------------
// Serialization (versioned, diffable plain text)
// ---------------------------------------------------------------------------

void save_qtable(const QTable& q, const std::string& path);
QTable load_qtable(const std::string& path);

void save_pool(const ExperiencePool& pool, const std::string& path);
ExperiencePool load_pool(const std::string& path);

}  // namespace chainsim
