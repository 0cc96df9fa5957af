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

#include "chainsim/rl.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chainsim/errors.hpp"

namespace chainsim {

int latency_bucket(double latency_ms, double rt_max_ms) {
    if (rt_max_ms <= 0.0) throw DomainError("rt_max_ms must be positive");
    if (latency_ms < 0.0) throw DomainError("latency must be >= 0");
    double bucket_width = rt_max_ms / 4.0;
    auto bucket = static_cast<int>(std::floor(latency_ms / bucket_width));
    return std::min(bucket, kLatencyBuckets - 1);
}

double QTable::get(const RLState& state, int action) const {
    auto it = values_.find({state, action});
    return it == values_.end() ? 0.0 : it->second;
}

void QTable::set(const RLState& state, int action, double value) {
    if (!std::isfinite(value)) throw DomainError("Q-values must be finite");
    values_[{state, action}] = value;
}

int QTable::argmax(const RLState& state, int num_actions) const {
    if (num_actions < 1) throw DomainError("num_actions must be >= 1");
    int best = 0;
    double best_value = get(state, 0);
    for (int a = 1; a < num_actions; ++a) {
        double value = get(state, a);
        if (value > best_value) {
            best_value = value;
            best = a;
        }
    }
    return best;
}

double QTable::max_value(const RLState& state, int num_actions) const {
    return get(state, argmax(state, num_actions));
}

ExperiencePool::ExperiencePool(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw DomainError("experience pool capacity must be >= 1");
}

void ExperiencePool::push(const Transition& transition) {
    if (transitions_.size() == capacity_) transitions_.pop_front();
    transitions_.push_back(transition);
}

RLAlgorithm rl_algorithm_from_name(const std::string& name) {
    if (name == "sarsa") return RLAlgorithm::kSarsa;
    if (name == "qlearning") return RLAlgorithm::kQLearning;
    throw ConfigError("unknown RL algorithm '" + name + "' (expected sarsa|qlearning)");
}

std::string to_string(RLAlgorithm algo) {
    return algo == RLAlgorithm::kSarsa ? "sarsa" : "qlearning";
}

void AgentConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0,1]");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0,1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in [0,1]");
    if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0))
        throw DomainError("epsilon_decay must lie in (0,1]");
    if (rt_max_ms <= 0.0) throw DomainError("rt_max_ms must be positive");
    if (online_train_every < 1) throw DomainError("online_train_every must be >= 1");
    if (pool_capacity == 0) throw DomainError("pool_capacity must be >= 1");
}

// ---------------------------------------------------------------------------
// Rewards
// ---------------------------------------------------------------------------

double reward_util(const std::vector<double>& utils, const std::vector<double>& thresholds) {
    if (utils.empty()) throw DomainError("reward_util on an empty machine set");
    if (utils.size() != thresholds.size())
        throw DomainError("utils and thresholds must have equal length");
    double deviation = 0.0;
    for (std::size_t k = 0; k < utils.size(); ++k) {
        if (!(utils[k] >= 0.0 && utils[k] <= 1.0))
            throw DomainError("utilization outside [0,1]");
        if (!(thresholds[k] >= 0.0 && thresholds[k] <= 1.0))
            throw DomainError("threshold outside [0,1]");
        deviation += std::abs(thresholds[k] - utils[k]);
    }
    return deviation / static_cast<double>(utils.size()) + 1.0;
}

double reward_rt(double rt_ms, double rt_max_ms) {
    if (rt_max_ms <= 0.0) throw DomainError("rt_max_ms must be positive");
    if (rt_ms < 0.0) throw DomainError("rt must be >= 0");
    if (rt_ms <= rt_max_ms) return 1.0;
    double overshoot = (rt_ms - rt_max_ms) / rt_max_ms;
    return std::exp(-(overshoot * overshoot));
}

double reward_total(double r_q, double r_u) {
    if (!(r_q > 0.0 && r_q <= 1.0)) throw DomainError("R_q must lie in (0,1]");
    if (!(r_u >= 1.0)) throw DomainError("R_u must be >= 1");
    return r_q / r_u;
}

// ---------------------------------------------------------------------------
// Updates and action selection
// ---------------------------------------------------------------------------

namespace {

void check_update_params(double alpha, double gamma, double reward) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0,1]");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0,1]");
    if (!std::isfinite(reward)) throw DomainError("reward must be finite");
}

}  // namespace

void sarsa_update(QTable& q, const Transition& transition, double alpha, double gamma) {
    check_update_params(alpha, gamma, transition.reward);
    double current = q.get(transition.state, transition.action);
    double next = q.get(transition.next_state, transition.next_action);
    q.set(transition.state, transition.action,
          current + alpha * (transition.reward + gamma * next - current));
}

void q_learning_update(QTable& q, const RLState& state, int action, double reward,
                       const RLState& next_state, int num_actions, double alpha, double gamma) {
    check_update_params(alpha, gamma, reward);
    double current = q.get(state, action);
    double next = q.max_value(next_state, num_actions);
    q.set(state, action, current + alpha * (reward + gamma * next - current));
}

int select_action(const QTable& q, const RLState& state, int num_actions, double epsilon,
                  std::mt19937_64& rng) {
    if (num_actions < 1) throw DomainError("select_action on an empty action set");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in [0,1]");
    if (epsilon > 0.0) {
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        if (coin(rng) < epsilon) {
            std::uniform_int_distribution<int> pick(0, num_actions - 1);
            return pick(rng);
        }
    }
    return q.argmax(state, num_actions);
}

void offline_train(const ExperiencePool& pool, QTable& q, double alpha, double gamma,
                   int epochs) {
    if (pool.empty()) throw TrainingError("offline_train on an empty experience pool");
    if (epochs < 1) throw TrainingError("epochs must be >= 1");
    for (int epoch = 0; epoch < epochs; ++epoch)
        for (const auto& transition : pool.transitions())
            sarsa_update(q, transition, alpha, gamma);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kQTableHeader = "chainsim-qtable v1";
constexpr const char* kPoolHeader = "chainsim-pool v1";

std::string format_value(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

}  // namespace

void save_qtable(const QTable& q, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write qtable file '" + path + "'");
    out << kQTableHeader << "\n";
    out << "# load_level chain_position latency_bucket action value\n";
    for (const auto& [key, value] : q.entries()) {
        const auto& [state, action] = key;
        out << state.load_level << ' ' << state.chain_position << ' ' << state.latency_bucket
            << ' ' << action << ' ' << format_value(value) << "\n";
    }
}

QTable load_qtable(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open qtable file '" + path + "'");
    std::string line;
    long line_no = 0;
    if (!std::getline(in, line) || line != kQTableHeader)
        throw ParseError("expected header '" + std::string(kQTableHeader) + "'", 1);
    ++line_no;
    QTable q;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        RLState state;
        int action = 0;
        double value = 0.0;
        if (!(row >> state.load_level >> state.chain_position >> state.latency_bucket >>
              action >> value))
            throw ParseError("expected 5 fields: level position bucket action value", line_no);
        q.set(state, action, value);
    }
    return q;
}

void save_pool(const ExperiencePool& pool, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write pool file '" + path + "'");
    out << kPoolHeader << "\n";
    out << "# capacity\n" << pool.capacity() << "\n";
    out << "# s.level s.pos s.bucket action reward s'.level s'.pos s'.bucket action'\n";
    for (const auto& t : pool.transitions()) {
        out << t.state.load_level << ' ' << t.state.chain_position << ' '
            << t.state.latency_bucket << ' ' << t.action << ' ' << format_value(t.reward) << ' '
            << t.next_state.load_level << ' ' << t.next_state.chain_position << ' '
            << t.next_state.latency_bucket << ' ' << t.next_action << "\n";
    }
}

ExperiencePool load_pool(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open pool file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kPoolHeader)
        throw ParseError("expected header '" + std::string(kPoolHeader) + "'", 1);
    long line_no = 1;

    std::size_t capacity = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        if (!(row >> capacity)) throw ParseError("expected pool capacity", line_no);
        break;
    }
    if (capacity == 0) throw ParseError("missing or zero pool capacity");

    ExperiencePool pool(capacity);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        Transition t;
        if (!(row >> t.state.load_level >> t.state.chain_position >> t.state.latency_bucket >>
              t.action >> t.reward >> t.next_state.load_level >> t.next_state.chain_position >>
              t.next_state.latency_bucket >> t.next_action))
            throw ParseError("expected 9 transition fields", line_no);
        pool.push(t);
    }
    return pool;
}

}  // namespace chainsim
