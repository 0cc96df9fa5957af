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

#include "chainsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>

#include <nlohmann/json.hpp>

#include "chainsim/errors.hpp"
#include "chainsim/rl.hpp"

namespace chainsim {

namespace fs = std::filesystem;
using json = nlohmann::json;

void ExperimentConfig::validate() const {
    static const std::set<std::string> kPolicies{"rl", "threshold", "hybrid", "none"};
    if (!kPolicies.count(policy))
        throw ConfigError("policy: unknown value '" + policy +
                          "' (expected rl|threshold|hybrid|none)");
    if (horizon < 1) throw ConfigError("horizon: must be >= 1");
    if (trace_file.empty() == synth_pattern.empty())
        throw ConfigError("trace: exactly one of trace_file and synth_pattern is required");
    if (!trace_file.empty() && !fs::exists(trace_file))
        throw ConfigError("trace_file: '" + trace_file + "' does not exist");
    if (topology_file.empty() || !fs::exists(topology_file))
        throw ConfigError("topology_file: '" + topology_file + "' does not exist");
    if (machines_file.empty() || !fs::exists(machines_file))
        throw ConfigError("machines_file: '" + machines_file + "' does not exist");
    if (!synth_pattern.empty()) synth_pattern_from_name(synth_pattern);
    if (policy == "rl") {
        if (mode != "train" && mode != "evaluate")
            throw ConfigError("mode: expected train|evaluate, got '" + mode + "'");
        if (!qtable_in.empty() && !fs::exists(qtable_in))
            throw ConfigError("qtable_in: '" + qtable_in + "' does not exist");
        if (train_episodes < 0) throw ConfigError("train_episodes: must be >= 0");
        control.agent.validate();
    }
    if (policy == "threshold" && !(cpu_threshold > 0.0 && cpu_threshold < 1.0))
        throw ConfigError("cpu_threshold: must lie in (0,1)");
    if (out_dir.empty()) throw ConfigError("out_dir: must be non-empty");
    if (periods.empty()) throw ConfigError("periods: must be non-empty");
    for (auto p : periods)
        if (p < 1) throw ConfigError("periods: entries must be >= 1");
}

namespace {

WorkloadTrace resolve_trace(const ExperimentConfig& config, double interval_seconds) {
    if (!config.trace_file.empty()) {
        WorkloadTrace trace = load_trace(config.trace_file, interval_seconds);
        return trace;
    }
    SynthParams params = config.synth;
    params.interval_seconds = interval_seconds;
    return synth_workload(synth_pattern_from_name(config.synth_pattern), params,
                          config.horizon, config.seed);
}

std::string fmt(double value) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

void write_metrics_csv(const std::vector<IntervalMetrics>& metrics,
                       const std::vector<int>& actions, double interval_seconds,
                       const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write metrics file '" + path + "'");
    out << "interval,arrived,processed,failed,avg_rt_ms,rps,action_taken\n";
    for (std::size_t t = 0; t < metrics.size(); ++t) {
        const auto& m = metrics[t];
        out << t << ',' << m.arrived << ',' << m.processed << ',' << m.failed << ','
            << fmt(m.avg_response_time_ms) << ',' << fmt(m.rps) << ',' << actions[t] << "\n";
    }
    (void)interval_seconds;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write summary file '" + path + "'");
    out << "period,mean_rps,total_failures,mean_rt_ms\n";
    for (const auto& row : rows)
        out << row.period << ',' << fmt(row.mean_rps) << ',' << row.total_failures << ','
            << fmt(row.mean_rt_ms) << "\n";
}

json config_json(const ExperimentConfig& config) {
    json doc;
    doc["trace_file"] = config.trace_file;
    doc["synth_pattern"] = config.synth_pattern;
    doc["synth"] = {{"base_rate", config.synth.base_rate},
                    {"amplitude", config.synth.amplitude},
                    {"period", config.synth.period},
                    {"high_rate", config.synth.high_rate},
                    {"noise_stddev", config.synth.noise_stddev},
                    {"util_ref", config.synth.util_ref},
                    {"replay_path", config.synth.replay_path}};
    doc["topology_file"] = config.topology_file;
    doc["machines_file"] = config.machines_file;
    doc["policy"] = config.policy;
    doc["agent"] = {{"algorithm", to_string(config.control.agent.algorithm)},
                    {"alpha", config.control.agent.alpha},
                    {"gamma", config.control.agent.gamma},
                    {"epsilon", config.control.agent.epsilon},
                    {"epsilon_decay", config.control.agent.epsilon_decay},
                    {"rt_max_ms", config.control.agent.rt_max_ms},
                    {"online_train_every", config.control.agent.online_train_every},
                    {"pool_capacity", config.control.agent.pool_capacity}};
    doc["predictor"] = {{"kind", to_string(config.control.predictor)},
                        {"window", config.control.predictor_window},
                        {"num_levels", config.control.num_levels}};
    doc["analyzer"] = {{"tree_max_depth", config.control.analyzer.tree_max_depth},
                       {"error_threshold", config.control.analyzer.error_threshold},
                       {"critical_delay_multiple",
                        config.control.analyzer.critical_delay_multiple},
                       {"span_window", config.control.analyzer.span_window},
                       {"feature_window", config.control.analyzer.feature_window},
                       {"retrain_window", config.control.analyzer.retrain_window},
                       {"min_train_samples", config.control.analyzer.min_train_samples}};
    doc["cpu_threshold"] = config.cpu_threshold;
    doc["hybrid"] = {{"margin", config.hybrid.margin}, {"window", config.hybrid.window}};
    doc["mode"] = config.mode;
    doc["train_episodes"] = config.train_episodes;
    doc["qtable_in"] = config.qtable_in;
    doc["seed"] = config.seed;
    doc["horizon"] = config.horizon;
    doc["periods"] = config.periods;
    return doc;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

}  // namespace

std::string config_hash(const ExperimentConfig& config) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(config_json(config).dump())));
    return buf;
}

std::string manifest_text(const ExperimentConfig& config) {
    json doc;
    doc["version"] = kVersion;
    doc["config"] = config_json(config);
    doc["config_hash"] = config_hash(config);
    return doc.dump(2) + "\n";
}

std::vector<SummaryRow> summarize(const std::vector<IntervalMetrics>& metrics,
                                  const std::vector<std::int64_t>& periods) {
    auto total = static_cast<std::int64_t>(metrics.size());
    std::vector<std::int64_t> cuts;
    for (auto p : periods)
        if (p <= total) cuts.push_back(p);
    if (cuts.empty() || cuts.back() != total) cuts.push_back(total);

    std::vector<SummaryRow> rows;
    for (auto cut : cuts) {
        SummaryRow row;
        row.period = cut;
        double rps_sum = 0.0, rt_sum = 0.0;
        std::int64_t rt_n = 0;
        for (std::int64_t t = 0; t < cut; ++t) {
            const auto& m = metrics[static_cast<std::size_t>(t)];
            rps_sum += m.rps;
            row.total_failures += m.failed;
            if (m.processed > 0) {
                rt_sum += m.avg_response_time_ms;
                rt_n += 1;
            }
        }
        row.mean_rps = rps_sum / static_cast<double>(cut);
        row.mean_rt_ms = rt_n > 0 ? rt_sum / static_cast<double>(rt_n) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();

    TopologyConfig topology = load_topology(config.topology_file);
    std::vector<MachineSpec> machines = load_machines(config.machines_file);
    WorkloadTrace trace = resolve_trace(config, topology.interval_seconds);
    ClusterState initial = init_cluster(topology, machines, config.seed);

    ExperimentResult result;
    const auto T = config.horizon;

    if (config.policy == "rl") {
        QTable qtable;
        if (!config.qtable_in.empty()) qtable = load_qtable(config.qtable_in);
        fs::create_directories(config.out_dir);

        if (config.mode == "train") {
            int episodes = std::max(1, config.train_episodes);
            TrainResult trained = train_agent(initial, trace, config.control, episodes, T,
                                              config.seed, std::move(qtable));
            result.metrics = std::move(trained.last_metrics);
            result.action_taken = std::move(trained.last_actions);
            save_qtable(trained.qtable, (fs::path(config.out_dir) / "qtable.txt").string());
            save_pool(trained.pool, (fs::path(config.out_dir) / "pool.txt").string());
        } else {
            if (config.train_episodes > 0) {
                TrainResult trained = train_agent(initial, trace, config.control,
                                                  config.train_episodes, T, config.seed,
                                                  std::move(qtable));
                qtable = std::move(trained.qtable);
            }
            ControlConfig eval_cfg = config.control;
            eval_cfg.agent.epsilon = 0.0;  // greedy evaluation
            EpisodeResult episode = run_control_loop(
                initial, trace, eval_cfg, std::move(qtable),
                ExperiencePool(config.control.agent.pool_capacity), T, RunMode::kEvaluate,
                config.seed);
            result.metrics = std::move(episode.metrics);
            result.action_taken = std::move(episode.action_taken);
            save_qtable(episode.qtable, (fs::path(config.out_dir) / "qtable.txt").string());
        }
    } else {
        ClusterState state = initial;
        DemandHistory history(config.hybrid.window);
        result.metrics.reserve(static_cast<std::size_t>(T));
        result.action_taken.reserve(static_cast<std::size_t>(T));
        for (std::int64_t t = 0; t < T; ++t) {
            const auto& record = trace.records[static_cast<std::size_t>(t) % trace.size()];
            auto arrivals = static_cast<std::int64_t>(
                std::llround(record.request_rate * trace.interval_seconds));

            std::optional<ScalingAction> action;
            if (config.policy == "threshold") {
                action = baseline_threshold(state, config.cpu_threshold);
            } else if (config.policy == "hybrid" && !history.empty()) {
                action = baseline_hybrid(state, history, config.hybrid);
            }
            int taken = -1;
            if (action) taken = static_cast<int>(action->active_count());

            result.metrics.push_back(step(state, arrivals, action));
            result.action_taken.push_back(taken);
            if (config.policy == "hybrid") history.observe(state);
        }
    }

    result.summary = summarize(result.metrics, config.periods);

    fs::create_directories(config.out_dir);
    result.metrics_csv = (fs::path(config.out_dir) / "metrics.csv").string();
    result.summary_csv = (fs::path(config.out_dir) / "summary.csv").string();
    result.manifest_json = (fs::path(config.out_dir) / "manifest.json").string();
    write_metrics_csv(result.metrics, result.action_taken, topology.interval_seconds,
                      result.metrics_csv);
    write_summary_csv(result.summary, result.summary_csv);
    std::ofstream manifest(result.manifest_json, std::ios::binary);
    if (!manifest) throw ConfigError("cannot write manifest '" + result.manifest_json + "'");
    manifest << manifest_text(config);
    return result;
}

std::vector<ComparisonRow> compare(const std::vector<ExperimentConfig>& configs) {
    if (configs.size() < 2) throw ConfigError("compare needs at least 2 configs");
    const auto& base = configs.front();
    std::vector<ExperimentConfig> runs = configs;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        auto& config = runs[i];
        // Keep member runs from clobbering each other's outputs.
        config.out_dir = (fs::path(base.out_dir) /
                          ("run" + std::to_string(i) + "_" + config.policy))
                             .string();
        config.validate();
        bool same_env = config.trace_file == base.trace_file &&
                        config.synth_pattern == base.synth_pattern &&
                        config.topology_file == base.topology_file &&
                        config.machines_file == base.machines_file &&
                        config.seed == base.seed && config.horizon == base.horizon;
        if (!same_env)
            throw ConfigError(
                "compare configs must share trace, topology, machines, seed, and horizon");
    }

    std::vector<std::future<ExperimentResult>> futures;
    futures.reserve(runs.size());
    for (const auto& config : runs)
        futures.push_back(
            std::async(std::launch::async, [&config]() { return run_experiment(config); }));

    std::vector<ComparisonRow> rows;
    std::vector<ExperimentResult> results;
    results.reserve(configs.size());
    for (auto& future : futures) results.push_back(future.get());

    auto pct = [](double value, double base_value) {
        return base_value == 0.0 ? 0.0 : (value - base_value) / base_value * 100.0;
    };

    for (std::size_t i = 0; i < configs.size(); ++i) {
        for (std::size_t p = 0; p < results[i].summary.size(); ++p) {
            const auto& row = results[i].summary[p];
            const auto& ref = results[0].summary[p];
            ComparisonRow out;
            out.policy = configs[i].policy;
            out.period = row.period;
            out.mean_rps = row.mean_rps;
            out.total_failures = row.total_failures;
            out.mean_rt_ms = row.mean_rt_ms;
            out.rps_delta_pct = pct(row.mean_rps, ref.mean_rps);
            out.failures_delta_pct = pct(static_cast<double>(row.total_failures),
                                         static_cast<double>(ref.total_failures));
            out.rt_delta_pct = pct(row.mean_rt_ms, ref.mean_rt_ms);
            rows.push_back(out);
        }
    }
    return rows;
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write comparison file '" + path + "'");
    out << "policy,period,mean_rps,total_failures,mean_rt_ms,"
           "rps_delta_pct,failures_delta_pct,rt_delta_pct\n";
    for (const auto& row : rows)
        out << row.policy << ',' << row.period << ',' << fmt(row.mean_rps) << ','
            << row.total_failures << ',' << fmt(row.mean_rt_ms) << ','
            << fmt(row.rps_delta_pct) << ',' << fmt(row.failures_delta_pct) << ','
            << fmt(row.rt_delta_pct) << "\n";
}

}  // namespace chainsim
