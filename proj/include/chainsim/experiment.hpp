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
#include <string>
#include <vector>

#include "chainsim/control.hpp"
#include "chainsim/sim.hpp"
#include "chainsim/trace.hpp"

namespace chainsim {

inline constexpr const char* kVersion = "0.1.0";

// Everything a reproducible experiment needs. Policies: rl (SARSA or
// Q-learning per control.agent.algorithm), threshold, hybrid, none.
struct ExperimentConfig {
    // Trace source: either a CSV file or a synthetic spec.
    std::string trace_file;
    std::string synth_pattern;  // constant|sinusoid|step|replay ("" = use trace_file)
    SynthParams synth;

    std::string topology_file;
    std::string machines_file;

    std::string policy = "none";
    ControlConfig control;
    double cpu_threshold = 0.7;   // threshold baseline
    HybridConfig hybrid;          // hybrid baseline

    std::string mode = "evaluate";  // rl only: train | evaluate
    int train_episodes = 0;         // rl evaluate: train this many episodes first
    std::string qtable_in;          // rl evaluate: preload a Q-table

    std::uint64_t seed = 1;
    std::int64_t horizon = 1000;  // T, intervals
    std::string out_dir = "out";
    std::vector<std::int64_t> periods = {1000, 2000, 3000, 4000, 5000};

    void validate() const;  // throws ConfigError naming the field
};

struct SummaryRow {
    std::int64_t period = 0;
    double mean_rps = 0.0;
    std::int64_t total_failures = 0;
    double mean_rt_ms = 0.0;
};

struct ExperimentResult {
    std::vector<IntervalMetrics> metrics;
    std::vector<int> action_taken;
    std::vector<SummaryRow> summary;
    std::string metrics_csv;   // paths written
    std::string summary_csv;
    std::string manifest_json;
};

// Prefix summaries over the configured periods (clipped to the horizon; the
// full horizon is always included). mean_rt averages intervals that
// processed at least one request.
std::vector<SummaryRow> summarize(const std::vector<IntervalMetrics>& metrics,
                                  const std::vector<std::int64_t>& periods);

// Runs one experiment and writes metrics.csv, summary.csv, and
// manifest.json (plus qtable.txt/pool.txt for rl runs) under out_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

// FNV-1a over the canonical JSON serialization of the config.
std::string config_hash(const ExperimentConfig& config);
std::string manifest_text(const ExperimentConfig& config);

struct ComparisonRow {
    std::string policy;
    std::int64_t period = 0;
    double mean_rps = 0.0;
    std::int64_t total_failures = 0;
    double mean_rt_ms = 0.0;
    // Percentage deltas vs the first config; 0 when the baseline value is 0.
    double rps_delta_pct = 0.0;
    double failures_delta_pct = 0.0;
    double rt_delta_pct = 0.0;
};

// Runs every config (concurrently) and tabulates per-policy per-period
// metrics with percentage deltas vs the first config. All configs must share
// trace source, topology, machines, seed, and horizon; throws ConfigError
// otherwise or when fewer than two configs are given.
std::vector<ComparisonRow> compare(const std::vector<ExperimentConfig>& configs);

void write_comparison_csv(const std::vector<ComparisonRow>& rows, const std::string& path);

}  // namespace chainsim
