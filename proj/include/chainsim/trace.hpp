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
#include <string>
#include <vector>

namespace chainsim {

// One resampled trace interval.
struct TraceRecord {
    double timestamp_s = 0.0;   // seconds since trace start, multiple of the interval
    double request_rate = 0.0;  // requests per second, >= 0
    double cpu_util = 0.0;      // fraction in [0, 1]
    double mem_util = 0.0;      // fraction in [0, 1]
};

// Timestamped per-interval request rates and utilization samples, replayed
// into the simulator. Timestamps are strictly increasing multiples of
// interval_seconds; utilizations lie in [0, 1].
struct WorkloadTrace {
    double interval_seconds = 60.0;
    std::vector<TraceRecord> records;

    bool empty() const { return records.empty(); }
    std::size_t size() const { return records.size(); }
};

// Discrete workload level, the RL state input. level in [0, num_levels).
struct LoadLevel {
    int level = 0;
    int num_levels = 10;

    friend bool operator==(const LoadLevel&, const LoadLevel&) = default;
};

inline constexpr int kDefaultNumLevels = 10;

// CSV schema: header `timestamp_s,request_rate,cpu_util,mem_util`, one sample
// per row. Rows are resampled (mean-aggregated) onto the interval grid:
// bucket = floor(timestamp / interval), output timestamp = bucket * interval.
// Throws ParseError naming the line for malformed rows or out-of-range
// values, EmptyTraceError when no data rows are present.
WorkloadTrace load_trace(const std::string& path, double interval_seconds);

// Same parser over an already-read buffer (used by tests and `replay`).
WorkloadTrace parse_trace(const std::string& csv_text, double interval_seconds,
                          const std::string& origin = "<string>");

// Writes a trace back out in the ingestion schema.
void save_trace(const WorkloadTrace& trace, const std::string& path);

// level = floor(util * num_levels); util == 1.0 clamps to num_levels - 1.
// Throws DomainError for util outside [0, 1].
LoadLevel discretize(double util, int num_levels = kDefaultNumLevels);

// Element-wise discretize over the cpu_util column.
std::vector<LoadLevel> level_series(const WorkloadTrace& trace,
                                    int num_levels = kDefaultNumLevels);

enum class SynthPattern { kConstant, kSinusoid, kStep, kReplay };

SynthPattern synth_pattern_from_name(const std::string& name);
std::string to_string(SynthPattern pattern);

// Parameters for synth_workload. Unused fields are ignored by patterns that
// do not need them.
struct SynthParams {
    double base_rate = 100.0;   // constant / sinusoid / step low rate (req/s)
    double amplitude = 0.0;     // sinusoid
    double period = 4.0;        // sinusoid / step, in intervals
    double high_rate = 0.0;     // step high rate (req/s)
    double noise_stddev = 0.0;  // absolute gaussian noise on the rate, 0 = off
    double util_ref = 0.0;      // rate mapped to utilization 1.0; 0 = pattern peak
    std::string replay_path;    // replay source trace
    double interval_seconds = 60.0;
};

// Deterministic synthetic workload: request_rate follows the pattern plus
// optional seeded noise; cpu_util = mem_util = clamp(rate / util_ref, 0, 1).
// Pure function of (pattern, params, horizon, seed).
WorkloadTrace synth_workload(SynthPattern pattern, const SynthParams& params,
                             std::int64_t horizon, std::uint64_t seed);

}  // namespace chainsim
