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

#include "chainsim/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "chainsim/errors.hpp"

namespace chainsim {

namespace {

constexpr const char* kTraceHeader = "timestamp_s,request_rate,cpu_util,mem_util";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_number(const std::string& field, const char* what, long line_no) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(field, &pos);
    } catch (const std::exception&) {
        throw ParseError(std::string("expected a number for ") + what + ", got '" + field + "'",
                         line_no);
    }
    // stod stops at trailing junk; reject "1.0x".
    while (pos < field.size() && (field[pos] == ' ' || field[pos] == '\r' || field[pos] == '\t'))
        ++pos;
    if (pos != field.size())
        throw ParseError(std::string("trailing characters after ") + what + " in '" + field + "'",
                         line_no);
    if (!std::isfinite(value))
        throw ParseError(std::string("non-finite value for ") + what, line_no);
    return value;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

WorkloadTrace parse_trace(const std::string& csv_text, double interval_seconds,
                          const std::string& origin) {
    if (interval_seconds <= 0.0)
        throw DomainError("interval_seconds must be positive");

    std::istringstream in(csv_text);
    std::string line;
    long line_no = 0;

    if (!std::getline(in, line))
        throw EmptyTraceError(origin + ": empty trace file");
    ++line_no;
    if (strip_cr(line) != kTraceHeader)
        throw ParseError("expected header '" + std::string(kTraceHeader) + "'", line_no);

    // bucket index -> per-column sums and sample count
    struct Accum {
        double rate = 0, cpu = 0, mem = 0;
        std::int64_t n = 0;
    };
    std::map<std::int64_t, Accum> buckets;

    bool saw_row = false;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != 4)
            throw ParseError("expected 4 comma-separated fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        double ts = parse_number(fields[0], "timestamp_s", line_no);
        double rate = parse_number(fields[1], "request_rate", line_no);
        double cpu = parse_number(fields[2], "cpu_util", line_no);
        double mem = parse_number(fields[3], "mem_util", line_no);
        if (ts < 0.0) throw ParseError("timestamp_s must be >= 0", line_no);
        if (rate < 0.0) throw ParseError("request_rate must be >= 0", line_no);
        if (cpu < 0.0 || cpu > 1.0)
            throw ParseError("cpu_util out of range [0,1]: " + fields[2], line_no);
        if (mem < 0.0 || mem > 1.0)
            throw ParseError("mem_util out of range [0,1]: " + fields[3], line_no);

        auto& acc = buckets[static_cast<std::int64_t>(std::floor(ts / interval_seconds))];
        acc.rate += rate;
        acc.cpu += cpu;
        acc.mem += mem;
        acc.n += 1;
        saw_row = true;
    }
    if (!saw_row) throw EmptyTraceError(origin + ": trace has a header but no data rows");

    WorkloadTrace trace;
    trace.interval_seconds = interval_seconds;
    trace.records.reserve(buckets.size());
    for (const auto& [bucket, acc] : buckets) {
        TraceRecord rec;
        rec.timestamp_s = static_cast<double>(bucket) * interval_seconds;
        rec.request_rate = acc.rate / static_cast<double>(acc.n);
        rec.cpu_util = acc.cpu / static_cast<double>(acc.n);
        rec.mem_util = acc.mem / static_cast<double>(acc.n);
        trace.records.push_back(rec);
    }
    return trace;
}

WorkloadTrace load_trace(const std::string& path, double interval_seconds) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open trace file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_trace(buf.str(), interval_seconds, path);
}

void save_trace(const WorkloadTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write trace file '" + path + "'");
    out << kTraceHeader << "\n";
    char buf[160];
    for (const auto& rec : trace.records) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f\n", rec.timestamp_s,
                      rec.request_rate, rec.cpu_util, rec.mem_util);
        out << buf;
    }
}

LoadLevel discretize(double util, int num_levels) {
    if (num_levels < 1) throw DomainError("num_levels must be >= 1");
    if (!(util >= 0.0 && util <= 1.0))
        throw DomainError("utilization out of range [0,1]: " + std::to_string(util));
    int level = static_cast<int>(std::floor(util * num_levels));
    if (level >= num_levels) level = num_levels - 1;  // util == 1.0
    return LoadLevel{level, num_levels};
}

std::vector<LoadLevel> level_series(const WorkloadTrace& trace, int num_levels) {
    if (trace.empty()) throw DomainError("level_series on an empty trace");
    std::vector<LoadLevel> levels;
    levels.reserve(trace.records.size());
    for (const auto& rec : trace.records) levels.push_back(discretize(rec.cpu_util, num_levels));
    return levels;
}

SynthPattern synth_pattern_from_name(const std::string& name) {
    if (name == "constant") return SynthPattern::kConstant;
    if (name == "sinusoid") return SynthPattern::kSinusoid;
    if (name == "step") return SynthPattern::kStep;
    if (name == "replay") return SynthPattern::kReplay;
    throw ConfigError("unknown workload pattern '" + name +
                      "' (expected constant|sinusoid|step|replay)");
}

std::string to_string(SynthPattern pattern) {
    switch (pattern) {
        case SynthPattern::kConstant: return "constant";
        case SynthPattern::kSinusoid: return "sinusoid";
        case SynthPattern::kStep: return "step";
        case SynthPattern::kReplay: return "replay";
    }
    return "?";
}

WorkloadTrace synth_workload(SynthPattern pattern, const SynthParams& params,
                             std::int64_t horizon, std::uint64_t seed) {
    if (horizon < 1) throw DomainError("horizon must be >= 1");
    if (params.interval_seconds <= 0.0) throw DomainError("interval_seconds must be positive");

    std::vector<double> replay_rates;
    if (pattern == SynthPattern::kReplay) {
        if (params.replay_path.empty())
            throw ConfigError("replay pattern requires replay_path");
        WorkloadTrace source = load_trace(params.replay_path, params.interval_seconds);
        for (const auto& rec : source.records) replay_rates.push_back(rec.request_rate);
    }

    std::vector<double> rates(static_cast<std::size_t>(horizon), 0.0);
    for (std::int64_t t = 0; t < horizon; ++t) {
        double rate = 0.0;
        switch (pattern) {
            case SynthPattern::kConstant:
                rate = params.base_rate;
                break;
            case SynthPattern::kSinusoid: {
                if (params.period <= 0.0) throw ConfigError("sinusoid requires period > 0");
                double phase = 2.0 * std::numbers::pi * static_cast<double>(t) / params.period;
                rate = params.base_rate + params.amplitude * std::sin(phase);
                break;
            }
            case SynthPattern::kStep: {
                if (params.period <= 0.0) throw ConfigError("step requires period > 0");
                auto p = static_cast<std::int64_t>(params.period);
                rate = (t % p) * 2 < p ? params.base_rate : params.high_rate;
                break;
            }
            case SynthPattern::kReplay:
                rate = replay_rates[static_cast<std::size_t>(t) % replay_rates.size()];
                break;
        }
        rates[static_cast<std::size_t>(t)] = rate;
    }

    if (params.noise_stddev > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, params.noise_stddev);
        for (auto& rate : rates) rate += noise(rng);
    }
    for (auto& rate : rates) rate = std::max(0.0, rate);

    double util_ref = params.util_ref;
    if (util_ref <= 0.0) util_ref = *std::max_element(rates.begin(), rates.end());
    if (util_ref <= 0.0) util_ref = 1.0;  // all-zero workload

    WorkloadTrace trace;
    trace.interval_seconds = params.interval_seconds;
    trace.records.reserve(rates.size());
    for (std::int64_t t = 0; t < horizon; ++t) {
        TraceRecord rec;
        rec.timestamp_s = static_cast<double>(t) * params.interval_seconds;
        rec.request_rate = rates[static_cast<std::size_t>(t)];
        rec.cpu_util = std::clamp(rec.request_rate / util_ref, 0.0, 1.0);
        rec.mem_util = rec.cpu_util;
        trace.records.push_back(rec);
    }
    return trace;
}

}  // namespace chainsim
