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

#include "chainsim/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "chainsim/errors.hpp"

namespace chainsim {

PredictorKind predictor_kind_from_name(const std::string& name) {
    if (name == "last_value") return PredictorKind::kLastValue;
    if (name == "moving_average") return PredictorKind::kMovingAverage;
    if (name == "markov") return PredictorKind::kMarkov;
    throw ConfigError("unknown predictor kind '" + name +
                      "' (expected last_value|moving_average|markov)");
}

std::string to_string(PredictorKind kind) {
    switch (kind) {
        case PredictorKind::kLastValue: return "last_value";
        case PredictorKind::kMovingAverage: return "moving_average";
        case PredictorKind::kMarkov: return "markov";
    }
    return "?";
}

PredictorModel fit(const std::vector<LoadLevel>& history, PredictorKind kind, int window,
                   int num_levels) {
    if (window < 1) throw DomainError("window must be >= 1");
    if (num_levels < 1) throw DomainError("num_levels must be >= 1");
    std::size_t min_len = kind == PredictorKind::kMarkov ? 2 : 1;
    if (history.size() < min_len)
        throw TrainingError("history too short for " + to_string(kind) + ": need at least " +
                            std::to_string(min_len) + " levels, got " +
                            std::to_string(history.size()));

    PredictorModel model;
    model.kind = kind;
    model.window = window;
    model.num_levels = num_levels;
    if (kind == PredictorKind::kMarkov) {
        model.transition_counts.assign(static_cast<std::size_t>(num_levels),
                                       std::vector<std::int64_t>(num_levels, 0));
        for (std::size_t i = 0; i + 1 < history.size(); ++i) {
            int from = history[i].level;
            int to = history[i + 1].level;
            if (from < 0 || from >= num_levels || to < 0 || to >= num_levels)
                throw TrainingError("history level outside [0, num_levels)");
            model.transition_counts[from][to] += 1;
        }
    }
    return model;
}

LoadLevel predict_next(const PredictorModel& model, const std::vector<LoadLevel>& recent) {
    if (recent.empty()) throw DomainError("predict_next on an empty history");
    const LoadLevel last = recent.back();

    switch (model.kind) {
        case PredictorKind::kLastValue:
            return LoadLevel{last.level, model.num_levels};

        case PredictorKind::kMovingAverage: {
            std::size_t n = std::min<std::size_t>(recent.size(), model.window);
            double sum = 0.0;
            for (std::size_t i = recent.size() - n; i < recent.size(); ++i)
                sum += recent[i].level;
            int level = static_cast<int>(std::lround(sum / static_cast<double>(n)));
            level = std::clamp(level, 0, model.num_levels - 1);
            return LoadLevel{level, model.num_levels};
        }

        case PredictorKind::kMarkov: {
            if (last.level < 0 || last.level >= model.num_levels)
                throw DomainError("level outside the trained range");
            const auto& row = model.transition_counts[last.level];
            std::int64_t best_count = 0;
            int best = last.level;  // persistence fallback for an unobserved row
            for (int j = 0; j < model.num_levels; ++j) {
                if (row[j] > best_count) {
                    best_count = row[j];
                    best = j;
                }
            }
            return LoadLevel{best, model.num_levels};
        }
    }
    throw DomainError("unreachable predictor kind");
}

}  // namespace chainsim
