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

#include "chainsim/trace.hpp"

namespace chainsim {

enum class PredictorKind { kLastValue, kMovingAverage, kMarkov };

PredictorKind predictor_kind_from_name(const std::string& name);
std::string to_string(PredictorKind kind);

// Immutable one-step-ahead level forecaster. The markov variant stores
// first-order transition counts; the others store only configuration, so a
// learned model can substitute behind the same surface.
struct PredictorModel {
    PredictorKind kind = PredictorKind::kMarkov;
    int window = 1;
    int num_levels = kDefaultNumLevels;
    // counts[i][j] = observed transitions level i -> level j (markov only).
    std::vector<std::vector<std::int64_t>> transition_counts;
};

// Fits a model on a level history. markov requires history length >= 2 and
// counts consecutive (i -> j) pairs; other kinds require length >= 1.
// Throws TrainingError on insufficient history.
PredictorModel fit(const std::vector<LoadLevel>& history, PredictorKind kind, int window,
                   int num_levels = kDefaultNumLevels);

// Forecast for the next interval.
//   last_value      -> last element
//   moving_average  -> round of the mean of the last `window` elements
//   markov          -> argmax of counts[last][.]; persistence when the row is
//                      all-zero; ties break toward the lower level index
// Throws DomainError when `recent` is empty.
LoadLevel predict_next(const PredictorModel& model, const std::vector<LoadLevel>& recent);

}  // namespace chainsim
