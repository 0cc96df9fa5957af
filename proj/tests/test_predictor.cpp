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

#include "chainsim/errors.hpp"
#include "doctest.h"

using namespace chainsim;

namespace {

std::vector<LoadLevel> levels(std::initializer_list<int> values, int num_levels = 10) {
    std::vector<LoadLevel> out;
    for (int v : values) out.push_back({v, num_levels});
    return out;
}

}  // namespace

TEST_CASE("markov fit counts consecutive pairs") {
    PredictorModel model = fit(levels({3, 3, 3, 3}), PredictorKind::kMarkov, 1);
    CHECK(model.transition_counts[3][3] == 3);
    std::int64_t total = 0;
    for (const auto& row : model.transition_counts)
        for (auto count : row) total += count;
    CHECK(total == 3);

    PredictorModel alternating = fit(levels({0, 1, 0, 1, 0}), PredictorKind::kMarkov, 1);
    CHECK(alternating.transition_counts[0][1] == 2);
    CHECK(alternating.transition_counts[1][0] == 2);
}

TEST_CASE("fit validates history length") {
    CHECK_THROWS_AS(fit(levels({4}), PredictorKind::kMarkov, 1), TrainingError);
    CHECK_THROWS_AS(fit({}, PredictorKind::kLastValue, 1), TrainingError);
    CHECK_NOTHROW(fit(levels({4}), PredictorKind::kLastValue, 1));
}

TEST_CASE("predict_next per kind") {
    PredictorModel last = fit(levels({2}), PredictorKind::kLastValue, 1);
    CHECK(predict_next(last, levels({2, 7, 4})).level == 4);

    PredictorModel avg = fit(levels({2}), PredictorKind::kMovingAverage, 3);
    CHECK(predict_next(avg, levels({2, 4, 6})).level == 4);

    PredictorModel markov = fit(levels({0, 1, 0, 1, 0}), PredictorKind::kMarkov, 1);
    CHECK(predict_next(markov, levels({0})).level == 1);
    CHECK(predict_next(markov, levels({1})).level == 0);
    // Unobserved row falls back to persistence.
    CHECK(predict_next(markov, levels({7})).level == 7);

    CHECK_THROWS_AS(predict_next(markov, {}), DomainError);
}

TEST_CASE("markov ties break toward the lower level") {
    // 2->1 and 2->3 observed once each.
    PredictorModel model = fit(levels({2, 1, 2, 3}), PredictorKind::kMarkov, 1);
    CHECK(model.transition_counts[2][1] == 1);
    CHECK(model.transition_counts[2][3] == 1);
    CHECK(predict_next(model, levels({2})).level == 1);
}

TEST_CASE("prediction always lands inside the level range") {
    PredictorModel avg = fit(levels({0}), PredictorKind::kMovingAverage, 4);
    for (int a = 0; a < 10; ++a)
        for (int b = 0; b < 10; ++b) {
            int p = predict_next(avg, levels({a, b})).level;
            CHECK(p >= 0);
            CHECK(p < 10);
        }
}

TEST_CASE("markov is >= 90% accurate on a period-4 sequence after one period") {
    std::vector<LoadLevel> train = levels({1, 3, 5, 2, 1, 3, 5, 2});  // two periods
    PredictorModel model = fit(train, PredictorKind::kMarkov, 4);

    std::vector<int> pattern{1, 3, 5, 2};
    int correct = 0, total = 0;
    std::vector<LoadLevel> history = train;
    for (int t = 0; t < 100; ++t) {
        int actual_next = pattern[static_cast<std::size_t>((t + static_cast<int>(train.size())) %
                                                           4)];
        if (predict_next(model, history).level == actual_next) ++correct;
        ++total;
        history.push_back({actual_next, 10});
    }
    CHECK(static_cast<double>(correct) / total >= 0.9);
}

TEST_CASE("last_value is exact on constant sequences") {
    PredictorModel model = fit(levels({6}), PredictorKind::kLastValue, 1);
    for (int len = 1; len < 20; ++len) {
        std::vector<LoadLevel> history(static_cast<std::size_t>(len), LoadLevel{6, 10});
        CHECK(predict_next(model, history).level == 6);
    }
}
