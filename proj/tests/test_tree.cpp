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

#include "chainsim/tree.hpp"

#include <random>

#include "chainsim/errors.hpp"
#include "doctest.h"

using namespace chainsim;

namespace {

LabeledFeatures sample(double latency, double cpu, double mem, NodeClass label) {
    return {NodeFeatures{latency, cpu, mem}, label};
}

// Exhaustive single-split oracle: best (feature, threshold) by trying every
// midpoint and counting misclassifications directly.
struct OracleSplit {
    int feature = -1;
    double threshold = 0.0;
    int errors = 1 << 30;
};

OracleSplit oracle_best_single_split(const std::vector<LabeledFeatures>& data) {
    OracleSplit best;
    for (int feature = 0; feature < NodeFeatures::kCount; ++feature) {
        std::vector<double> values;
        for (const auto& row : data) values.push_back(row.features[feature]);
        std::sort(values.begin(), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            if (values[i] == values[i + 1]) continue;
            double threshold = (values[i] + values[i + 1]) / 2.0;
            // Majority label on each side, then count errors.
            for (int left_label = 0; left_label < 2; ++left_label) {
                for (int right_label = 0; right_label < 2; ++right_label) {
                    int errors = 0;
                    for (const auto& row : data) {
                        bool left = row.features[feature] < threshold;
                        auto predicted = static_cast<NodeClass>(left ? left_label : right_label);
                        errors += predicted != row.label ? 1 : 0;
                    }
                    if (errors < best.errors) best = {feature, threshold, errors};
                }
            }
        }
    }
    return best;
}

}  // namespace

TEST_CASE("train_tree splits separable latency data at depth 1") {
    std::vector<LabeledFeatures> data;
    for (double latency : {20.0, 40.0, 60.0, 80.0})
        data.push_back(sample(latency, 0.5, 0.5, NodeClass::kNonCritical));
    for (double latency : {120.0, 140.0, 160.0, 180.0})
        data.push_back(sample(latency, 0.5, 0.5, NodeClass::kCritical));

    OracleSplit oracle = oracle_best_single_split(data);
    REQUIRE(oracle.errors == 0);
    CHECK(oracle.feature == 0);
    CHECK(oracle.threshold == doctest::Approx(100.0));

    DecisionTree tree = train_tree(data, 1);
    CHECK_FALSE(tree.degenerate);
    REQUIRE_FALSE(tree.nodes.empty());
    CHECK_FALSE(tree.nodes[0].is_leaf);
    CHECK(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold == doctest::Approx(100.0));
    CHECK(misclassification_rate(tree, data) == 0.0);
}

TEST_CASE("train_tree on single-class data gives a flagged single leaf") {
    std::vector<LabeledFeatures> data;
    for (double latency : {10.0, 20.0, 30.0})
        data.push_back(sample(latency, 0.1, 0.1, NodeClass::kCritical));
    DecisionTree tree = train_tree(data, 3);
    CHECK(tree.degenerate);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].is_leaf);
    CHECK(tree.nodes[0].label == NodeClass::kCritical);
    CHECK(classify_node(tree, NodeFeatures{999.0, 0.9, 0.9}) == NodeClass::kCritical);
}

TEST_CASE("train_tree solves XOR at depth 2") {
    // XOR on (latency, cpu): same quadrant parity -> critical.
    std::vector<LabeledFeatures> data;
    for (double a : {0.0, 1.0})
        for (double b : {0.0, 1.0})
            for (int copy = 0; copy < 2; ++copy)
                data.push_back(sample(a, b, 0.5,
                                      a != b ? NodeClass::kCritical : NodeClass::kNonCritical));

    DecisionTree tree = train_tree(data, 2);
    CHECK(misclassification_rate(tree, data) == 0.0);
}

TEST_CASE("train_tree rejects bad inputs") {
    CHECK_THROWS_AS(train_tree({}, 3), TrainingError);
    CHECK_THROWS_AS(train_tree({sample(1, 0, 0, NodeClass::kCritical)}, 0), TrainingError);
}

TEST_CASE("classify_node follows thresholds deterministically") {
    std::vector<LabeledFeatures> data;
    for (double latency : {50.0, 60.0}) data.push_back(sample(latency, 0.2, 0.2, NodeClass::kNonCritical));
    for (double latency : {150.0, 160.0}) data.push_back(sample(latency, 0.2, 0.2, NodeClass::kCritical));
    DecisionTree tree = train_tree(data, 1);

    CHECK(classify_node(tree, NodeFeatures{150.0, 0.0, 0.0}) == NodeClass::kCritical);
    CHECK(classify_node(tree, NodeFeatures{50.0, 0.0, 0.0}) == NodeClass::kNonCritical);
    // Training inputs reproduce their labels on the separable set.
    for (const auto& row : data) CHECK(classify_node(tree, row.features) == row.label);
    // Pure function: repeated calls agree.
    for (int i = 0; i < 5; ++i)
        CHECK(classify_node(tree, NodeFeatures{120.0, 0.3, 0.3}) ==
              classify_node(tree, NodeFeatures{120.0, 0.3, 0.3}));
}

TEST_CASE("train_tree achieves 100% on separable single-feature data of any size") {
    std::mt19937_64 rng(5);
    for (int n : {2, 5, 20, 100, 500}) {
        std::vector<LabeledFeatures> data;
        for (int i = 0; i < n; ++i) {
            double latency = static_cast<double>(rng() % 1000) / 10.0;
            bool critical = latency >= 50.0;
            data.push_back(sample(latency + (critical ? 50.0 : 0.0), 0.5, 0.5,
                                  critical ? NodeClass::kCritical : NodeClass::kNonCritical));
        }
        bool has_both = false;
        for (const auto& row : data)
            if (row.label != data[0].label) has_both = true;
        if (!has_both) continue;
        DecisionTree tree = train_tree(data, 1);
        CHECK(misclassification_rate(tree, data) == 0.0);
    }
}

TEST_CASE("check_retrain uses a strict threshold") {
    std::vector<LabeledFeatures> train_data;
    for (double latency : {10.0, 20.0}) train_data.push_back(sample(latency, 0, 0, NodeClass::kNonCritical));
    for (double latency : {90.0, 95.0}) train_data.push_back(sample(latency, 0, 0, NodeClass::kCritical));
    DecisionTree tree = train_tree(train_data, 1);

    auto recent_with_errors = [&](int wrong, int total) {
        std::vector<LabeledFeatures> recent;
        for (int i = 0; i < total; ++i) {
            bool flip = i < wrong;
            recent.push_back(sample(10.0, 0, 0,
                                    flip ? NodeClass::kCritical : NodeClass::kNonCritical));
        }
        return recent;
    };

    CHECK(check_retrain(tree, recent_with_errors(6, 100), 0.05) == RetrainDecision::kRetrain);
    CHECK(check_retrain(tree, recent_with_errors(0, 100), 0.05) == RetrainDecision::kKeep);
    // 5/100 == threshold exactly: keep under the strict > rule.
    CHECK(check_retrain(tree, recent_with_errors(5, 100), 0.05) == RetrainDecision::kKeep);

    CHECK_THROWS_AS(check_retrain(tree, {}, 0.05), DomainError);
    CHECK_THROWS_AS(check_retrain(tree, recent_with_errors(0, 10), 0.0), DomainError);
    CHECK_THROWS_AS(check_retrain(tree, recent_with_errors(0, 10), 1.0), DomainError);
}

TEST_CASE("held-out accuracy on noisy 3-feature data stays >= 95%") {
    // Seeded synthetic set: critical iff latency > 100 && cpu > 0.6, with 5%
    // label noise on the training half.
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    auto make_set = [&](int n, bool with_noise) {
        std::vector<LabeledFeatures> data;
        for (int i = 0; i < n; ++i) {
            double latency = uniform(rng) * 200.0;
            double cpu = uniform(rng);
            double mem = uniform(rng);
            bool critical = latency > 100.0 && cpu > 0.6;
            if (with_noise && uniform(rng) < 0.05) critical = !critical;
            data.push_back(sample(latency, cpu, mem,
                                  critical ? NodeClass::kCritical : NodeClass::kNonCritical));
        }
        return data;
    };

    auto train_data = make_set(400, true);
    auto held_out = make_set(400, false);
    DecisionTree tree = train_tree(train_data, 3);
    CHECK(misclassification_rate(tree, held_out) <= 0.05);
}
