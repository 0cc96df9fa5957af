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

#include <algorithm>
#include <cmath>
#include <limits>

#include "chainsim/errors.hpp"

namespace chainsim {

namespace {

double gini(std::int64_t critical, std::int64_t total) {
    if (total == 0) return 0.0;
    double p = static_cast<double>(critical) / static_cast<double>(total);
    return 2.0 * p * (1.0 - p);
}

NodeClass majority(const std::vector<LabeledFeatures>& data,
                   const std::vector<std::size_t>& idx) {
    std::int64_t critical = 0;
    for (auto i : idx) critical += data[i].label == NodeClass::kCritical ? 1 : 0;
    // Ties resolve to non-critical, the conservative label.
    return 2 * critical > static_cast<std::int64_t>(idx.size()) ? NodeClass::kCritical
                                                                : NodeClass::kNonCritical;
}

struct SplitCandidate {
    bool found = false;
    int feature = 0;
    double threshold = 0.0;
    double impurity_after = std::numeric_limits<double>::infinity();
};

// Exhaustive search over feature-value midpoints for the split minimizing
// the size-weighted child Gini impurity. Ties break toward the lower feature
// index, then the lower threshold.
SplitCandidate best_split(const std::vector<LabeledFeatures>& data,
                          const std::vector<std::size_t>& idx) {
    SplitCandidate best;
    const auto n = static_cast<std::int64_t>(idx.size());

    for (int feature = 0; feature < NodeFeatures::kCount; ++feature) {
        std::vector<std::pair<double, NodeClass>> values;
        values.reserve(idx.size());
        for (auto i : idx) values.emplace_back(data[i].features[feature], data[i].label);
        std::sort(values.begin(), values.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::int64_t total_critical = 0;
        for (const auto& [v, label] : values)
            total_critical += label == NodeClass::kCritical ? 1 : 0;

        std::int64_t left_n = 0, left_critical = 0;
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            left_n += 1;
            left_critical += values[i].second == NodeClass::kCritical ? 1 : 0;
            if (values[i].first == values[i + 1].first) continue;  // no midpoint here

            double threshold = values[i].first + 0.5 * (values[i + 1].first - values[i].first);
            std::int64_t right_n = n - left_n;
            std::int64_t right_critical = total_critical - left_critical;
            double impurity =
                (static_cast<double>(left_n) * gini(left_critical, left_n) +
                 static_cast<double>(right_n) * gini(right_critical, right_n)) /
                static_cast<double>(n);
            if (!best.found || impurity < best.impurity_after ||
                (impurity == best.impurity_after &&
                 (feature < best.feature ||
                  (feature == best.feature && threshold < best.threshold)))) {
                best = {true, feature, threshold, impurity};
            }
        }
    }
    return best;
}

int grow(const std::vector<LabeledFeatures>& data, const std::vector<std::size_t>& idx,
         int depth, int max_depth, DecisionTree& tree) {
    std::int64_t critical = 0;
    for (auto i : idx) critical += data[i].label == NodeClass::kCritical ? 1 : 0;
    bool pure = critical == 0 || critical == static_cast<std::int64_t>(idx.size());

    int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    SplitCandidate split;
    if (!pure && depth < max_depth) split = best_split(data, idx);

    if (pure || depth >= max_depth || !split.found) {
        tree.nodes[node_index].is_leaf = true;
        tree.nodes[node_index].label = majority(data, idx);
        return node_index;
    }

    std::vector<std::size_t> left_idx, right_idx;
    for (auto i : idx) {
        if (data[i].features[split.feature] < split.threshold)
            left_idx.push_back(i);
        else
            right_idx.push_back(i);
    }

    tree.nodes[node_index].is_leaf = false;
    tree.nodes[node_index].feature = split.feature;
    tree.nodes[node_index].threshold = split.threshold;
    tree.nodes[node_index].left = grow(data, left_idx, depth + 1, max_depth, tree);
    tree.nodes[node_index].right = grow(data, right_idx, depth + 1, max_depth, tree);
    return node_index;
}

}  // namespace

DecisionTree train_tree(const std::vector<LabeledFeatures>& data, int max_depth) {
    if (max_depth < 1) throw TrainingError("max_depth must be >= 1");
    if (data.empty()) throw TrainingError("train_tree on empty data");

    DecisionTree tree;
    tree.max_depth = max_depth;

    std::int64_t critical = 0;
    for (const auto& row : data) critical += row.label == NodeClass::kCritical ? 1 : 0;
    tree.degenerate = critical == 0 || critical == static_cast<std::int64_t>(data.size());

    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) idx[i] = i;
    grow(data, idx, 0, max_depth, tree);
    return tree;
}

NodeClass classify_node(const DecisionTree& tree, const NodeFeatures& features) {
    if (tree.empty()) throw DomainError("classify_node on an empty tree");
    int index = 0;
    while (!tree.nodes[index].is_leaf) {
        const auto& node = tree.nodes[index];
        index = features[node.feature] < node.threshold ? node.left : node.right;
    }
    return tree.nodes[index].label;
}

double misclassification_rate(const DecisionTree& tree,
                              const std::vector<LabeledFeatures>& data) {
    if (data.empty()) throw DomainError("misclassification_rate on empty data");
    std::int64_t wrong = 0;
    for (const auto& row : data)
        wrong += classify_node(tree, row.features) != row.label ? 1 : 0;
    return static_cast<double>(wrong) / static_cast<double>(data.size());
}

RetrainDecision check_retrain(const DecisionTree& tree,
                              const std::vector<LabeledFeatures>& recent,
                              double error_threshold) {
    if (recent.empty()) throw DomainError("check_retrain on empty data");
    if (!(error_threshold > 0.0 && error_threshold < 1.0))
        throw DomainError("error_threshold must lie in (0, 1)");
    return misclassification_rate(tree, recent) > error_threshold ? RetrainDecision::kRetrain
                                                                  : RetrainDecision::kKeep;
}

}  // namespace chainsim
