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

#include <array>
#include <cstdint>
#include <vector>

namespace chainsim {

// Per-service observation the critical-node classifier runs on.
struct NodeFeatures {
    double latency_ms = 0.0;
    double cpu_util = 0.0;  // [0, 1]
    double mem_util = 0.0;  // [0, 1]

    static constexpr int kCount = 3;
    double operator[](int i) const {
        return i == 0 ? latency_ms : i == 1 ? cpu_util : mem_util;
    }
};

enum class NodeClass : std::uint8_t { kNonCritical = 0, kCritical = 1 };

struct LabeledFeatures {
    NodeFeatures features;
    NodeClass label = NodeClass::kNonCritical;
};

// Binary CART-style classifier stored as a flat node array. Internal nodes
// test feature < threshold (left on true); leaves carry a class label.
struct DecisionTree {
    struct Node {
        bool is_leaf = true;
        NodeClass label = NodeClass::kNonCritical;
        int feature = 0;
        double threshold = 0.0;
        int left = -1;   // index into `nodes`
        int right = -1;
    };
    std::vector<Node> nodes;  // nodes[0] is the root
    int max_depth = 3;
    bool degenerate = false;  // trained from single-class data

    bool empty() const { return nodes.empty(); }
};

inline constexpr int kDefaultTreeDepth = 3;

// Greedy top-down induction maximizing Gini impurity reduction, threshold
// candidates at feature-value midpoints, leaves predicting the majority
// class. Splits proceed while a node is impure, depth remains, and any valid
// split exists, even when the best immediate reduction is zero. Single-class
// data produces a one-leaf tree with `degenerate` set. Throws TrainingError
// on empty data or max_depth < 1.
DecisionTree train_tree(const std::vector<LabeledFeatures>& data,
                        int max_depth = kDefaultTreeDepth);

// Deterministic threshold descent (feature < threshold -> left).
NodeClass classify_node(const DecisionTree& tree, const NodeFeatures& features);

enum class RetrainDecision { kKeep, kRetrain };

// Retrain iff the misclassification rate on `recent` strictly exceeds
// error_threshold. Throws DomainError on empty input or a threshold outside
// (0, 1).
RetrainDecision check_retrain(const DecisionTree& tree,
                              const std::vector<LabeledFeatures>& recent,
                              double error_threshold);

// Fraction of `data` the tree misclassifies.
double misclassification_rate(const DecisionTree& tree,
                              const std::vector<LabeledFeatures>& data);

}  // namespace chainsim
