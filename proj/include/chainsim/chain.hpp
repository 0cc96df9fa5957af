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

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chainsim {

// One observed hop: `service` spent processing_time_ms handling work for
// `parent_service` (absent for a root span).
struct Span {
    std::string trace_id;
    std::optional<std::string> parent_service;  // nullopt = root
    std::string service;
    double processing_time_ms = 0.0;
};

struct GraphEdge {
    std::string from;
    std::string to;
    double weight_ms = 0.0;  // mean processing time observed on this edge
};

// DAG of services with latency-weighted edges, built from spans. Acyclicity
// is checked on construction.
struct CallGraph {
    std::vector<std::string> nodes;  // sorted, unique
    std::vector<GraphEdge> edges;    // sorted by (from, to), unique pairs

    std::vector<std::string> roots() const;  // nodes with no incoming edge
    std::vector<std::string> sinks() const;  // nodes with no outgoing edge
    bool empty() const { return nodes.empty(); }
};

// A root-to-sink path and its summed edge weight.
struct Chain {
    std::vector<std::string> nodes;
    double total_latency_ms = 0.0;
};

// One node per distinct service, one edge per distinct (parent, child) pair
// weighted by the mean processing time of its spans. Throws DomainError on an
// empty span set and CycleError (naming one cycle) if the edges are cyclic.
CallGraph build_call_graph(const std::vector<Span>& spans);

// The root-to-sink path maximizing summed edge weight, by topological-order
// dynamic programming. Equal-weight ties break toward the lexicographically
// smaller node-id sequence. Throws DomainError on an empty graph.
Chain critical_chain(const CallGraph& graph);

// Span CSV: header `trace_id,parent_service,service,processing_time_ms`,
// empty parent_service marks a root span.
std::vector<Span> load_spans(const std::string& path);
std::vector<Span> parse_spans(const std::string& csv_text,
                              const std::string& origin = "<string>");
void save_spans(const std::vector<Span>& spans, const std::string& path);

}  // namespace chainsim
