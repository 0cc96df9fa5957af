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

#include "chainsim/chain.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "chainsim/errors.hpp"

namespace chainsim {

namespace {

// Kahn's algorithm. Returns node ids in topological order, or throws
// CycleError naming one cycle found by walking still-pending edges.
std::vector<std::string> topological_order(const CallGraph& graph) {
    std::map<std::string, int> indegree;
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& node : graph.nodes) indegree[node] = 0;
    for (const auto& edge : graph.edges) {
        indegree[edge.to] += 1;
        out[edge.from].push_back(edge.to);
    }

    std::deque<std::string> ready;
    for (const auto& node : graph.nodes)
        if (indegree[node] == 0) ready.push_back(node);

    std::vector<std::string> order;
    while (!ready.empty()) {
        std::string node = ready.front();
        ready.pop_front();
        order.push_back(node);
        for (const auto& next : out[node])
            if (--indegree[next] == 0) ready.push_back(next);
    }

    if (order.size() != graph.nodes.size()) {
        // Every remaining node sits on or leads into a cycle; walk until a
        // node repeats to print one concrete cycle.
        std::string start;
        for (const auto& node : graph.nodes)
            if (indegree[node] > 0) {
                start = node;
                break;
            }
        std::vector<std::string> walk{start};
        std::set<std::string> seen{start};
        std::string cur = start;
        while (true) {
            const std::string* next = nullptr;
            for (const auto& cand : out[cur])
                if (indegree[cand] > 0) {
                    next = &cand;
                    break;
                }
            if (next == nullptr) break;  // defensive; cannot happen on a cycle
            if (seen.count(*next)) {
                walk.push_back(*next);
                std::string msg = "call graph contains a cycle: ";
                auto it = std::find(walk.begin(), walk.end(), *next);
                for (; it != walk.end(); ++it) {
                    msg += *it;
                    if (it + 1 != walk.end()) msg += " -> ";
                }
                throw CycleError(msg);
            }
            walk.push_back(*next);
            seen.insert(*next);
            cur = *next;
        }
        throw CycleError("call graph contains a cycle");
    }
    return order;
}

}  // namespace

std::vector<std::string> CallGraph::roots() const {
    std::set<std::string> has_in;
    for (const auto& edge : edges) has_in.insert(edge.to);
    std::vector<std::string> result;
    for (const auto& node : nodes)
        if (!has_in.count(node)) result.push_back(node);
    return result;
}

std::vector<std::string> CallGraph::sinks() const {
    std::set<std::string> has_out;
    for (const auto& edge : edges) has_out.insert(edge.from);
    std::vector<std::string> result;
    for (const auto& node : nodes)
        if (!has_out.count(node)) result.push_back(node);
    return result;
}

CallGraph build_call_graph(const std::vector<Span>& spans) {
    if (spans.empty()) throw DomainError("build_call_graph on an empty span set");

    std::set<std::string> nodes;
    struct EdgeAccum {
        double sum = 0.0;
        std::int64_t n = 0;
    };
    std::map<std::pair<std::string, std::string>, EdgeAccum> edge_acc;

    for (const auto& span : spans) {
        if (span.processing_time_ms < 0.0)
            throw DomainError("span processing_time_ms must be >= 0");
        nodes.insert(span.service);
        if (span.parent_service) {
            nodes.insert(*span.parent_service);
            auto& acc = edge_acc[{*span.parent_service, span.service}];
            acc.sum += span.processing_time_ms;
            acc.n += 1;
        }
    }

    CallGraph graph;
    graph.nodes.assign(nodes.begin(), nodes.end());
    graph.edges.reserve(edge_acc.size());
    for (const auto& [key, acc] : edge_acc)
        graph.edges.push_back({key.first, key.second, acc.sum / static_cast<double>(acc.n)});

    topological_order(graph);  // acyclicity check, throws CycleError
    return graph;
}

Chain critical_chain(const CallGraph& graph) {
    if (graph.empty()) throw DomainError("critical_chain on an empty graph");

    std::vector<std::string> order = topological_order(graph);

    std::map<std::string, std::vector<const GraphEdge*>> incoming;
    for (const auto& edge : graph.edges) incoming[edge.to].push_back(&edge);

    // Best root-to-node path per node. Equal weights prefer the
    // lexicographically smaller full node sequence, which makes the result
    // deterministic regardless of edge insertion order.
    struct Best {
        double weight = 0.0;
        std::vector<std::string> path;
    };
    std::map<std::string, Best> best;

    for (const auto& node : order) {
        auto in_it = incoming.find(node);
        if (in_it == incoming.end()) {
            best[node] = Best{0.0, {node}};
            continue;
        }
        const Best* chosen = nullptr;
        std::vector<std::string> chosen_path;
        double chosen_weight = 0.0;
        for (const GraphEdge* edge : in_it->second) {
            const Best& pred = best.at(edge->from);
            double weight = pred.weight + edge->weight_ms;
            std::vector<std::string> path = pred.path;
            path.push_back(node);
            if (chosen == nullptr || weight > chosen_weight ||
                (weight == chosen_weight && path < chosen_path)) {
                chosen = &pred;
                chosen_weight = weight;
                chosen_path = std::move(path);
            }
        }
        best[node] = Best{chosen_weight, std::move(chosen_path)};
    }

    const Best* winner = nullptr;
    for (const auto& sink : graph.sinks()) {
        const Best& cand = best.at(sink);
        if (winner == nullptr || cand.weight > winner->weight ||
            (cand.weight == winner->weight && cand.path < winner->path))
            winner = &cand;
    }

    return Chain{winner->path, winner->weight};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

constexpr const char* kSpanHeader = "trace_id,parent_service,service,processing_time_ms";

}  // namespace

std::vector<Span> parse_spans(const std::string& csv_text, const std::string& origin) {
    std::istringstream in(csv_text);
    std::string line;
    long line_no = 0;

    if (!std::getline(in, line)) throw ParseError(origin + ": empty span file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSpanHeader)
        throw ParseError("expected header '" + std::string(kSpanHeader) + "'", line_no);

    std::vector<Span> spans;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 4)
            throw ParseError("expected 4 comma-separated fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        Span span;
        span.trace_id = fields[0];
        if (!fields[1].empty()) span.parent_service = fields[1];
        span.service = fields[2];
        if (span.service.empty()) throw ParseError("service must be non-empty", line_no);
        try {
            span.processing_time_ms = std::stod(fields[3]);
        } catch (const std::exception&) {
            throw ParseError("expected a number for processing_time_ms, got '" + fields[3] + "'",
                             line_no);
        }
        if (span.processing_time_ms < 0.0)
            throw ParseError("processing_time_ms must be >= 0", line_no);
        spans.push_back(std::move(span));
    }
    return spans;
}

std::vector<Span> load_spans(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open span file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_spans(buf.str(), path);
}

void save_spans(const std::vector<Span>& spans, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write span file '" + path + "'");
    out << kSpanHeader << "\n";
    char buf[64];
    for (const auto& span : spans) {
        std::snprintf(buf, sizeof(buf), "%.6f", span.processing_time_ms);
        out << span.trace_id << ',' << (span.parent_service ? *span.parent_service : "") << ','
            << span.service << ',' << buf << "\n";
    }
}

}  // namespace chainsim
