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

// chainsim: trace-driven microservice cluster autoscaling experiments.
//
//   chainsim run      one experiment -> metrics.csv + summary.csv + manifest
//   chainsim compare  several policies on the same scenario
//   chainsim train    offline Q-table training from an experience pool file
//   chainsim analyze  one-shot critical-chain report from a span CSV

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chainsim/errors.hpp"
#include "chainsim/experiment.hpp"
#include "chainsim/rl.hpp"

namespace {

using namespace chainsim;

std::string default_out_dir() {
    const char* env = std::getenv("CHAINSIM_OUT_DIR");
    return env != nullptr && *env != '\0' ? env : "out";
}

struct CliOptions {
    ExperimentConfig config;
    std::string algo = "sarsa";
    std::string predictor = "markov";
    std::string periods = "1000,2000,3000,4000,5000";
    std::string policies;  // compare only
};

void add_experiment_flags(CLI::App* cmd, CliOptions& opt) {
    auto& config = opt.config;
    cmd->add_option("--trace", config.trace_file, "workload trace CSV");
    cmd->add_option("--synth-pattern", config.synth_pattern,
                    "synthetic pattern: constant|sinusoid|step|replay");
    cmd->add_option("--synth-base", config.synth.base_rate, "base request rate (req/s)");
    cmd->add_option("--synth-amplitude", config.synth.amplitude, "sinusoid amplitude (req/s)");
    cmd->add_option("--synth-period", config.synth.period, "pattern period (intervals)");
    cmd->add_option("--synth-high", config.synth.high_rate, "step high rate (req/s)");
    cmd->add_option("--synth-noise", config.synth.noise_stddev, "gaussian rate noise stddev");
    cmd->add_option("--synth-util-ref", config.synth.util_ref,
                    "rate mapped to utilization 1.0 (0 = pattern peak)");
    cmd->add_option("--synth-replay", config.synth.replay_path, "replay source trace");

    cmd->add_option("--topology", config.topology_file, "topology JSON")->required();
    cmd->add_option("--machines", config.machines_file, "machines JSON")->required();

    cmd->add_option("--policy", config.policy, "rl|threshold|hybrid|none");
    cmd->add_option("--algo", opt.algo, "rl update rule: sarsa|qlearning");
    cmd->add_option("--alpha", config.control.agent.alpha, "learning rate");
    cmd->add_option("--gamma", config.control.agent.gamma, "discount factor");
    cmd->add_option("--epsilon", config.control.agent.epsilon, "exploration probability");
    cmd->add_option("--epsilon-decay", config.control.agent.epsilon_decay,
                    "epsilon decay per training episode");
    cmd->add_option("--rt-max", config.control.agent.rt_max_ms, "QoS response-time bound (ms)");
    cmd->add_option("--online-train-every", config.control.agent.online_train_every,
                    "update every Nth action in train mode");
    cmd->add_option("--pool-capacity", config.control.agent.pool_capacity,
                    "experience pool capacity");

    cmd->add_option("--predictor", opt.predictor, "last_value|moving_average|markov");
    cmd->add_option("--predictor-window", config.control.predictor_window,
                    "moving-average window");
    cmd->add_option("--num-levels", config.control.num_levels, "workload levels");

    cmd->add_option("--tree-depth", config.control.analyzer.tree_max_depth,
                    "critical-node tree depth");
    cmd->add_option("--error-threshold", config.control.analyzer.error_threshold,
                    "tree retrain error threshold");
    cmd->add_option("--critical-delay-multiple",
                    config.control.analyzer.critical_delay_multiple,
                    "label critical when queue delay exceeds this multiple of base time");
    cmd->add_option("--span-window", config.control.analyzer.span_window,
                    "intervals of spans per call graph");

    cmd->add_option("--cpu-threshold", config.cpu_threshold, "threshold baseline CPU bound");
    cmd->add_option("--hybrid-margin", config.hybrid.margin, "hybrid baseline safety margin");
    cmd->add_option("--hybrid-window", config.hybrid.window, "hybrid baseline demand window");

    cmd->add_option("--mode", config.mode, "rl mode: train|evaluate");
    cmd->add_option("--train-episodes", config.train_episodes,
                    "training episodes (rl evaluate: train first)");
    cmd->add_option("--qtable-in", config.qtable_in, "preload Q-table");

    cmd->add_option("--seed", config.seed, "RNG seed");
    cmd->add_option("--horizon", config.horizon, "intervals to simulate");
    cmd->add_option("--out", config.out_dir, "output directory");
    cmd->add_option("--periods", opt.periods, "summary period prefixes, comma-separated");
}

std::vector<std::int64_t> parse_periods(const std::string& text) {
    std::vector<std::int64_t> periods;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ','))
        if (!token.empty()) periods.push_back(std::stoll(token));
    return periods;
}

void finalize(CliOptions& opt) {
    opt.config.control.agent.algorithm = rl_algorithm_from_name(opt.algo);
    opt.config.control.predictor = predictor_kind_from_name(opt.predictor);
    opt.config.periods = parse_periods(opt.periods);
}

void print_summary(const ExperimentResult& result) {
    std::printf("%-8s %12s %16s %14s\n", "period", "mean_rps", "total_failures", "mean_rt_ms");
    for (const auto& row : result.summary)
        std::printf("%-8lld %12.3f %16lld %14.3f\n",
                    static_cast<long long>(row.period), row.mean_rps,
                    static_cast<long long>(row.total_failures), row.mean_rt_ms);
}

int cmd_run(CliOptions& opt) {
    finalize(opt);
    ExperimentResult result = run_experiment(opt.config);
    std::printf("wrote %s\n", result.metrics_csv.c_str());
    std::printf("wrote %s\n", result.summary_csv.c_str());
    std::printf("wrote %s\n\n", result.manifest_json.c_str());
    print_summary(result);
    return 0;
}

int cmd_compare(CliOptions& opt) {
    finalize(opt);
    if (opt.policies.empty())
        throw ConfigError("--policies: need a comma-separated list, e.g. threshold,rl");
    std::vector<ExperimentConfig> configs;
    std::istringstream in(opt.policies);
    std::string policy;
    while (std::getline(in, policy, ',')) {
        ExperimentConfig config = opt.config;
        config.policy = policy;
        configs.push_back(std::move(config));
    }

    std::vector<ComparisonRow> rows = compare(configs);
    std::string csv_path = opt.config.out_dir + "/comparison.csv";
    write_comparison_csv(rows, csv_path);
    std::printf("wrote %s\n\n", csv_path.c_str());

    std::printf("%-12s %-8s %12s %10s %12s %9s %9s %9s\n", "policy", "period", "mean_rps",
                "failures", "mean_rt_ms", "rps%", "fail%", "rt%");
    for (const auto& row : rows)
        std::printf("%-12s %-8lld %12.3f %10lld %12.3f %+8.2f%% %+8.2f%% %+8.2f%%\n",
                    row.policy.c_str(), static_cast<long long>(row.period), row.mean_rps,
                    static_cast<long long>(row.total_failures), row.mean_rt_ms,
                    row.rps_delta_pct, row.failures_delta_pct, row.rt_delta_pct);
    return 0;
}

int cmd_train(const std::string& pool_path, const std::string& qtable_in,
              const std::string& out_path, double alpha, double gamma, int epochs) {
    ExperiencePool pool = load_pool(pool_path);
    QTable qtable;
    if (!qtable_in.empty()) qtable = load_qtable(qtable_in);
    offline_train(pool, qtable, alpha, gamma, epochs);
    save_qtable(qtable, out_path);
    std::printf("replayed %zu transitions x %d epochs -> %s (%zu entries)\n", pool.size(),
                epochs, out_path.c_str(), qtable.size());
    return 0;
}

int cmd_analyze(const std::string& spans_path) {
    std::vector<Span> spans = load_spans(spans_path);
    CallGraph graph = build_call_graph(spans);
    Chain chain = critical_chain(graph);

    std::printf("spans: %zu, services: %zu, edges: %zu\n", spans.size(), graph.nodes.size(),
                graph.edges.size());
    std::printf("critical chain (%.3f ms):\n  ", chain.total_latency_ms);
    for (std::size_t i = 0; i < chain.nodes.size(); ++i)
        std::printf("%s%s", chain.nodes[i].c_str(), i + 1 < chain.nodes.size() ? " -> " : "\n");

    std::printf("edges:\n");
    for (const auto& edge : graph.edges)
        std::printf("  %s -> %s  %.3f ms\n", edge.from.c_str(), edge.to.c_str(),
                    edge.weight_ms);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trace-driven microservice cluster autoscaling simulator"};
    app.require_subcommand(1);

    CliOptions run_opt;
    run_opt.config.out_dir = default_out_dir();
    CLI::App* run = app.add_subcommand("run", "run one experiment");
    add_experiment_flags(run, run_opt);

    CliOptions cmp_opt;
    cmp_opt.config.out_dir = default_out_dir();
    CLI::App* cmp = app.add_subcommand("compare", "compare policies on one scenario");
    add_experiment_flags(cmp, cmp_opt);
    cmp->add_option("--policies", cmp_opt.policies,
                    "comma-separated policies; first is the baseline")
        ->required();

    std::string pool_path, qtable_in, qtable_out = "qtable.txt";
    double alpha = 0.1, gamma = 0.9;
    int epochs = 1;
    CLI::App* train = app.add_subcommand("train", "offline Q-table training from a pool file");
    train->add_option("--pool", pool_path, "experience pool file")->required();
    train->add_option("--qtable-in", qtable_in, "starting Q-table");
    train->add_option("--out", qtable_out, "output Q-table path");
    train->add_option("--alpha", alpha, "learning rate");
    train->add_option("--gamma", gamma, "discount factor");
    train->add_option("--epochs", epochs, "replay epochs");

    std::string spans_path;
    CLI::App* analyze = app.add_subcommand("analyze", "critical-chain report from a span CSV");
    analyze->add_option("--spans", spans_path, "span CSV file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_opt);
        if (cmp->parsed()) return cmd_compare(cmp_opt);
        if (train->parsed())
            return cmd_train(pool_path, qtable_in, qtable_out, alpha, gamma, epochs);
        if (analyze->parsed()) return cmd_analyze(spans_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
