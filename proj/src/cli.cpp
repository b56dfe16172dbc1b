// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#include "fsr/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fsr/pipeline.hpp"
#include "fsr/scan.hpp"
#include "fsr/synthbench.hpp"
#include "fsr/tensor_io.hpp"

namespace fsr {

namespace {

struct PruneArgs {
    std::string tokens;
    std::string attn;
    std::string query;
    bool no_query = false;
    std::string saliency_mode = "cls_attention";
    bool no_stats = false;
    std::string out;
    std::string out_vectors;
    PruneConfig config;
};

struct OracleArgs {
    std::size_t n = 10;
    std::size_t d = 3;
    std::size_t budget = 4;
    std::size_t trials = 200;
    std::uint64_t seed = 0;
    std::size_t focus_size = 0;
};

struct BenchArgs {
    std::string mode = "quality";
    synth::SceneParams scene;
    std::size_t budget = 16;
    std::size_t trials = 100;
    std::string csv;
    std::string summary;
    std::vector<std::size_t> n_list{576, 1152};
    std::vector<std::size_t> d_list{64};
    std::vector<std::size_t> k_list{64};
    std::size_t repeats = 5;
    PruneConfig config;
};

void add_config_flags(CLI::App& cmd, PruneConfig& config) {
    cmd.add_option("--alpha", config.alpha, "Relevance exponent")->check(CLI::NonNegativeNumber);
    cmd.add_option("--beta", config.beta, "Saliency exponent")->check(CLI::NonNegativeNumber);
    cmd.add_option("--rho", config.rho, "Fraction of priority mass the focus set must hold")
        ->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--kappa", config.kappa, "Merge budget per scan anchor")->check(CLI::NonNegativeNumber);
    cmd.add_option("--threads", config.num_threads, "Worker threads (0 = all cores)");
}

template <class T>
T expect_kind(const TensorValue& value, const std::string& path, const char* role) {
    if (const auto* v = std::get_if<T>(&value)) {
        return *v;
    }
    throw Error(ErrorCode::bad_kind, path + " does not hold " + role);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw Error(ErrorCode::io_failure, "cannot open " + path + " for writing");
    }
    file << text;
    if (!file) {
        throw Error(ErrorCode::io_failure, "write failed for " + path);
    }
}

std::string read_text(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw Error(ErrorCode::io_failure, "cannot open " + path);
    }
    std::ostringstream buf;
    buf << file.rdbuf();
    return buf.str();
}

int run_prune(PruneArgs& a, std::ostream& out) {
    a.config.saliency_mode = parse_saliency_mode(a.saliency_mode);
    a.config.relevance_mode = a.no_query ? RelevanceMode::none : RelevanceMode::query;
    a.config.compute_stats = !a.no_stats;

    const TokenMatrix tokens = expect_kind<TokenMatrix>(read_tensor(a.tokens), a.tokens, "a token matrix");
    const AttentionInput attn = expect_kind<AttentionInput>(read_tensor(a.attn), a.attn, "an attention map");
    std::optional<QueryEmbedding> query;
    if (!a.no_query) {
        query = expect_kind<QueryEmbedding>(read_tensor(a.query), a.query, "a query vector");
    }

    const PruneResult result = prune(tokens, attn, query, a.config);
    const std::string doc = dump_document(to_json(summarize(result, tokens.size(), a.config.budget_K), a.config));
    if (a.out.empty()) {
        out << doc;
    } else {
        write_text(a.out, doc);
    }
    if (!a.out_vectors.empty()) {
        write_tensor(TokenMatrix(result.kept_vectors), a.out_vectors);
    }
    return kExitOk;
}

int run_oracle(const OracleArgs& a, std::ostream& out) {
    std::mt19937_64 rng(a.seed);
    std::uniform_int_distribution<std::size_t> pick_focus(1, a.budget - 1);
    double max_ratio = 0.0;
    std::size_t violations = 0;
    std::size_t skipped = 0;
    for (std::size_t t = 0; t < a.trials; ++t) {
        const std::size_t f = a.focus_size != 0 ? a.focus_size : pick_focus(rng);
        const synth::OracleTrial trial = synth::run_oracle_trial(a.n, a.d, f, a.budget - f, a.seed + t);
        if (!trial.within_bound) {
            ++violations;
        }
        if (trial.optimal_radius > 0.0) {
            max_ratio = std::max(max_ratio, trial.greedy_radius / trial.optimal_radius);
        } else if (trial.greedy_radius > 0.0) {
            max_ratio = std::numeric_limits<double>::infinity();
        } else {
            ++skipped;
        }
    }
    out << std::setprecision(12);
    out << "trials: " << a.trials << "\n";
    out << "n: " << a.n << ", d: " << a.d << ", budget: " << a.budget << "\n";
    out << "zero_optimum_trials: " << skipped << "\n";
    out << "max_ratio: " << max_ratio << "\n";
    out << "bound: 2\n";
    out << "violations: " << violations << "\n";
    return kExitOk;
}

int run_bench(BenchArgs& a, std::ostream& out) {
    if (a.mode == "throughput") {
        const auto rows = synth::bench_throughput(a.n_list, a.d_list, a.k_list, a.repeats, a.scene.seed);
        if (a.csv.empty()) {
            synth::write_throughput_csv(rows, out);
        } else {
            std::ostringstream buf;
            synth::write_throughput_csv(rows, buf);
            write_text(a.csv, buf.str());
        }
        return kExitOk;
    }
    const auto rows = synth::run_quality_trials(a.scene, a.budget, a.trials, a.config);
    std::ostringstream csv;
    synth::write_trial_csv(rows, csv);
    const std::string summary = dump_document(synth::summarize_trials(rows));
    if (a.csv.empty()) {
        out << csv.str();
    } else {
        write_text(a.csv, csv.str());
    }
    if (a.summary.empty()) {
        if (!a.csv.empty()) {
            out << summary;
        }
    } else {
        write_text(a.summary, summary);
    }
    return kExitOk;
}

int run_explain(const std::string& path, std::ostream& out) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::invalid_argument, path + " is not valid JSON: " + e.what());
    }
    out << explain(summary_from_json(doc));
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Focus-scan-refine visual token pruning", "fsr"};
    app.require_subcommand(1);

    PruneArgs prune_args;
    auto* prune_cmd = app.add_subcommand("prune", "Prune a token matrix to a fixed budget");
    prune_cmd->add_option("--tokens", prune_args.tokens, "Token matrix (.fsrt kind 0)")->required();
    prune_cmd->add_option("--attn", prune_args.attn, "Attention map (.fsrt kind 1 or 2)")->required();
    auto* query_opt = prune_cmd->add_option("--query", prune_args.query, "Query embedding (.fsrt kind 3)");
    auto* no_query_flag = prune_cmd->add_flag("--no-query", prune_args.no_query, "Drop the relevance pathway");
    query_opt->excludes(no_query_flag);
    prune_cmd->add_option("--budget", prune_args.config.budget_K, "Token budget K")
        ->required()
        ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
    prune_cmd->add_option("--saliency-mode", prune_args.saliency_mode, "cls_attention or self_attention_aggregate")
        ->check(CLI::IsMember({"cls_attention", "self_attention_aggregate"}));
    prune_cmd->add_flag("--no-stats", prune_args.no_stats, "Skip the coverage radius");
    prune_cmd->add_option("--out", prune_args.out, "Result document path (stdout when omitted)");
    prune_cmd->add_option("--out-vectors", prune_args.out_vectors, "Kept vectors as .fsrt kind 0");
    add_config_flags(*prune_cmd, prune_args.config);

    OracleArgs oracle_args;
    auto* oracle_cmd = app.add_subcommand("oracle", "Check greedy coverage against the exhaustive optimum");
    oracle_cmd->add_option("--n", oracle_args.n, "Tokens per instance")->check(CLI::Range(2, 64));
    oracle_cmd->add_option("--d", oracle_args.d, "Feature dimension")->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--budget", oracle_args.budget, "Total budget K")->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--trials", oracle_args.trials, "Random instances")->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--seed", oracle_args.seed, "Master seed (trial t uses seed + t)");
    oracle_cmd->add_option("--focus-size", oracle_args.focus_size, "Fixed |F| (0 = random in [1, K-1])");

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "Synthetic quality or throughput sweep");
    bench_cmd->add_option("--mode", bench_args.mode, "quality or throughput")
        ->check(CLI::IsMember({"quality", "throughput"}));
    bench_cmd->add_option("--clusters", bench_args.scene.n_clusters)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--tokens-per-cluster", bench_args.scene.tokens_per_cluster)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--d", bench_args.scene.d)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--salient-fraction", bench_args.scene.salient_fraction)
        ->check(CLI::Range(0.0, 1.0));
    bench_cmd->add_option("--noise", bench_args.scene.noise_sigma)->check(CLI::NonNegativeNumber);
    bench_cmd->add_option("--temperature", bench_args.scene.temperature)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed", bench_args.scene.seed);
    bench_cmd->add_option("--budget", bench_args.budget)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--trials", bench_args.trials)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--csv", bench_args.csv, "Per-trial CSV path (stdout when omitted)");
    bench_cmd->add_option("--summary", bench_args.summary, "Summary JSON path");
    bench_cmd->add_option("--n-list", bench_args.n_list)->delimiter(',');
    bench_cmd->add_option("--d-list", bench_args.d_list)->delimiter(',');
    bench_cmd->add_option("--k-list", bench_args.k_list)->delimiter(',');
    bench_cmd->add_option("--repeats", bench_args.repeats)->check(CLI::PositiveNumber);
    add_config_flags(*bench_cmd, bench_args.config);

    std::string explain_path;
    auto* explain_cmd = app.add_subcommand("explain", "Per-stage report from a saved result document");
    explain_cmd->add_option("--result", explain_path, "Result document from `fsr prune`")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*prune_cmd) {
            if (!prune_args.no_query && prune_args.query.empty()) {
                err << "prune: pass --query or --no-query\n";
                return kExitUsage;
            }
            return run_prune(prune_args, out);
        }
        if (*oracle_cmd) {
            if (oracle_args.budget < 2 || oracle_args.budget > oracle_args.n ||
                oracle_args.focus_size >= oracle_args.budget) {
                err << "oracle: need 2 <= budget <= n and focus size < budget\n";
                return kExitUsage;
            }
            return run_oracle(oracle_args, out);
        }
        if (*bench_cmd) {
            return run_bench(bench_args, out);
        }
        return run_explain(explain_path, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
}

}  // namespace fsr
