// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#include "fsr/synthbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>

#include "fsr/scan.hpp"

namespace fsr::synth {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_micros(Clock::time_point start) {
    return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

double median(std::vector<double> values) {
    if (values.empty()) {
        return 0.0;
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

std::vector<double> unit_gaussian(std::mt19937_64& rng, std::size_t d) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(d);
    double norm = 0.0;
    while (norm == 0.0) {
        for (double& x : v) {
            x = normal(rng);
        }
        norm = l2_norm(v);
    }
    for (double& x : v) {
        x /= norm;
    }
    return v;
}

}  // namespace

void SceneParams::validate() const {
    if (n_clusters < 1 || tokens_per_cluster < 1 || d < 1 || heads < 1) {
        throw Error(ErrorCode::invalid_argument, "scene counts must be >= 1");
    }
    if (!(salient_fraction > 0.0 && salient_fraction <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "salient_fraction must lie in (0, 1]");
    }
    if (!(noise_sigma >= 0.0) || !(temperature > 0.0) || !(head_jitter >= 0.0) || !(primary_boost >= 0.0)) {
        throw Error(ErrorCode::invalid_argument, "noise, jitter and boost must be >= 0, temperature > 0");
    }
}

SyntheticScene generate_scene(const SceneParams& params) {
    params.validate();
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const std::size_t n = params.n_clusters * params.tokens_per_cluster;
    const std::size_t n_salient = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(params.salient_fraction * static_cast<double>(params.n_clusters))), 1,
        params.n_clusters);

    std::vector<std::vector<double>> centers;
    centers.reserve(params.n_clusters);
    for (std::size_t c = 0; c < params.n_clusters; ++c) {
        centers.push_back(unit_gaussian(rng, params.d));
    }

    std::vector<double> values;
    values.reserve(n * params.d);
    std::vector<std::size_t> labels;
    labels.reserve(n);
    for (std::size_t c = 0; c < params.n_clusters; ++c) {
        for (std::size_t t = 0; t < params.tokens_per_cluster; ++t) {
            for (std::size_t k = 0; k < params.d; ++k) {
                const double noise = params.noise_sigma > 0.0 ? params.noise_sigma * normal(rng) : 0.0;
                values.push_back(centers[c][k] + noise);
            }
            labels.push_back(c);
        }
    }
    TokenMatrix tokens(n, params.d, std::move(values));

    // Per-token affinity to the salient centers; the first one may be boosted.
    std::vector<double> affinity(n);
    for (std::size_t i = 0; i < n; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < n_salient; ++c) {
            const double scale = c == 0 ? 1.0 + params.primary_boost : 1.0;
            best = std::max(best, scale * cosine_similarity(tokens.row(i), centers[c]));
        }
        affinity[i] = best;
    }

    Matrix cls(params.heads, n);
    for (std::size_t h = 0; h < params.heads; ++h) {
        std::vector<double> logits(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double jitter = params.head_jitter > 0.0 ? params.head_jitter * normal(rng) : 0.0;
            logits[i] = (affinity[i] + jitter) / params.temperature;
        }
        const double peak = *std::max_element(logits.begin(), logits.end());
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cls(h, i) = std::exp(logits[i] - peak);
            total += cls(h, i);
        }
        for (std::size_t i = 0; i < n; ++i) {
            cls(h, i) /= total;
        }
    }

    std::vector<std::size_t> salient(n_salient);
    for (std::size_t c = 0; c < n_salient; ++c) {
        salient[c] = c;
    }
    return SyntheticScene{std::move(tokens),   AttentionInput::cls(std::move(cls)),
                          QueryEmbedding{centers[0]}, std::move(labels),
                          std::move(salient),  params.n_clusters,
                          params.seed};
}

SyntheticScene random_scene(std::size_t n, std::size_t d, std::uint64_t seed, std::size_t heads) {
    if (n < 1 || d < 1 || heads < 1) {
        throw Error(ErrorCode::invalid_argument, "random scene dimensions must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> values(n * d);
    for (double& v : values) {
        v = normal(rng);
    }
    Matrix cls(heads, n);
    for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t i = 0; i < n; ++i) {
            cls(h, i) = uniform(rng);
        }
    }
    std::vector<double> query(d);
    for (double& v : query) {
        v = normal(rng);
    }
    return SyntheticScene{TokenMatrix(n, d, std::move(values)),
                          AttentionInput::cls(std::move(cls)),
                          QueryEmbedding{std::move(query)},
                          std::vector<std::size_t>(n, 0),
                          {0},
                          1,
                          seed};
}

IndexSet baseline_topk_attention(const SyntheticScene& scene, std::size_t budget_K) {
    const ScoreVector saliency = compute_saliency(scene.attn);
    const auto order = stable_argsort_desc(saliency);
    const std::size_t k = std::min(budget_K, order.size());
    return IndexSet(std::vector<std::size_t>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k)));
}

std::vector<std::size_t> baseline_fps_order(const SyntheticScene& scene, std::size_t budget_K) {
    if (budget_K == 0) {
        return {};
    }
    const std::size_t k = std::min(budget_K, scene.tokens.size());
    const ScanResult scan = conditional_context_sampling(scene.tokens, IndexSet(std::vector<std::size_t>{0}), k - 1);
    std::vector<std::size_t> order{0};
    order.insert(order.end(), scan.selection_order.begin(), scan.selection_order.end());
    return order;
}

IndexSet baseline_fps_only(const SyntheticScene& scene, std::size_t budget_K) {
    return IndexSet(baseline_fps_order(scene, budget_K));
}

PruneConfig default_config(std::size_t budget_K) {
    PruneConfig config;
    config.budget_K = budget_K;
    return config;
}

QualityMetrics evaluate(const SyntheticScene& scene, const IndexSet& kept) {
    if (kept.empty()) {
        throw Error(ErrorCode::invalid_argument, "cannot evaluate an empty selection");
    }
    kept.check_bounds(scene.tokens.size());
    QualityMetrics m;
    m.coverage_radius = coverage_radius(scene.tokens, kept);

    const ScoreVector phi =
        compute_priorities(scene.tokens, scene.attn, scene.query, default_config(scene.tokens.size()));
    double total = 0.0;
    for (double p : phi) {
        total += p;
    }
    double kept_mass = 0.0;
    for (std::size_t i : kept) {
        kept_mass += phi[i];
    }
    m.retained_priority_mass = total == 0.0 ? 1.0 : std::min(1.0, kept_mass / total);

    std::vector<char> hit(scene.n_clusters, 0);
    for (std::size_t i : kept) {
        hit[scene.labels[i]] = 1;
    }
    m.cluster_recall = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) /
                       static_cast<double>(scene.n_clusters);
    return m;
}

QualityMetrics evaluate(const SyntheticScene& scene, const PruneResult& result) {
    QualityMetrics m = evaluate(scene, result.kept_indices);
    m.focus_scan_split = std::pair{result.stats.k_f, result.stats.k_s};
    return m;
}

std::vector<TrialRow> run_quality_trials(const SceneParams& params, std::size_t budget_K, std::size_t trials,
                                         const PruneConfig& config) {
    std::vector<TrialRow> rows;
    rows.reserve(trials * 3);
    PruneConfig cfg = config;
    cfg.budget_K = budget_K;
    for (std::size_t t = 0; t < trials; ++t) {
        SceneParams p = params;
        p.seed = params.seed + t;
        const SyntheticScene scene = generate_scene(p);

        auto start = Clock::now();
        const PruneResult fsr = prune(scene.tokens, scene.attn, scene.query, cfg);
        const double fsr_micros = elapsed_micros(start);
        rows.push_back({p.seed, "fsr", budget_K, evaluate(scene, fsr), fsr_micros});

        start = Clock::now();
        const IndexSet topk = baseline_topk_attention(scene, budget_K);
        const double topk_micros = elapsed_micros(start);
        rows.push_back({p.seed, "topk_attention", budget_K, evaluate(scene, topk), topk_micros});

        start = Clock::now();
        const IndexSet fps = baseline_fps_only(scene, budget_K);
        const double fps_micros = elapsed_micros(start);
        rows.push_back({p.seed, "fps_only", budget_K, evaluate(scene, fps), fps_micros});
    }
    return rows;
}

void write_trial_csv(const std::vector<TrialRow>& rows, std::ostream& out) {
    out << "seed,method,K,coverage_radius,retained_priority_mass,cluster_recall,k_f,k_s,micros\n";
    out << std::setprecision(10);
    for (const TrialRow& r : rows) {
        out << r.seed << ',' << r.method << ',' << r.budget_K << ',' << r.metrics.coverage_radius << ','
            << r.metrics.retained_priority_mass << ',' << r.metrics.cluster_recall << ',';
        if (r.metrics.focus_scan_split) {
            out << r.metrics.focus_scan_split->first << ',' << r.metrics.focus_scan_split->second;
        } else {
            out << ',';
        }
        out << ',' << r.micros << '\n';
    }
}

nlohmann::json summarize_trials(const std::vector<TrialRow>& rows) {
    struct Acc {
        std::size_t count = 0;
        double coverage = 0.0;
        double mass = 0.0;
        double recall = 0.0;
        double k_f = 0.0;
        double micros = 0.0;
    };
    std::map<std::string, Acc> by_method;
    for (const TrialRow& r : rows) {
        Acc& a = by_method[r.method];
        ++a.count;
        a.coverage += r.metrics.coverage_radius;
        a.mass += r.metrics.retained_priority_mass;
        a.recall += r.metrics.cluster_recall;
        a.k_f += r.metrics.focus_scan_split ? static_cast<double>(r.metrics.focus_scan_split->first) : 0.0;
        a.micros += r.micros;
    }
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [method, a] : by_method) {
        const double n = static_cast<double>(a.count);
        doc[method] = {
            {"trials", a.count},
            {"mean_coverage_radius", a.coverage / n},
            {"mean_retained_priority_mass", a.mass / n},
            {"mean_cluster_recall", a.recall / n},
            {"mean_k_f", a.k_f / n},
            {"mean_micros", a.micros / n},
        };
    }
    return doc;
}

std::vector<ThroughputRow> bench_throughput(const std::vector<std::size_t>& n_list,
                                            const std::vector<std::size_t>& d_list,
                                            const std::vector<std::size_t>& k_list, std::size_t repeats,
                                            std::uint64_t seed) {
    if (repeats == 0) {
        throw Error(ErrorCode::invalid_argument, "repeats must be >= 1");
    }
    std::vector<ThroughputRow> rows;
    for (std::size_t n : n_list) {
        for (std::size_t d : d_list) {
            const SyntheticScene scene = random_scene(n, d, seed);
            for (std::size_t k : k_list) {
                PruneConfig config = default_config(k);
                std::vector<double> prune_times;
                std::vector<double> scan_times;
                for (std::size_t r = 0; r < repeats; ++r) {
                    auto start = Clock::now();
                    const PruneResult result = prune(scene.tokens, scene.attn, scene.query, config);
                    prune_times.push_back(elapsed_micros(start));

                    const std::size_t picks = std::min(k, n) - 1;
                    start = Clock::now();
                    const ScanResult scan = conditional_context_sampling(scene.tokens, IndexSet(std::vector<std::size_t>{0}), picks);
                    scan_times.push_back(elapsed_micros(start));
                    if (scan.selection_order.size() != picks || result.kept_indices.size() != std::min(k, n)) {
                        throw Error(ErrorCode::invalid_argument, "throughput run produced a wrong-sized selection");
                    }
                }
                rows.push_back({n, d, k, repeats, median(prune_times), median(scan_times)});
            }
        }
    }
    return rows;
}

OracleTrial run_oracle_trial(std::size_t n, std::size_t d, std::size_t focus_size, std::size_t k_s,
                             std::uint64_t seed) {
    if (focus_size < 1 || focus_size + k_s > n) {
        throw Error(ErrorCode::invalid_argument, "oracle trial needs 1 <= |F| and |F| + K_S <= N");
    }
    const SyntheticScene scene = random_scene(n, d, seed, 1);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) {
        perm[i] = i;
    }
    std::shuffle(perm.begin(), perm.end(), rng);
    const IndexSet focus(std::vector<std::size_t>(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(focus_size)));

    const ScanResult scan = conditional_context_sampling(scene.tokens, focus, k_s);
    OracleTrial trial;
    trial.n = n;
    trial.d = d;
    trial.focus_size = focus_size;
    trial.k_s = k_s;
    trial.seed = seed;
    trial.greedy_radius = coverage_radius(scene.tokens, set_union(focus, scan.scan_set));
    trial.optimal_radius = optimal_covering_radius(scene.tokens, focus, k_s);
    trial.within_bound = trial.greedy_radius <= 2.0 * trial.optimal_radius + kCoverageBoundSlack;
    return trial;
}

void write_throughput_csv(const std::vector<ThroughputRow>& rows, std::ostream& out) {
    out << "n,d,K,repeats,prune_median_micros,scan_median_micros\n";
    out << std::setprecision(10);
    for (const ThroughputRow& r : rows) {
        out << r.n << ',' << r.d << ',' << r.budget_K << ',' << r.repeats << ',' << r.prune_median_micros << ','
            << r.scan_median_micros << '\n';
    }
}

}  // namespace fsr::synth
