// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>

#include "json.hpp"

#include "fsr/core.hpp"
#include "fsr/focus.hpp"
#include "fsr/pipeline.hpp"

namespace fsr::synth {

struct SceneParams {
    std::size_t n_clusters = 4;
    std::size_t tokens_per_cluster = 16;
    std::size_t d = 16;
    /// Fraction of clusters that receive [CLS] attention; at least one always does.
    double salient_fraction = 0.25;
    double noise_sigma = 0.1;
    std::uint64_t seed = 0;
    /// Softmax temperature of the synthetic attention logits.
    double temperature = 0.1;
    std::size_t heads = 4;
    /// Std-dev of per-head logit jitter.
    double head_jitter = 0.05;
    /// Extra logit scale on the first salient cluster; > 0 concentrates attention there.
    double primary_boost = 0.0;

    void validate() const;
};

/// Planted scene: clusters on the unit sphere plus Gaussian noise. Tokens are stored
/// cluster by cluster; salient clusters are 0 .. salient_clusters.size() - 1 and the
/// query points at the center of cluster 0.
struct SyntheticScene {
    TokenMatrix tokens;
    AttentionInput attn;
    QueryEmbedding query;
    std::vector<std::size_t> labels;
    std::vector<std::size_t> salient_clusters;
    std::size_t n_clusters = 0;
    std::uint64_t seed = 0;
};

SyntheticScene generate_scene(const SceneParams& params);

/// Unstructured instance: Gaussian tokens, uniform random [CLS] rows, Gaussian query.
SyntheticScene random_scene(std::size_t n, std::size_t d, std::uint64_t seed, std::size_t heads = 4);

/// Top-K by [CLS] saliency alone. K >= N returns every token.
IndexSet baseline_topk_attention(const SyntheticScene& scene, std::size_t budget_K);

/// Plain farthest-point order under cosine distance, seeded with token 0.
std::vector<std::size_t> baseline_fps_order(const SyntheticScene& scene, std::size_t budget_K);
IndexSet baseline_fps_only(const SyntheticScene& scene, std::size_t budget_K);

struct QualityMetrics {
    double coverage_radius = 0.0;
    double retained_priority_mass = 0.0;
    double cluster_recall = 0.0;
    /// (K_F, K_S) when the selection came from the pipeline.
    std::optional<std::pair<std::size_t, std::size_t>> focus_scan_split;
};

/// Mass is measured against the scene's phi under the default configuration.
QualityMetrics evaluate(const SyntheticScene& scene, const IndexSet& kept);
QualityMetrics evaluate(const SyntheticScene& scene, const PruneResult& result);

/// Default configuration with the given budget, matched to the scene's attention mode.
PruneConfig default_config(std::size_t budget_K);

struct TrialRow {
    std::uint64_t seed = 0;
    std::string method;
    std::size_t budget_K = 0;
    QualityMetrics metrics;
    double micros = 0.0;
};

/// Runs FSR and both baselines on `trials` scenes seeded params.seed + t.
std::vector<TrialRow> run_quality_trials(const SceneParams& params, std::size_t budget_K, std::size_t trials,
                                         const PruneConfig& config);

void write_trial_csv(const std::vector<TrialRow>& rows, std::ostream& out);

/// Per-method means of every metric.
nlohmann::json summarize_trials(const std::vector<TrialRow>& rows);

struct ThroughputRow {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t budget_K = 0;
    std::size_t repeats = 0;
    double prune_median_micros = 0.0;
    /// Scan stage alone: one focus token, K - 1 greedy picks.
    double scan_median_micros = 0.0;
};

std::vector<ThroughputRow> bench_throughput(const std::vector<std::size_t>& n_list,
                                            const std::vector<std::size_t>& d_list,
                                            const std::vector<std::size_t>& k_list, std::size_t repeats,
                                            std::uint64_t seed);

void write_throughput_csv(const std::vector<ThroughputRow>& rows, std::ostream& out);

/// Absolute slack allowed on top of 2 * R_opt when checking the greedy coverage bound.
inline constexpr double kCoverageBoundSlack = 1e-12;

struct OracleTrial {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t focus_size = 0;
    std::size_t k_s = 0;
    std::uint64_t seed = 0;
    double greedy_radius = 0.0;
    double optimal_radius = 0.0;
    bool within_bound = false;
};

/// Gaussian tokens, a random focus set of `focus_size`, greedy scan of `k_s` picks,
/// compared against the exhaustive optimum.
OracleTrial run_oracle_trial(std::size_t n, std::size_t d, std::size_t focus_size, std::size_t k_s,
                             std::uint64_t seed);

}  // namespace fsr::synth
