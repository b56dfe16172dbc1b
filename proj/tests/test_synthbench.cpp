// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sstream>

#include "fsr/scan.hpp"
#include "fsr/synthbench.hpp"

namespace fsr::synth {
namespace {

TEST(SceneTest, SameSeedSameScene) {
    SceneParams p;
    p.seed = 12;
    const SyntheticScene a = generate_scene(p);
    const SyntheticScene b = generate_scene(p);
    EXPECT_EQ(a.tokens.matrix(), b.tokens.matrix());
    EXPECT_EQ(a.attn.weights, b.attn.weights);
    EXPECT_EQ(a.query.vector, b.query.vector);
    EXPECT_EQ(a.labels, b.labels);
    p.seed = 13;
    EXPECT_NE(generate_scene(p).tokens.matrix(), a.tokens.matrix());
}

TEST(SceneTest, ShapeAndLabels) {
    SceneParams p;
    p.n_clusters = 3;
    p.tokens_per_cluster = 5;
    p.d = 7;
    p.heads = 2;
    p.salient_fraction = 0.5;
    const SyntheticScene s = generate_scene(p);
    EXPECT_EQ(s.tokens.size(), 15u);
    EXPECT_EQ(s.tokens.dim(), 7u);
    EXPECT_EQ(s.attn.weights.rows(), 2u);
    EXPECT_EQ(s.attn.token_count(), 15u);
    EXPECT_EQ(s.labels[4], 0u);
    EXPECT_EQ(s.labels[5], 1u);
    EXPECT_EQ(s.salient_clusters, (std::vector<std::size_t>{0, 1}));
    for (std::size_t h = 0; h < 2; ++h) {
        double sum = 0.0;
        for (std::size_t i = 0; i < 15; ++i) sum += s.attn.weights(h, i);
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(SceneTest, ZeroNoisePutsTokensOnCenters) {
    SceneParams p;
    p.noise_sigma = 0.0;
    const SyntheticScene s = generate_scene(p);
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        const std::size_t first = s.labels[i] * p.tokens_per_cluster;
        const auto a = s.tokens.row(i);
        const auto b = s.tokens.row(first);
        EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    }
    const auto c0 = s.tokens.row(0);
    EXPECT_TRUE(std::equal(c0.begin(), c0.end(), s.query.vector.begin()));
}

TEST(SceneTest, RejectsBadParams) {
    SceneParams p;
    p.salient_fraction = 0.0;
    EXPECT_THROW(generate_scene(p), Error);
    p = SceneParams{};
    p.temperature = 0.0;
    EXPECT_THROW(generate_scene(p), Error);
}

TEST(BaselineTest, TopkMatchesArgsortPrefix) {
    SceneParams p;
    p.seed = 3;
    const SyntheticScene s = generate_scene(p);
    const auto order = stable_argsort_desc(compute_saliency(s.attn));
    const IndexSet top = baseline_topk_attention(s, 10);
    EXPECT_EQ(top, IndexSet(std::vector<std::size_t>(order.begin(), order.begin() + 10)));
}

TEST(BaselineTest, FpsIsScanSeededAtTokenZero) {
    const SyntheticScene s = random_scene(50, 6, 4);
    const auto order = baseline_fps_order(s, 9);
    ASSERT_EQ(order.size(), 9u);
    EXPECT_EQ(order[0], 0u);
    const ScanResult scan = conditional_context_sampling(s.tokens, IndexSet(std::vector<std::size_t>{0}), 8);
    EXPECT_TRUE(std::equal(scan.selection_order.begin(), scan.selection_order.end(), order.begin() + 1));
}

TEST(BaselineTest, FpsReachesBothAntipodalClusters) {
    SceneParams p;
    p.n_clusters = 2;
    p.tokens_per_cluster = 10;
    p.noise_sigma = 0.01;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        p.seed = seed;
        SyntheticScene s = generate_scene(p);
        // Mirror the second cluster through the origin so the two are antipodal.
        std::vector<double> v(s.tokens.matrix().data().begin(), s.tokens.matrix().data().end());
        for (std::size_t i = 10 * p.d; i < v.size(); ++i) {
            v[i] = -v[i - 10 * p.d];
        }
        s.tokens = TokenMatrix(20, p.d, v);
        const IndexSet kept = baseline_fps_only(s, 2);
        EXPECT_EQ(evaluate(s, kept).cluster_recall, 1.0);
    }
}

TEST(BaselineTest, FullBudgetKeepsEverything) {
    const SyntheticScene s = random_scene(12, 3, 5);
    EXPECT_EQ(baseline_fps_only(s, 12).size(), 12u);
    EXPECT_EQ(baseline_topk_attention(s, 40).size(), 12u);
}

TEST(EvaluateTest, FullSelectionIsPerfect) {
    SceneParams p;
    const SyntheticScene s = generate_scene(p);
    std::vector<std::size_t> all(s.tokens.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const QualityMetrics m = evaluate(s, IndexSet(all));
    EXPECT_EQ(m.coverage_radius, 0.0);
    EXPECT_DOUBLE_EQ(m.retained_priority_mass, 1.0);
    EXPECT_EQ(m.cluster_recall, 1.0);
    EXPECT_THROW(evaluate(s, IndexSet()), Error);
}

TEST(EvaluateTest, SingleClusterRecallIsOne) {
    SceneParams p;
    p.n_clusters = 1;
    const SyntheticScene s = generate_scene(p);
    EXPECT_EQ(evaluate(s, IndexSet({3})).cluster_recall, 1.0);
}

TEST(QualityTrialTest, RowsAndCsv) {
    SceneParams p;
    p.seed = 100;
    const auto rows = run_quality_trials(p, 8, 3, default_config(8));
    ASSERT_EQ(rows.size(), 9u);
    EXPECT_EQ(rows[0].method, "fsr");
    EXPECT_EQ(rows[1].method, "topk_attention");
    EXPECT_EQ(rows[2].method, "fps_only");
    EXPECT_EQ(rows[3].seed, 101u);
    EXPECT_TRUE(rows[0].metrics.focus_scan_split.has_value());
    std::ostringstream buf;
    write_trial_csv(rows, buf);
    const std::string csv = buf.str();
    EXPECT_EQ(csv.rfind("seed,method,K,coverage_radius,retained_priority_mass,cluster_recall,k_f,k_s,micros\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
    const auto summary = summarize_trials(rows);
    EXPECT_EQ(summary["fsr"]["trials"], 3);
    EXPECT_TRUE(summary.contains("fps_only"));
}

TEST(ThroughputTest, SmokeRun) {
    const auto rows = bench_throughput({40, 80}, {8}, {8}, 2, 1);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].n, 80u);
    EXPECT_GE(rows[0].prune_median_micros, 0.0);
    std::ostringstream csv;
    write_throughput_csv(rows, csv);
    EXPECT_EQ(csv.str().rfind("n,d,K,repeats,prune_median_micros,scan_median_micros\n", 0), 0u);
    EXPECT_THROW(bench_throughput({10}, {2}, {2}, 0, 1), Error);
}

TEST(OracleTrialTest, GreedyNeverBeatsOptimum) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const OracleTrial t = run_oracle_trial(9, 3, 2, 2, seed);
        EXPECT_GE(t.greedy_radius, t.optimal_radius - 1e-12);
    }
    EXPECT_THROW(run_oracle_trial(4, 2, 0, 1, 0), Error);
    EXPECT_THROW(run_oracle_trial(4, 2, 2, 3, 0), Error);
}

}  // namespace
}  // namespace fsr::synth
