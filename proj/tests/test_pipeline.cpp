// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fsr/pipeline.hpp"
#include "fsr/scan.hpp"
#include "fsr/synthbench.hpp"
#include "oracles.hpp"

namespace fsr {
namespace {

PruneConfig config_with(std::size_t k) {
    PruneConfig c;
    c.budget_K = k;
    return c;
}

TEST(PipelineTest, BudgetAtLeastTokenCountIsPassthrough) {
    std::mt19937_64 rng(1);
    const TokenMatrix t = testing::random_tokens(rng, 5, 3);
    const AttentionInput a = testing::random_cls(rng, 2, 5);
    const auto q = testing::random_query(rng, 3);
    for (std::size_t k : {5u, 9u}) {
        const PruneResult r = prune(t, a, q, config_with(k));
        EXPECT_TRUE(r.passthrough);
        EXPECT_EQ(r.kept_indices.indices(), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
        EXPECT_EQ(r.kept_vectors, t.matrix());
        EXPECT_EQ(r.stats.k_f, 5u);
        EXPECT_EQ(r.stats.k_s, 0u);
        EXPECT_EQ(r.stats.coverage_radius, 0.0);
        EXPECT_EQ(r.stats.retained_priority_mass, 1.0);
        for (Origin o : r.origins) EXPECT_EQ(o, Origin::focus);
    }
}

TEST(PipelineTest, BudgetOneKeepsTopPriorityToken) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = testing::uniform_size(rng, 2, 40);
        const TokenMatrix t = testing::random_tokens(rng, n, 4);
        const AttentionInput a = testing::random_cls(rng, 3, n);
        const auto q = testing::random_query(rng, 4);
        const PruneResult r = prune(t, a, q, config_with(1));
        ASSERT_EQ(r.kept_indices.size(), 1u);
        EXPECT_EQ(r.kept_indices[0], stable_argsort_desc(r.phi)[0]);
        EXPECT_EQ(r.origins[0], Origin::focus);
        EXPECT_EQ(r.stats.k_s, 0u);
    }
}

// Cluster A (tokens 0..3) near [1, 0] holds all the attention; cluster B (4..7) near [0, 1] holds none.
TEST(PipelineTest, PlantedTwoClusterScene) {
    const TokenMatrix t(8, 2,
                        {1.0, 0.00, 1.0, 0.05, 1.0, -0.05, 1.0, 0.02,
                         0.0, 1.00, 0.05, 1.0, -0.05, 1.0, 0.02, 1.0});
    Matrix cls(1, 8);
    for (std::size_t i = 0; i < 4; ++i) cls(0, i) = 0.25 - 0.01 * static_cast<double>(i);
    PruneConfig c = config_with(4);
    c.relevance_mode = RelevanceMode::none;
    c.rho = 0.5;
    const PruneResult r = prune(t, AttentionInput::cls(cls), std::nullopt, c);
    ASSERT_EQ(r.kept_indices.size(), 4u);
    std::size_t from_b = 0;
    for (std::size_t j = 0; j < r.kept_indices.size(); ++j) {
        const std::size_t i = r.kept_indices[j];
        if (r.origins[j] == Origin::focus) {
            EXPECT_LT(i, 4u);
        }
        if (i >= 4) ++from_b;
    }
    EXPECT_GE(from_b, 1u);
    EXPECT_GE(r.stats.k_s, 1u);
}

TEST(PipelineTest, BudgetExactFocusPreservedAndDeterministic) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t n = testing::uniform_size(rng, 1, 60);
        const std::size_t d = testing::uniform_size(rng, 1, 8);
        const TokenMatrix t = testing::random_tokens(rng, n, d);
        const AttentionInput a = testing::random_cls(rng, testing::uniform_size(rng, 1, 4), n);
        const auto q = testing::random_query(rng, d);
        PruneConfig c = config_with(testing::uniform_size(rng, 1, n + 3));
        c.rho = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        c.kappa = static_cast<double>(testing::uniform_size(rng, 0, 3));
        const PruneResult r = prune(t, a, q, c);

        ASSERT_EQ(r.kept_indices.size(), std::min(c.budget_K, n));
        ASSERT_EQ(r.kept_vectors.rows(), r.kept_indices.size());
        ASSERT_EQ(r.origins.size(), r.kept_indices.size());
        EXPECT_EQ(r.stats.k_f + r.stats.k_s, r.kept_indices.size());
        for (std::size_t j = 0; j < r.kept_indices.size(); ++j) {
            if (r.origins[j] == Origin::focus) {
                const auto row = r.kept_vectors.row(j);
                const auto orig = t.row(r.kept_indices[j]);
                EXPECT_TRUE(std::equal(row.begin(), row.end(), orig.begin()));
            }
        }
        EXPECT_EQ(prune(t, a, q, c), r);
        c.num_threads = 4;
        EXPECT_EQ(prune(t, a, q, c), r);
    }
}

TEST(PipelineTest, ExplainReportsStagesAndCoverage) {
    std::mt19937_64 rng(4);
    const TokenMatrix t = testing::random_tokens(rng, 30, 5);
    const AttentionInput a = testing::random_cls(rng, 2, 30);
    const auto q = testing::random_query(rng, 5);
    const PruneResult r = prune(t, a, q, config_with(8));
    const std::string text = explain(r, 30, 8);
    EXPECT_NE(text.find("K_F + K_S = "), std::string::npos);
    for (const char* section : {"[budget]", "[focus]", "[scan]", "[refine]", "[quality]"}) {
        EXPECT_NE(text.find(section), std::string::npos) << section;
    }
    const double recomputed = coverage_radius(t, r.kept_indices);
    ASSERT_TRUE(r.stats.coverage_radius.has_value());
    EXPECT_EQ(*r.stats.coverage_radius, recomputed);
    std::ostringstream expected;
    expected.precision(17);
    expected << "coverage_radius: " << recomputed;
    EXPECT_NE(text.find(expected.str()), std::string::npos);

    const PruneResult one = prune(t, a, q, config_with(1));
    EXPECT_NE(explain(one, 30, 1).find("status: skipped"), std::string::npos);
}

TEST(PipelineTest, NoStatsLeavesCoverageEmpty) {
    std::mt19937_64 rng(5);
    const TokenMatrix t = testing::random_tokens(rng, 12, 3);
    PruneConfig c = config_with(4);
    c.compute_stats = false;
    const PruneResult r = prune(t, testing::random_cls(rng, 1, 12), testing::random_query(rng, 3), c);
    EXPECT_FALSE(r.stats.coverage_radius.has_value());
    EXPECT_NE(explain(r, 12, 4).find("not computed"), std::string::npos);
}

TEST(PipelineTest, ConcentratedAttentionNeedsFewerFocusTokens) {
    double diffuse = 0.0, concentrated = 0.0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        synth::SceneParams p;
        p.n_clusters = 4;
        p.salient_fraction = 0.75;
        p.seed = seed;
        const auto a = synth::generate_scene(p);
        p.primary_boost = 1.0;
        const auto b = synth::generate_scene(p);
        PruneConfig c = config_with(32);
        c.relevance_mode = RelevanceMode::none;
        diffuse += static_cast<double>(prune(a.tokens, a.attn, std::nullopt, c).stats.k_f);
        concentrated += static_cast<double>(prune(b.tokens, b.attn, std::nullopt, c).stats.k_f);
    }
    EXPECT_LT(concentrated, diffuse);
}

TEST(PipelineTest, OriginRoundTrip) {
    EXPECT_EQ(parse_origin(to_string(Origin::focus)), Origin::focus);
    EXPECT_EQ(parse_origin(to_string(Origin::scan)), Origin::scan);
    EXPECT_THROW(parse_origin("other"), Error);
}

TEST(PipelineTest, PhiSummaryHistogramCountsEveryToken) {
    const PhiSummary s = summarize_phi({0.0, 0.05, 0.5, 1.0, 1.0});
    EXPECT_EQ(s.min, 0.0);
    EXPECT_EQ(s.max, 1.0);
    EXPECT_DOUBLE_EQ(s.mean, 2.55 / 5);
    std::size_t total = 0;
    for (std::size_t h : s.histogram) total += h;
    EXPECT_EQ(total, 5u);
    EXPECT_EQ(s.histogram[0], 2u);
    EXPECT_EQ(s.histogram[9], 2u);
}

}  // namespace
}  // namespace fsr
