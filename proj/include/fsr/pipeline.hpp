// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>

#include "fsr/core.hpp"
#include "fsr/focus.hpp"

namespace fsr {

enum class Origin : std::uint8_t { focus, scan };

const char* to_string(Origin origin);
Origin parse_origin(const std::string& text);

struct PruneStats {
    std::size_t k_f = 0;
    std::size_t k_f_uncapped = 0;
    std::size_t k_s = 0;
    std::size_t m = 0;
    /// Over the selected tokens' original rows; absent when stats are disabled.
    std::optional<double> coverage_radius;
    /// Sum of phi over kept tokens divided by Z (1 when Z is 0).
    double retained_priority_mass = 0.0;

    friend bool operator==(const PruneStats&, const PruneStats&) = default;
};

/// Output of one prune call. Every per-kept-token array follows `kept_indices`.
struct PruneResult {
    IndexSet kept_indices;
    Matrix kept_vectors;
    std::vector<Origin> origins;
    std::vector<double> weights;
    PruneStats stats;

    ScoreVector phi;
    std::vector<std::size_t> scan_order;
    std::vector<double> gain_sequence;
    /// Discarded tokens absorbed by each kept token (always empty for focus tokens).
    std::vector<std::vector<std::size_t>> members;
    bool passthrough = false;

    friend bool operator==(const PruneResult&, const PruneResult&) = default;
};

/// Focus -> Scan -> Refine under budget K. Returns min(K, N) tokens in ascending
/// original order. K >= N passes every token through unchanged.
PruneResult prune(const TokenMatrix& tokens, const AttentionInput& attn, const std::optional<QueryEmbedding>& query,
                  const PruneConfig& config);

inline constexpr std::size_t kPhiHistogramBins = 10;

struct PhiSummary {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    /// Counts over [0, 1] in equal-width bins; the last bin is closed.
    std::array<std::size_t, kPhiHistogramBins> histogram{};

    friend bool operator==(const PhiSummary&, const PhiSummary&) = default;
};

PhiSummary summarize_phi(const ScoreVector& phi);

/// The persisted view of a prune run, enough to regenerate the explain report.
struct PruneSummary {
    std::size_t token_count = 0;
    std::size_t budget_K = 0;
    std::vector<std::size_t> kept_indices;
    std::vector<Origin> origins;
    std::vector<double> weights;
    PruneStats stats;
    std::vector<std::size_t> scan_order;
    std::vector<double> gain_sequence;
    PhiSummary phi;
    bool passthrough = false;

    friend bool operator==(const PruneSummary&, const PruneSummary&) = default;
};

PruneSummary summarize(const PruneResult& result, std::size_t token_count, std::size_t budget_K);

/// Human-readable per-stage breakdown.
std::string explain(const PruneSummary& summary);
std::string explain(const PruneResult& result, std::size_t token_count, std::size_t budget_K);

}  // namespace fsr
