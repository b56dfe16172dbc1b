// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "fsr/core.hpp"

namespace fsr {

struct ScanResult {
    IndexSet scan_set;
    /// Indices in the order the greedy loop picked them.
    std::vector<std::size_t> selection_order;
    /// Distance of each pick to the anchor set at the time it was picked. Non-increasing.
    std::vector<double> gain_sequence;
};

struct CoverageReport {
    double radius = 0.0;
    std::optional<double> optimal_radius;
};

/// Exhaustive search refuses instances with more candidate subsets than this.
inline constexpr std::uint64_t kMaxOracleCombinations = 1'000'000;

/// min over anchors j of cosine_distance(v_i, v_j).
double min_distance_to_set(std::size_t i, const IndexSet& anchors, const TokenMatrix& tokens);

/// Farthest-first extension of `focus` by `k_s` anchors under cosine distance.
///
/// Each round picks the token outside the current anchor set with the largest
/// distance to it (ties to the lower index). A running per-token minimum is kept
/// and refreshed against only the newest anchor, so a call costs O(k_s * N * d).
/// An empty `focus` is seeded with token 0, which becomes the first scan pick with
/// its gain recorded as 2 (the cosine-distance upper bound).
ScanResult conditional_context_sampling(const TokenMatrix& tokens, const IndexSet& focus, std::size_t k_s,
                                        unsigned threads = 1);

/// max over tokens of the min cosine distance to `selected`.
double coverage_radius(const TokenMatrix& tokens, const IndexSet& selected, unsigned threads = 1);

/// Exact min over all size-k_s extensions S' (drawn from tokens outside `focus`)
/// of coverage_radius(focus u S'). Throws `instance_too_large` past
/// `kMaxOracleCombinations` subsets.
double optimal_covering_radius(const TokenMatrix& tokens, const IndexSet& focus, std::size_t k_s);

/// C(n, k) saturating at UINT64_MAX.
std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k);

}  // namespace fsr
