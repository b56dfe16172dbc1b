// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "fsr/core.hpp"

namespace fsr {

struct RefineAssignment {
    std::size_t discarded_index = 0;
    std::size_t anchor_index = 0;
    double similarity = 0.0;
};

/// Scan anchors after absorbing their nearest discarded tokens.
/// Row j of `vectors` (and `weights[j]`, `member_lists[j]`) belongs to the j-th
/// smallest index of the scan set.
struct RefinedTokens {
    Matrix vectors;
    std::vector<double> weights;
    std::vector<std::vector<std::size_t>> member_lists;
};

/// Nearest scan anchor by cosine similarity for each discarded token, ties to the
/// smaller anchor index. Returns no assignments when `scan` is empty: refinement is
/// skipped, not failed.
std::vector<RefineAssignment> assign_nearest_anchor(const IndexSet& discarded, const IndexSet& scan,
                                                    const TokenMatrix& tokens, unsigned threads = 1);

/// Number of merges allowed: min(floor(kappa * scan_size), available).
std::size_t merge_budget(double kappa, std::size_t scan_size, std::size_t available);

/// The M assignments most similar to their assigned anchor, M = merge_budget(...).
/// Ties go to the smaller discarded index.
IndexSet select_top_m(const std::vector<RefineAssignment>& assignments, double kappa, std::size_t scan_size);

/// Running priority-weighted averaging of each `d_top` member into its anchor,
/// applied in ascending discarded-index order. Weights start at phi. A group whose
/// accumulated weight stays 0 keeps the anchor row unchanged.
RefinedTokens weighted_merge(const IndexSet& scan, const IndexSet& d_top,
                             const std::vector<RefineAssignment>& assignments, const ScoreVector& phi,
                             const TokenMatrix& tokens);

}  // namespace fsr
