// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#include "fsr/refine.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace fsr {

std::vector<RefineAssignment> assign_nearest_anchor(const IndexSet& discarded, const IndexSet& scan,
                                                    const TokenMatrix& tokens, unsigned threads) {
    discarded.check_bounds(tokens.size());
    scan.check_bounds(tokens.size());
    if (scan.empty()) {
        return {};
    }
    const std::vector<double> norms = row_norms(tokens);
    std::vector<RefineAssignment> out(discarded.size());
    parallel_for_chunks(discarded.size(), resolve_thread_count(threads), 128,
                        [&](std::size_t begin, std::size_t end, std::size_t) {
                            for (std::size_t k = begin; k < end; ++k) {
                                const std::size_t i = discarded[k];
                                RefineAssignment best{i, scan[0], -2.0};
                                // Ascending anchor order plus strict '>' keeps the smaller index on ties.
                                for (std::size_t j : scan) {
                                    const double sim =
                                        cosine_similarity_with_norms(tokens.row(i), tokens.row(j), norms[i], norms[j]);
                                    if (sim > best.similarity) {
                                        best.anchor_index = j;
                                        best.similarity = sim;
                                    }
                                }
                                out[k] = best;
                            }
                        });
    return out;
}

std::size_t merge_budget(double kappa, std::size_t scan_size, std::size_t available) {
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
        throw Error(ErrorCode::invalid_argument, "kappa must be finite and >= 0");
    }
    const double m = std::floor(kappa * static_cast<double>(scan_size));
    if (m >= static_cast<double>(available)) {
        return available;
    }
    return static_cast<std::size_t>(m);
}

IndexSet select_top_m(const std::vector<RefineAssignment>& assignments, double kappa, std::size_t scan_size) {
    const std::size_t m = merge_budget(kappa, scan_size, assignments.size());
    std::vector<RefineAssignment> ranked = assignments;
    std::sort(ranked.begin(), ranked.end(), [](const RefineAssignment& a, const RefineAssignment& b) {
        if (a.similarity != b.similarity) {
            return a.similarity > b.similarity;
        }
        return a.discarded_index < b.discarded_index;
    });
    std::vector<std::size_t> top;
    top.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        top.push_back(ranked[k].discarded_index);
    }
    return IndexSet(std::move(top));
}

RefinedTokens weighted_merge(const IndexSet& scan, const IndexSet& d_top,
                             const std::vector<RefineAssignment>& assignments, const ScoreVector& phi,
                             const TokenMatrix& tokens) {
    if (phi.size() != tokens.size()) {
        throw Error(ErrorCode::dimension_mismatch, "priority vector length differs from token count");
    }
    scan.check_bounds(tokens.size());
    d_top.check_bounds(tokens.size());

    const std::size_t d = tokens.dim();
    RefinedTokens out;
    out.vectors = Matrix(scan.size(), d);
    out.weights.resize(scan.size());
    out.member_lists.resize(scan.size());

    std::unordered_map<std::size_t, std::size_t> slot_of;
    for (std::size_t j = 0; j < scan.size(); ++j) {
        slot_of.emplace(scan[j], j);
        const auto src = tokens.row(scan[j]);
        std::copy(src.begin(), src.end(), out.vectors.row(j).begin());
        out.weights[j] = phi[scan[j]];
    }

    std::unordered_map<std::size_t, std::size_t> anchor_of;
    for (const RefineAssignment& a : assignments) {
        anchor_of.emplace(a.discarded_index, a.anchor_index);
    }

    for (std::size_t i : d_top) {
        const auto assigned = anchor_of.find(i);
        if (assigned == anchor_of.end()) {
            throw Error(ErrorCode::invalid_argument, "merge member has no anchor assignment");
        }
        const auto slot = slot_of.find(assigned->second);
        if (slot == slot_of.end()) {
            throw Error(ErrorCode::invalid_argument, "merge member assigned to a token outside the scan set");
        }
        if (scan.contains(i)) {
            throw Error(ErrorCode::invalid_argument, "scan anchors cannot be merged into each other");
        }
        const std::size_t j = slot->second;
        const double w_anchor = out.weights[j];
        const double w_member = phi[i];
        const double total = w_anchor + w_member;
        out.member_lists[j].push_back(i);
        if (total == 0.0) {
            continue;
        }
        auto v = out.vectors.row(j);
        const auto member = tokens.row(i);
        for (std::size_t k = 0; k < d; ++k) {
            v[k] = (w_anchor * v[k] + w_member * member[k]) / total;
        }
        out.weights[j] = total;
    }
    return out;
}

}  // namespace fsr
