// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "fsr/core.hpp"

namespace fsr {

/// Attention statistics for the saliency pathway.
///
/// In `cls_attention` mode `weights` is H x N: row h holds head h's attention from
/// [CLS] to each visual token. In `self_attention_aggregate` mode it is the
/// head-aggregated N x N self-attention map among visual tokens. Entries must be
/// finite and nonnegative; rows need not sum to one.
struct AttentionInput {
    SaliencyMode mode = SaliencyMode::cls_attention;
    Matrix weights;

    static AttentionInput cls(Matrix rows);
    static AttentionInput self_attention(Matrix map);

    /// Number of tokens the map scores.
    std::size_t token_count() const noexcept { return weights.cols(); }
    void validate() const;
};

/// Text-query embedding in the token feature space (the caller projects if needed).
struct QueryEmbedding {
    std::vector<double> vector;
};

struct FocusResult {
    ScoreVector phi;
    /// Stable descending order of phi.
    std::vector<std::size_t> permutation;
    /// Smallest prefix reaching rho * Z, before capping at the budget.
    std::size_t k_f_uncapped = 0;
    std::size_t k_f = 0;
    IndexSet focus_set;
};

/// Mean over heads of the [CLS] attention row.
ScoreVector compute_saliency_cls(const AttentionInput& attn);

/// Column mean of the self-attention map (attention received by each token).
ScoreVector compute_saliency_selfattn(const AttentionInput& attn);

/// Dispatches on `attn.mode`.
ScoreVector compute_saliency(const AttentionInput& attn);

/// Cosine similarity of every token row to the query.
ScoreVector compute_relevance(const TokenMatrix& tokens, const QueryEmbedding& query, unsigned threads = 1);

/// Product step on already-normalized scores: r_hat^alpha * s_hat^beta, 0^0 = 1.
/// An absent `r_hat` contributes the constant factor 1.
ScoreVector fuse_normalized(const std::optional<ScoreVector>& r_hat, const ScoreVector& s_hat, double alpha,
                            double beta);

/// phi_i = r_hat_i^alpha * s_hat_i^beta over min-max normalized inputs, with 0^0 = 1.
/// An absent relevance vector contributes the constant factor 1.
ScoreVector fuse_priorities(const std::optional<ScoreVector>& relevance, const ScoreVector& saliency, double alpha,
                            double beta);

/// Smallest k >= 1 whose stable-descending prefix sum of phi reaches rho * Z.
/// Z is accumulated in the same order, so rho = 1 is always reachable. Z = 0 gives 1.
std::size_t focus_budget_uncapped(const ScoreVector& phi, double rho);

/// `focus_budget_uncapped` capped at `budget_K`.
std::size_t dynamic_focus_budget(const ScoreVector& phi, double rho, std::size_t budget_K);

/// Saliency, relevance, fusion and the dynamic budget in one pass.
/// Requires budget_K <= N; `query` is mandatory when relevance_mode is `query`.
FocusResult select_focus(const TokenMatrix& tokens, const AttentionInput& attn,
                         const std::optional<QueryEmbedding>& query, const PruneConfig& config);

/// phi only (no budget). Shared by `select_focus` and the evaluation metrics.
ScoreVector compute_priorities(const TokenMatrix& tokens, const AttentionInput& attn,
                               const std::optional<QueryEmbedding>& query, const PruneConfig& config);

}  // namespace fsr
