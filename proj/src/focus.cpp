// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#include "fsr/focus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fsr {

AttentionInput AttentionInput::cls(Matrix rows) {
    AttentionInput attn{SaliencyMode::cls_attention, std::move(rows)};
    attn.validate();
    return attn;
}

AttentionInput AttentionInput::self_attention(Matrix map) {
    AttentionInput attn{SaliencyMode::self_attention_aggregate, std::move(map)};
    attn.validate();
    return attn;
}

void AttentionInput::validate() const {
    if (weights.rows() == 0 || weights.cols() == 0) {
        throw Error(ErrorCode::invalid_argument, "attention map is empty");
    }
    if (mode == SaliencyMode::self_attention_aggregate && weights.rows() != weights.cols()) {
        std::ostringstream msg;
        msg << "self-attention map must be square, got " << weights.rows() << "x" << weights.cols();
        throw Error(ErrorCode::dimension_mismatch, msg.str());
    }
    for (double v : weights.data()) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::non_finite, "attention map contains NaN or Inf");
        }
        if (v < 0.0) {
            throw Error(ErrorCode::invalid_argument, "attention weights must be nonnegative");
        }
    }
}

namespace {

ScoreVector column_mean(const Matrix& m) {
    ScoreVector out(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out[c] += row[c];
        }
    }
    const double inv = 1.0 / static_cast<double>(m.rows());
    for (double& v : out) {
        v *= inv;
    }
    return out;
}

}  // namespace

ScoreVector compute_saliency_cls(const AttentionInput& attn) {
    if (attn.mode != SaliencyMode::cls_attention) {
        throw Error(ErrorCode::invalid_argument, "expected a [CLS] attention input");
    }
    attn.validate();
    return column_mean(attn.weights);
}

ScoreVector compute_saliency_selfattn(const AttentionInput& attn) {
    if (attn.mode != SaliencyMode::self_attention_aggregate) {
        throw Error(ErrorCode::invalid_argument, "expected a self-attention input");
    }
    attn.validate();
    return column_mean(attn.weights);
}

ScoreVector compute_saliency(const AttentionInput& attn) {
    return attn.mode == SaliencyMode::cls_attention ? compute_saliency_cls(attn) : compute_saliency_selfattn(attn);
}

ScoreVector compute_relevance(const TokenMatrix& tokens, const QueryEmbedding& query, unsigned threads) {
    if (query.vector.size() != tokens.dim()) {
        std::ostringstream msg;
        msg << "query has dimension " << query.vector.size() << ", tokens have " << tokens.dim();
        throw Error(ErrorCode::dimension_mismatch, msg.str());
    }
    require_finite(query.vector, "query embedding");
    const std::span<const double> t(query.vector);
    const double t_norm = l2_norm(t);
    ScoreVector r(tokens.size());
    parallel_for_chunks(tokens.size(), resolve_thread_count(threads), 256,
                        [&](std::size_t begin, std::size_t end, std::size_t) {
                            for (std::size_t i = begin; i < end; ++i) {
                                const auto v = tokens.row(i);
                                r[i] = cosine_similarity_with_norms(v, t, l2_norm(v), t_norm);
                            }
                        });
    return r;
}

ScoreVector fuse_normalized(const std::optional<ScoreVector>& r_hat, const ScoreVector& s_hat, double alpha,
                            double beta) {
    if (alpha < 0.0 || beta < 0.0) {
        throw Error(ErrorCode::invalid_argument, "fusion exponents must be nonnegative");
    }
    if (r_hat && r_hat->size() != s_hat.size()) {
        throw Error(ErrorCode::dimension_mismatch, "relevance and saliency lengths differ");
    }
    // std::pow(0, 0) == 1, which is the convention we want for disabled pathways.
    ScoreVector phi(s_hat.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double relevance_term = r_hat ? std::pow((*r_hat)[i], alpha) : 1.0;
        phi[i] = relevance_term * std::pow(s_hat[i], beta);
    }
    return phi;
}

ScoreVector fuse_priorities(const std::optional<ScoreVector>& relevance, const ScoreVector& saliency, double alpha,
                            double beta) {
    if (relevance && relevance->size() != saliency.size()) {
        throw Error(ErrorCode::dimension_mismatch, "relevance and saliency lengths differ");
    }
    std::optional<ScoreVector> r_hat;
    if (relevance) {
        r_hat = min_max_normalize(*relevance);
    }
    return fuse_normalized(r_hat, min_max_normalize(saliency), alpha, beta);
}

std::size_t focus_budget_uncapped(const ScoreVector& phi, double rho) {
    if (phi.empty()) {
        throw Error(ErrorCode::invalid_argument, "empty priority vector");
    }
    if (!(rho >= 0.0 && rho <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "rho must lie in [0, 1]");
    }
    const auto order = stable_argsort_desc(phi);
    double z = 0.0;
    for (std::size_t idx : order) {
        if (phi[idx] < 0.0) {
            throw Error(ErrorCode::invalid_argument, "priorities must be nonnegative");
        }
        z += phi[idx];
    }
    if (z == 0.0) {
        return 1;
    }
    const double threshold = rho * z;
    double prefix = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        prefix += phi[order[k]];
        if (prefix >= threshold) {
            return k + 1;
        }
    }
    return order.size();
}

std::size_t dynamic_focus_budget(const ScoreVector& phi, double rho, std::size_t budget_K) {
    if (budget_K < 1) {
        throw Error(ErrorCode::invalid_argument, "budget_K must be >= 1");
    }
    return std::min(focus_budget_uncapped(phi, rho), budget_K);
}

ScoreVector compute_priorities(const TokenMatrix& tokens, const AttentionInput& attn,
                               const std::optional<QueryEmbedding>& query, const PruneConfig& config) {
    if (attn.mode != config.saliency_mode) {
        throw Error(ErrorCode::invalid_argument, std::string("attention input is ") + to_string(attn.mode) +
                                                     " but config expects " + to_string(config.saliency_mode));
    }
    const ScoreVector saliency = compute_saliency(attn);
    if (saliency.size() != tokens.size()) {
        std::ostringstream msg;
        msg << "attention scores " << saliency.size() << " tokens, matrix has " << tokens.size();
        throw Error(ErrorCode::dimension_mismatch, msg.str());
    }
    std::optional<ScoreVector> relevance;
    if (config.relevance_mode == RelevanceMode::query) {
        if (!query) {
            throw Error(ErrorCode::invalid_argument, "relevance mode 'query' needs a query embedding");
        }
        if (l2_norm(query->vector) == 0.0) {
            throw Error(ErrorCode::invalid_argument, "query embedding has zero norm");
        }
        relevance = compute_relevance(tokens, *query, config.num_threads);
    }
    return fuse_priorities(relevance, saliency, config.alpha, config.beta);
}

FocusResult select_focus(const TokenMatrix& tokens, const AttentionInput& attn,
                         const std::optional<QueryEmbedding>& query, const PruneConfig& config) {
    config.validate();
    if (config.budget_K > tokens.size()) {
        std::ostringstream msg;
        msg << "budget " << config.budget_K << " exceeds token count " << tokens.size();
        throw Error(ErrorCode::invalid_argument, msg.str());
    }
    FocusResult result;
    result.phi = compute_priorities(tokens, attn, query, config);
    result.permutation = stable_argsort_desc(result.phi);
    result.k_f_uncapped = focus_budget_uncapped(result.phi, config.rho);
    result.k_f = std::min(result.k_f_uncapped, config.budget_K);
    result.focus_set =
        IndexSet(std::vector<std::size_t>(result.permutation.begin(), result.permutation.begin() + result.k_f));
    return result;
}

}  // namespace fsr
