// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#include "fsr/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace fsr {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_argument:
        return "invalid_argument";
    case ErrorCode::dimension_mismatch:
        return "dimension_mismatch";
    case ErrorCode::non_finite:
        return "non_finite";
    case ErrorCode::instance_too_large:
        return "instance_too_large";
    case ErrorCode::bad_magic:
        return "bad_magic";
    case ErrorCode::version_mismatch:
        return "version_mismatch";
    case ErrorCode::size_mismatch:
        return "size_mismatch";
    case ErrorCode::bad_kind:
        return "bad_kind";
    case ErrorCode::io_failure:
        return "io_failure";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      m_code(code) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : m_rows(rows),
      m_cols(cols),
      m_data(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : m_rows(rows),
      m_cols(cols),
      m_data(std::move(data)) {
    if (m_data.size() != rows * cols) {
        std::ostringstream msg;
        msg << "matrix " << rows << "x" << cols << " needs " << rows * cols << " values, got " << m_data.size();
        throw Error(ErrorCode::dimension_mismatch, msg.str());
    }
}

bool Matrix::all_finite() const {
    return std::all_of(m_data.begin(), m_data.end(), [](double v) { return std::isfinite(v); });
}

TokenMatrix::TokenMatrix(Matrix data) : m_data(std::move(data)) {
    if (m_data.rows() == 0 || m_data.cols() == 0) {
        throw Error(ErrorCode::invalid_argument, "token matrix needs N >= 1 and d >= 1");
    }
    if (!m_data.all_finite()) {
        throw Error(ErrorCode::non_finite, "token matrix has NaN or Inf entries");
    }
}

TokenMatrix::TokenMatrix(std::size_t n, std::size_t d, std::vector<double> values)
    : TokenMatrix(Matrix(n, d, std::move(values))) {}

IndexSet::IndexSet(std::vector<std::size_t> indices) : m_indices(std::move(indices)) {
    std::sort(m_indices.begin(), m_indices.end());
    if (std::adjacent_find(m_indices.begin(), m_indices.end()) != m_indices.end()) {
        throw Error(ErrorCode::invalid_argument, "index set contains duplicates");
    }
}

bool IndexSet::contains(std::size_t index) const {
    return std::binary_search(m_indices.begin(), m_indices.end(), index);
}

void IndexSet::check_bounds(std::size_t n) const {
    if (!m_indices.empty() && m_indices.back() >= n) {
        std::ostringstream msg;
        msg << "index " << m_indices.back() << " out of range for " << n << " tokens";
        throw Error(ErrorCode::invalid_argument, msg.str());
    }
}

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
    std::vector<std::size_t> merged;
    merged.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged));
    return IndexSet(std::move(merged));
}

IndexSet complement(const IndexSet& excluded, std::size_t n) {
    std::vector<std::size_t> rest;
    rest.reserve(n - std::min(n, excluded.size()));
    for (std::size_t i = 0; i < n; ++i) {
        if (!excluded.contains(i)) {
            rest.push_back(i);
        }
    }
    return IndexSet(std::move(rest));
}

const char* to_string(SaliencyMode mode) {
    return mode == SaliencyMode::cls_attention ? "cls_attention" : "self_attention_aggregate";
}

const char* to_string(RelevanceMode mode) {
    return mode == RelevanceMode::query ? "query" : "none";
}

SaliencyMode parse_saliency_mode(const std::string& text) {
    if (text == "cls_attention" || text == "cls") {
        return SaliencyMode::cls_attention;
    }
    if (text == "self_attention_aggregate" || text == "self") {
        return SaliencyMode::self_attention_aggregate;
    }
    throw Error(ErrorCode::invalid_argument, "unknown saliency mode '" + text + "'");
}

void PruneConfig::validate() const {
    if (budget_K < 1) {
        throw Error(ErrorCode::invalid_argument, "budget_K must be >= 1");
    }
    if (!(alpha >= 0.0) || !(beta >= 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw Error(ErrorCode::invalid_argument, "alpha and beta must be finite and >= 0");
    }
    if (!(rho >= 0.0 && rho <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "rho must lie in [0, 1]");
    }
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
        throw Error(ErrorCode::invalid_argument, "kappa must be finite and >= 0");
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        acc += a[k] * b[k];
    }
    return acc;
}

double l2_norm(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

namespace {

void check_pair(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        std::ostringstream msg;
        msg << "vector lengths differ: " << a.size() << " vs " << b.size();
        throw Error(ErrorCode::dimension_mismatch, msg.str());
    }
    require_finite(a, "cosine input");
    require_finite(b, "cosine input");
}

}  // namespace

double cosine_similarity_with_norms(std::span<const double> a, std::span<const double> b, double norm_a,
                                    double norm_b) {
    if (norm_a == 0.0 || norm_b == 0.0) {
        return 0.0;
    }
    const double c = dot(a, b) / (norm_a * norm_b);
    return std::clamp(c, -1.0, 1.0);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    check_pair(a, b);
    return cosine_similarity_with_norms(a, b, l2_norm(a), l2_norm(b));
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    return 1.0 - cosine_similarity(a, b);
}

std::vector<double> row_norms(const TokenMatrix& tokens) {
    std::vector<double> norms(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        norms[i] = l2_norm(tokens.row(i));
    }
    return norms;
}

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::non_finite, std::string(what) + " contains NaN or Inf");
        }
    }
}

ScoreVector min_max_normalize(const ScoreVector& scores) {
    if (scores.empty()) {
        throw Error(ErrorCode::invalid_argument, "cannot normalize an empty score vector");
    }
    require_finite(scores, "score vector");
    const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    ScoreVector out(scores.size(), 1.0);
    if (hi == lo) {
        return out;
    }
    const double span = hi - lo;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::clamp((scores[i] - lo) / span, 0.0, 1.0);
    }
    return out;
}

std::vector<std::size_t> stable_argsort_desc(const ScoreVector& scores) {
    require_finite(scores, "score vector");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

unsigned resolve_thread_count(unsigned requested) {
    if (requested != 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::size_t chunk_count(std::size_t n, unsigned threads, std::size_t min_chunk) {
    if (n == 0) {
        return 0;
    }
    const std::size_t by_size = std::max<std::size_t>(1, n / std::max<std::size_t>(1, min_chunk));
    return std::min<std::size_t>(std::max(1u, threads), by_size);
}

void parallel_for_chunks(std::size_t n, unsigned threads, std::size_t min_chunk,
                         const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    const std::size_t chunks = chunk_count(n, threads, min_chunk);
    if (chunks == 0) {
        return;
    }
    if (chunks == 1) {
        body(0, n, 0);
        return;
    }
    const std::size_t base = n / chunks;
    const std::size_t extra = n % chunks;
    auto bounds = [&](std::size_t c) {
        const std::size_t begin = c * base + std::min(c, extra);
        return std::pair{begin, begin + base + (c < extra ? 1 : 0)};
    };
    std::vector<std::thread> workers;
    workers.reserve(chunks - 1);
    for (std::size_t c = 1; c < chunks; ++c) {
        const auto [b, e] = bounds(c);
        workers.emplace_back([&body, b = b, e = e, c] { body(b, e, c); });
    }
    const auto [b0, e0] = bounds(0);
    body(b0, e0, 0);
    for (auto& w : workers) {
        w.join();
    }
}

}  // namespace fsr
