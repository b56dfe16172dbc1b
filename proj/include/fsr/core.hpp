// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsr {

enum class ErrorCode {
    invalid_argument,
    dimension_mismatch,
    non_finite,
    instance_too_large,
    bad_magic,
    version_mismatch,
    size_mismatch,
    bad_kind,
    io_failure,
};

const char* to_string(ErrorCode code);

/// Single exception type for the engine; `code()` distinguishes the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return m_code; }

private:
    ErrorCode m_code;
};

/// Dense row-major matrix of doubles. Carries no invariants beyond rows*cols == size.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const noexcept { return m_rows; }
    std::size_t cols() const noexcept { return m_cols; }
    bool empty() const noexcept { return m_data.empty(); }

    std::span<const double> row(std::size_t i) const { return {m_data.data() + i * m_cols, m_cols}; }
    std::span<double> row(std::size_t i) { return {m_data.data() + i * m_cols, m_cols}; }

    double operator()(std::size_t i, std::size_t j) const { return m_data[i * m_cols + j]; }
    double& operator()(std::size_t i, std::size_t j) { return m_data[i * m_cols + j]; }

    const std::vector<double>& data() const noexcept { return m_data; }

    bool all_finite() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t m_rows = 0;
    std::size_t m_cols = 0;
    std::vector<double> m_data;
};

/// N x d token embeddings, one row per visual token in original spatial order.
/// Construction enforces N >= 1, d >= 1 and finite entries.
class TokenMatrix {
public:
    explicit TokenMatrix(Matrix data);
    TokenMatrix(std::size_t n, std::size_t d, std::vector<double> values);

    std::size_t size() const noexcept { return m_data.rows(); }
    std::size_t dim() const noexcept { return m_data.cols(); }
    std::span<const double> row(std::size_t i) const { return m_data.row(i); }
    const Matrix& matrix() const noexcept { return m_data; }

    friend bool operator==(const TokenMatrix&, const TokenMatrix&) = default;

private:
    Matrix m_data;
};

/// One scalar per token (s, r, their normalized forms, or fused priorities).
using ScoreVector = std::vector<double>;

/// Distinct token indices kept in ascending order.
class IndexSet {
public:
    IndexSet() = default;
    /// Sorts the input; throws on duplicates.
    explicit IndexSet(std::vector<std::size_t> indices);

    std::size_t size() const noexcept { return m_indices.size(); }
    bool empty() const noexcept { return m_indices.empty(); }
    bool contains(std::size_t index) const;
    std::size_t operator[](std::size_t i) const { return m_indices[i]; }
    auto begin() const noexcept { return m_indices.begin(); }
    auto end() const noexcept { return m_indices.end(); }
    const std::vector<std::size_t>& indices() const noexcept { return m_indices; }

    /// Throws unless every index is < n.
    void check_bounds(std::size_t n) const;

    friend bool operator==(const IndexSet&, const IndexSet&) = default;

private:
    std::vector<std::size_t> m_indices;
};

IndexSet set_union(const IndexSet& a, const IndexSet& b);
/// Indices of [0, n) not present in `excluded`.
IndexSet complement(const IndexSet& excluded, std::size_t n);

enum class SaliencyMode { cls_attention, self_attention_aggregate };
enum class RelevanceMode { query, none };

const char* to_string(SaliencyMode mode);
const char* to_string(RelevanceMode mode);
SaliencyMode parse_saliency_mode(const std::string& text);

struct PruneConfig {
    std::size_t budget_K = 64;
    double alpha = 3.0;
    double beta = 1.0;
    double rho = 0.9;
    double kappa = 1.0;
    SaliencyMode saliency_mode = SaliencyMode::cls_attention;
    RelevanceMode relevance_mode = RelevanceMode::query;
    /// Coverage radius is O(N*K*d); throughput runs may switch it off.
    bool compute_stats = true;
    /// 0 selects std::thread::hardware_concurrency().
    unsigned num_threads = 1;

    void validate() const;
};

// ---------------------------------------------------------------------------
// Vector geometry. Zero-norm inputs have cosine 0 (distance 1) with everything.

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);

double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_distance(std::span<const double> a, std::span<const double> b);

/// Cosine with caller-supplied norms. `cosine_similarity` is defined through this,
/// so cached-norm callers get bit-identical values.
double cosine_similarity_with_norms(std::span<const double> a, std::span<const double> b, double norm_a,
                                    double norm_b);

/// Per-row L2 norms of a token matrix.
std::vector<double> row_norms(const TokenMatrix& tokens);

// ---------------------------------------------------------------------------
// Score utilities.

/// (x - min) / (max - min); a constant vector maps to all ones.
ScoreVector min_max_normalize(const ScoreVector& scores);

/// Descending by score, ties by ascending index.
std::vector<std::size_t> stable_argsort_desc(const ScoreVector& scores);

void require_finite(std::span<const double> values, const char* what);

// ---------------------------------------------------------------------------
// Threading.

unsigned resolve_thread_count(unsigned requested);

/// Splits [0, n) into contiguous chunks and runs `body(begin, end, chunk)` on up to
/// `threads` workers. Chunk boundaries depend only on (n, threads, min_chunk) so
/// callers can reduce per-chunk results in a fixed order.
void parallel_for_chunks(std::size_t n, unsigned threads, std::size_t min_chunk,
                         const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

/// Number of chunks `parallel_for_chunks` will use for the same arguments.
std::size_t chunk_count(std::size_t n, unsigned threads, std::size_t min_chunk);

}  // namespace fsr
