// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#include "fsr/scan.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace fsr {

namespace {

constexpr std::size_t kMinChunk = 128;
constexpr double kMaxCosineDistance = 2.0;

struct Candidate {
    double distance = -1.0;
    std::size_t index = std::numeric_limits<std::size_t>::max();
};

// Larger distance wins; equal distances go to the lower index.
bool better(const Candidate& a, const Candidate& b) {
    return a.distance > b.distance || (a.distance == b.distance && a.index < b.index);
}

double distance_with_norms(const TokenMatrix& tokens, const std::vector<double>& norms, std::size_t i,
                           std::size_t j) {
    return 1.0 - cosine_similarity_with_norms(tokens.row(i), tokens.row(j), norms[i], norms[j]);
}

}  // namespace

double min_distance_to_set(std::size_t i, const IndexSet& anchors, const TokenMatrix& tokens) {
    if (anchors.empty()) {
        throw Error(ErrorCode::invalid_argument, "anchor set is empty");
    }
    anchors.check_bounds(tokens.size());
    if (i >= tokens.size()) {
        throw Error(ErrorCode::invalid_argument, "token index out of range");
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j : anchors) {
        best = std::min(best, cosine_distance(tokens.row(i), tokens.row(j)));
    }
    return best;
}

ScanResult conditional_context_sampling(const TokenMatrix& tokens, const IndexSet& focus, std::size_t k_s,
                                        unsigned threads) {
    const std::size_t n = tokens.size();
    focus.check_bounds(n);
    if (k_s > n - focus.size()) {
        std::ostringstream msg;
        msg << "cannot scan " << k_s << " tokens: only " << n - focus.size() << " lie outside the focus set";
        throw Error(ErrorCode::invalid_argument, msg.str());
    }

    ScanResult result;
    if (k_s == 0) {
        return result;
    }
    result.selection_order.reserve(k_s);
    result.gain_sequence.reserve(k_s);

    const unsigned workers = resolve_thread_count(threads);
    const std::vector<double> norms = row_norms(tokens);
    std::vector<char> in_anchor(n, 0);
    std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());

    auto absorb = [&](std::size_t anchor) {
        in_anchor[anchor] = 1;
        parallel_for_chunks(n, workers, kMinChunk, [&](std::size_t begin, std::size_t end, std::size_t) {
            for (std::size_t i = begin; i < end; ++i) {
                if (!in_anchor[i]) {
                    min_dist[i] = std::min(min_dist[i], distance_with_norms(tokens, norms, i, anchor));
                }
            }
        });
    };

    std::size_t remaining = k_s;
    if (focus.empty()) {
        absorb(0);
        result.selection_order.push_back(0);
        result.gain_sequence.push_back(kMaxCosineDistance);
        --remaining;
    } else {
        for (std::size_t j : focus) {
            absorb(j);
        }
    }

    const std::size_t chunks = chunk_count(n, workers, kMinChunk);
    std::vector<Candidate> partial(std::max<std::size_t>(1, chunks));
    for (; remaining > 0; --remaining) {
        std::fill(partial.begin(), partial.end(), Candidate{});
        parallel_for_chunks(n, workers, kMinChunk, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
            Candidate best;
            for (std::size_t i = begin; i < end; ++i) {
                if (!in_anchor[i] && better(Candidate{min_dist[i], i}, best)) {
                    best = Candidate{min_dist[i], i};
                }
            }
            partial[chunk] = best;
        });
        Candidate pick;
        for (const Candidate& c : partial) {
            if (better(c, pick)) {
                pick = c;
            }
        }
        result.selection_order.push_back(pick.index);
        result.gain_sequence.push_back(pick.distance);
        absorb(pick.index);
    }
    result.scan_set = IndexSet(result.selection_order);
    return result;
}

double coverage_radius(const TokenMatrix& tokens, const IndexSet& selected, unsigned threads) {
    if (selected.empty()) {
        throw Error(ErrorCode::invalid_argument, "coverage radius of an empty selection");
    }
    selected.check_bounds(tokens.size());
    const std::vector<double> norms = row_norms(tokens);
    const unsigned workers = resolve_thread_count(threads);
    const std::size_t chunks = chunk_count(tokens.size(), workers, kMinChunk);
    std::vector<double> partial(chunks, 0.0);
    parallel_for_chunks(tokens.size(), workers, kMinChunk, [&](std::size_t begin, std::size_t end, std::size_t c) {
        double worst = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            // Selected tokens cover themselves, zero rows included.
            if (selected.contains(i)) {
                continue;
            }
            double nearest = std::numeric_limits<double>::infinity();
            for (std::size_t j : selected) {
                nearest = std::min(nearest, distance_with_norms(tokens, norms, i, j));
            }
            worst = std::max(worst, nearest);
        }
        partial[c] = worst;
    });
    return *std::max_element(partial.begin(), partial.end());
}

std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k) {
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    std::uint64_t acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // acc * (n - k + i) / i stays integral at every step.
        const std::uint64_t factor = n - k + i;
        if (acc > std::numeric_limits<std::uint64_t>::max() / factor) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        acc = acc * factor / i;
    }
    return acc;
}

double optimal_covering_radius(const TokenMatrix& tokens, const IndexSet& focus, std::size_t k_s) {
    const std::size_t n = tokens.size();
    focus.check_bounds(n);
    const IndexSet candidates = complement(focus, n);
    if (k_s > candidates.size()) {
        throw Error(ErrorCode::invalid_argument, "extension larger than the non-focus token count");
    }
    const std::uint64_t combos = binomial_saturating(candidates.size(), k_s);
    if (combos > kMaxOracleCombinations) {
        std::ostringstream msg;
        msg << "exhaustive search needs C(" << candidates.size() << ", " << k_s << ") = " << combos
            << " subsets, limit is " << kMaxOracleCombinations;
        throw Error(ErrorCode::instance_too_large, msg.str());
    }
    if (focus.empty() && k_s == 0) {
        throw Error(ErrorCode::invalid_argument, "covering radius of an empty selection");
    }

    const std::vector<double> norms = row_norms(tokens);
    Matrix dist(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            dist(i, j) = distance_with_norms(tokens, norms, i, j);
        }
    }
    std::vector<double> to_focus(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        if (focus.contains(i)) {
            to_focus[i] = 0.0;
            continue;
        }
        for (std::size_t j : focus) {
            to_focus[i] = std::min(to_focus[i], dist(i, j));
        }
    }

    // Lexicographic walk over k_s-subsets of the candidate positions.
    std::vector<std::size_t> pick(k_s);
    for (std::size_t t = 0; t < k_s; ++t) {
        pick[t] = t;
    }
    const std::size_t m = candidates.size();
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        double worst = 0.0;
        for (std::size_t v = 0; v < n && worst < best; ++v) {
            double nearest = to_focus[v];
            for (std::size_t t = 0; t < k_s; ++t) {
                const std::size_t u = candidates[pick[t]];
                nearest = std::min(nearest, u == v ? 0.0 : dist(v, u));
            }
            worst = std::max(worst, nearest);
        }
        best = std::min(best, worst);

        std::size_t t = k_s;
        while (t > 0 && pick[t - 1] == m - k_s + (t - 1)) {
            --t;
        }
        if (t == 0) {
            break;
        }
        ++pick[t - 1];
        for (std::size_t u = t; u < k_s; ++u) {
            pick[u] = pick[u - 1] + 1;
        }
    }
    return best;
}

}  // namespace fsr
