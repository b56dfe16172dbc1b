// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#include "fsr/pipeline.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "fsr/refine.hpp"
#include "fsr/scan.hpp"

namespace fsr {

const char* to_string(Origin origin) {
    return origin == Origin::focus ? "focus" : "scan";
}

Origin parse_origin(const std::string& text) {
    if (text == "focus") {
        return Origin::focus;
    }
    if (text == "scan") {
        return Origin::scan;
    }
    throw Error(ErrorCode::invalid_argument, "unknown origin '" + text + "'");
}

namespace {

double retained_mass(const ScoreVector& phi, const IndexSet& kept) {
    double total = 0.0;
    for (double p : phi) {
        total += p;
    }
    if (total == 0.0) {
        return 1.0;
    }
    double kept_mass = 0.0;
    for (std::size_t i : kept) {
        kept_mass += phi[i];
    }
    return kept_mass / total;
}

PruneResult passthrough(const TokenMatrix& tokens, ScoreVector phi) {
    const std::size_t n = tokens.size();
    PruneResult result;
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) {
        all[i] = i;
    }
    result.kept_indices = IndexSet(std::move(all));
    result.kept_vectors = tokens.matrix();
    result.origins.assign(n, Origin::focus);
    result.weights = phi;
    result.members.assign(n, {});
    result.stats.k_f = n;
    result.stats.k_f_uncapped = n;
    result.stats.coverage_radius = 0.0;
    result.stats.retained_priority_mass = 1.0;
    result.phi = std::move(phi);
    result.passthrough = true;
    return result;
}

}  // namespace

PruneResult prune(const TokenMatrix& tokens, const AttentionInput& attn, const std::optional<QueryEmbedding>& query,
                  const PruneConfig& config) {
    config.validate();
    const std::size_t n = tokens.size();
    if (config.budget_K >= n) {
        return passthrough(tokens, compute_priorities(tokens, attn, query, config));
    }

    FocusResult focus = select_focus(tokens, attn, query, config);
    const std::size_t k_s = config.budget_K - focus.k_f;

    const ScanResult scan = conditional_context_sampling(tokens, focus.focus_set, k_s, config.num_threads);
    const IndexSet selected = set_union(focus.focus_set, scan.scan_set);
    const IndexSet discarded = complement(selected, n);

    RefinedTokens refined;
    std::size_t m = 0;
    if (!scan.scan_set.empty()) {
        const auto assignments = assign_nearest_anchor(discarded, scan.scan_set, tokens, config.num_threads);
        const IndexSet d_top = select_top_m(assignments, config.kappa, scan.scan_set.size());
        m = d_top.size();
        refined = weighted_merge(scan.scan_set, d_top, assignments, focus.phi, tokens);
    }

    PruneResult result;
    result.kept_indices = selected;
    result.kept_vectors = Matrix(selected.size(), tokens.dim());
    result.origins.reserve(selected.size());
    result.weights.reserve(selected.size());
    result.members.reserve(selected.size());
    std::size_t scan_slot = 0;
    for (std::size_t k = 0; k < selected.size(); ++k) {
        const std::size_t i = selected[k];
        auto dst = result.kept_vectors.row(k);
        if (focus.focus_set.contains(i)) {
            const auto src = tokens.row(i);
            std::copy(src.begin(), src.end(), dst.begin());
            result.origins.push_back(Origin::focus);
            result.weights.push_back(focus.phi[i]);
            result.members.emplace_back();
        } else {
            const auto src = refined.vectors.row(scan_slot);
            std::copy(src.begin(), src.end(), dst.begin());
            result.origins.push_back(Origin::scan);
            result.weights.push_back(refined.weights[scan_slot]);
            result.members.push_back(refined.member_lists[scan_slot]);
            ++scan_slot;
        }
    }

    result.stats.k_f = focus.k_f;
    result.stats.k_f_uncapped = focus.k_f_uncapped;
    result.stats.k_s = k_s;
    result.stats.m = m;
    if (config.compute_stats) {
        result.stats.coverage_radius = coverage_radius(tokens, selected, config.num_threads);
    }
    result.stats.retained_priority_mass = retained_mass(focus.phi, selected);
    result.phi = std::move(focus.phi);
    result.scan_order = scan.selection_order;
    result.gain_sequence = scan.gain_sequence;
    return result;
}

PhiSummary summarize_phi(const ScoreVector& phi) {
    PhiSummary out;
    if (phi.empty()) {
        return out;
    }
    const auto [lo, hi] = std::minmax_element(phi.begin(), phi.end());
    out.min = *lo;
    out.max = *hi;
    double sum = 0.0;
    for (double p : phi) {
        sum += p;
        const double clamped = std::clamp(p, 0.0, 1.0);
        const auto bin = std::min(kPhiHistogramBins - 1, static_cast<std::size_t>(clamped * kPhiHistogramBins));
        ++out.histogram[bin];
    }
    out.mean = sum / static_cast<double>(phi.size());
    return out;
}

PruneSummary summarize(const PruneResult& result, std::size_t token_count, std::size_t budget_K) {
    PruneSummary s;
    s.token_count = token_count;
    s.budget_K = budget_K;
    s.kept_indices = result.kept_indices.indices();
    s.origins = result.origins;
    s.weights = result.weights;
    s.stats = result.stats;
    s.scan_order = result.scan_order;
    s.gain_sequence = result.gain_sequence;
    s.phi = summarize_phi(result.phi);
    s.passthrough = result.passthrough;
    return s;
}

std::string explain(const PruneSummary& summary) {
    const PruneStats& st = summary.stats;
    std::ostringstream out;
    out << std::setprecision(6);
    out << "[budget]\n";
    out << "  tokens: " << summary.token_count << "\n";
    out << "  K: " << summary.budget_K << "\n";
    out << "  kept: " << summary.kept_indices.size() << "\n";
    out << "  K_F + K_S = " << st.k_f << " + " << st.k_s << " = " << st.k_f + st.k_s << "\n";
    if (summary.passthrough) {
        out << "  passthrough: budget covers every token\n";
    }

    out << "[focus]\n";
    out << "  K_F: " << st.k_f << " (uncapped " << st.k_f_uncapped << ")\n";
    out << "  phi: min " << summary.phi.min << ", mean " << summary.phi.mean << ", max " << summary.phi.max << "\n";
    out << "  phi histogram:";
    for (std::size_t b = 0; b < kPhiHistogramBins; ++b) {
        out << ' ' << summary.phi.histogram[b];
    }
    out << "\n";

    out << "[scan]\n";
    if (st.k_s == 0) {
        out << "  status: skipped\n";
    } else {
        out << "  K_S: " << st.k_s << "\n";
        out << "  order:";
        for (std::size_t i : summary.scan_order) {
            out << ' ' << i;
        }
        out << "\n  gains:";
        for (double g : summary.gain_sequence) {
            out << ' ' << g;
        }
        out << "\n";
    }

    out << "[refine]\n";
    if (st.k_s == 0) {
        out << "  status: skipped\n";
    } else {
        out << "  M: " << st.m << "\n";
    }

    out << "[quality]\n";
    if (st.coverage_radius) {
        out << "  coverage_radius: " << std::setprecision(17) << *st.coverage_radius << std::setprecision(6) << "\n";
    } else {
        out << "  coverage_radius: not computed\n";
    }
    out << "  retained_priority_mass: " << st.retained_priority_mass << "\n";
    return out.str();
}

std::string explain(const PruneResult& result, std::size_t token_count, std::size_t budget_K) {
    return explain(summarize(result, token_count, budget_K));
}

}  // namespace fsr
