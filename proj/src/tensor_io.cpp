// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#include "fsr/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace fsr {

namespace {

constexpr std::uint8_t kMagic[4] = {'F', 'S', 'R', 'T'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<std::uint8_t>(v >> shift));
    }
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k) {
        v = (v << 8) | bytes[offset + static_cast<std::size_t>(k)];
    }
    return v;
}

// rows * cols * 4 + header, or nullopt when it does not fit in 64 bits.
std::optional<std::uint64_t> file_size_for(std::uint32_t rows, std::uint32_t cols) {
    const std::uint64_t count = static_cast<std::uint64_t>(rows) * cols;
    if (count > (std::numeric_limits<std::uint64_t>::max() - kFsrtHeaderSize) / 4) {
        return std::nullopt;
    }
    return count * 4 + kFsrtHeaderSize;
}

void check_shape(TensorKind kind, std::uint32_t rows, std::uint32_t cols) {
    if (static_cast<std::uint8_t>(kind) > 3) {
        throw Error(ErrorCode::bad_kind, "unknown tensor kind " + std::to_string(static_cast<int>(kind)));
    }
    if (rows == 0 || cols == 0) {
        throw Error(ErrorCode::invalid_argument, "tensor has an empty dimension");
    }
    if (kind == TensorKind::query_vector && rows != 1) {
        throw Error(ErrorCode::dimension_mismatch, "query vector tensors must have exactly one row");
    }
    if (kind == TensorKind::self_attention && rows != cols) {
        throw Error(ErrorCode::dimension_mismatch, "self-attention tensors must be square");
    }
}

std::uint32_t narrow_dim(std::size_t n, const char* what) {
    if (n > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorCode::invalid_argument, std::string(what) + " does not fit in 32 bits");
    }
    return static_cast<std::uint32_t>(n);
}

std::vector<float> narrow_values(std::span<const double> values) {
    std::vector<float> out(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        out[k] = static_cast<float>(values[k]);
        if (!std::isfinite(out[k])) {
            throw Error(ErrorCode::non_finite, "value is not representable as a finite 32-bit float");
        }
    }
    return out;
}

Matrix widen(const RawTensor& raw) {
    return Matrix(raw.rows, raw.cols, std::vector<double>(raw.values.begin(), raw.values.end()));
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const RawTensor& tensor) {
    const auto total = file_size_for(tensor.rows, tensor.cols);
    if (!total) {
        throw Error(ErrorCode::invalid_argument, "rows * cols overflows the file size");
    }
    check_shape(tensor.kind, tensor.rows, tensor.cols);
    if (tensor.values.size() != static_cast<std::uint64_t>(tensor.rows) * tensor.cols) {
        throw Error(ErrorCode::size_mismatch, "payload length does not match rows * cols");
    }
    for (float v : tensor.values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::non_finite, "tensor payload contains NaN or Inf");
        }
    }
    std::vector<std::uint8_t> out;
    out.reserve(*total);
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_u32(out, kFsrtVersion);
    out.push_back(static_cast<std::uint8_t>(tensor.kind));
    put_u32(out, tensor.rows);
    put_u32(out, tensor.cols);
    for (float v : tensor.values) {
        put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

RawTensor decode_tensor(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kFsrtHeaderSize) {
        throw Error(ErrorCode::size_mismatch, "file shorter than the 17-byte header");
    }
    if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
        throw Error(ErrorCode::bad_magic, "missing FSRT magic");
    }
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != kFsrtVersion) {
        throw Error(ErrorCode::version_mismatch, "unsupported version " + std::to_string(version));
    }
    RawTensor raw;
    const std::uint8_t kind = bytes[8];
    if (kind > 3) {
        throw Error(ErrorCode::bad_kind, "unknown tensor kind " + std::to_string(kind));
    }
    raw.kind = static_cast<TensorKind>(kind);
    raw.rows = get_u32(bytes, 9);
    raw.cols = get_u32(bytes, 13);
    const auto total = file_size_for(raw.rows, raw.cols);
    if (!total || *total != bytes.size()) {
        std::ostringstream msg;
        msg << "header declares " << raw.rows << "x" << raw.cols << " floats but file has " << bytes.size()
            << " bytes";
        throw Error(ErrorCode::size_mismatch, msg.str());
    }
    check_shape(raw.kind, raw.rows, raw.cols);
    const std::size_t count = static_cast<std::size_t>(raw.rows) * raw.cols;
    raw.values.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        raw.values[k] = std::bit_cast<float>(get_u32(bytes, kFsrtHeaderSize + 4 * k));
        if (!std::isfinite(raw.values[k])) {
            throw Error(ErrorCode::non_finite, "payload value " + std::to_string(k) + " is NaN or Inf");
        }
    }
    return raw;
}

TensorValue to_value(const RawTensor& raw) {
    check_shape(raw.kind, raw.rows, raw.cols);
    switch (raw.kind) {
    case TensorKind::token_matrix:
        return TokenMatrix(widen(raw));
    case TensorKind::cls_attention:
        return AttentionInput::cls(widen(raw));
    case TensorKind::self_attention:
        return AttentionInput::self_attention(widen(raw));
    case TensorKind::query_vector:
        return QueryEmbedding{std::vector<double>(raw.values.begin(), raw.values.end())};
    }
    throw Error(ErrorCode::bad_kind, "unknown tensor kind");
}

RawTensor to_raw(const TensorValue& value) {
    RawTensor raw;
    if (const auto* tokens = std::get_if<TokenMatrix>(&value)) {
        raw.kind = TensorKind::token_matrix;
        raw.rows = narrow_dim(tokens->size(), "rows");
        raw.cols = narrow_dim(tokens->dim(), "cols");
        raw.values = narrow_values(tokens->matrix().data());
    } else if (const auto* attn = std::get_if<AttentionInput>(&value)) {
        attn->validate();
        raw.kind = attn->mode == SaliencyMode::cls_attention ? TensorKind::cls_attention : TensorKind::self_attention;
        raw.rows = narrow_dim(attn->weights.rows(), "rows");
        raw.cols = narrow_dim(attn->weights.cols(), "cols");
        raw.values = narrow_values(attn->weights.data());
    } else {
        const auto& query = std::get<QueryEmbedding>(value);
        raw.kind = TensorKind::query_vector;
        raw.rows = 1;
        raw.cols = narrow_dim(query.vector.size(), "cols");
        raw.values = narrow_values(query.vector);
    }
    check_shape(raw.kind, raw.rows, raw.cols);
    return raw;
}

RawTensor read_raw_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io_failure, "cannot open " + path.string());
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw Error(ErrorCode::io_failure, "read failed for " + path.string());
    }
    return decode_tensor(bytes);
}

void write_raw_tensor(const RawTensor& tensor, const std::filesystem::path& path) {
    const auto bytes = encode_tensor(tensor);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io_failure, "cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::io_failure, "write failed for " + path.string());
    }
}

TensorValue read_tensor(const std::filesystem::path& path) {
    return to_value(read_raw_tensor(path));
}

void write_tensor(const TensorValue& value, const std::filesystem::path& path) {
    write_raw_tensor(to_raw(value), path);
}

nlohmann::json to_json(const PruneSummary& summary, const PruneConfig& config) {
    using nlohmann::json;
    json origins = json::array();
    for (Origin o : summary.origins) {
        origins.push_back(to_string(o));
    }
    const PruneStats& st = summary.stats;
    json doc;
    doc["format"] = "fsr-prune-result";
    doc["version"] = 1;
    doc["token_count"] = summary.token_count;
    doc["kept_indices"] = summary.kept_indices;
    doc["origins"] = std::move(origins);
    doc["weights"] = summary.weights;
    doc["k_f"] = st.k_f;
    doc["k_f_uncapped"] = st.k_f_uncapped;
    doc["k_s"] = st.k_s;
    doc["m"] = st.m;
    doc["coverage_radius"] = st.coverage_radius ? json(*st.coverage_radius) : json(nullptr);
    doc["retained_priority_mass"] = st.retained_priority_mass;
    doc["passthrough"] = summary.passthrough;
    doc["scan_order"] = summary.scan_order;
    doc["gain_sequence"] = summary.gain_sequence;
    doc["phi_summary"] = {
        {"min", summary.phi.min},
        {"max", summary.phi.max},
        {"mean", summary.phi.mean},
        {"histogram", summary.phi.histogram},
    };
    doc["config"] = {
        {"budget_K", summary.budget_K},
        {"alpha", config.alpha},
        {"beta", config.beta},
        {"rho", config.rho},
        {"kappa", config.kappa},
        {"saliency_mode", to_string(config.saliency_mode)},
        {"relevance_mode", to_string(config.relevance_mode)},
    };
    return doc;
}

PruneSummary summary_from_json(const nlohmann::json& doc, PruneConfig* config) {
    try {
        if (doc.at("format").get<std::string>() != "fsr-prune-result") {
            throw Error(ErrorCode::bad_magic, "not a prune result document");
        }
        if (doc.at("version").get<int>() != 1) {
            throw Error(ErrorCode::version_mismatch, "unsupported result document version");
        }
        PruneSummary s;
        s.token_count = doc.at("token_count").get<std::size_t>();
        s.kept_indices = doc.at("kept_indices").get<std::vector<std::size_t>>();
        for (const auto& o : doc.at("origins")) {
            s.origins.push_back(parse_origin(o.get<std::string>()));
        }
        s.weights = doc.at("weights").get<std::vector<double>>();
        s.stats.k_f = doc.at("k_f").get<std::size_t>();
        s.stats.k_f_uncapped = doc.at("k_f_uncapped").get<std::size_t>();
        s.stats.k_s = doc.at("k_s").get<std::size_t>();
        s.stats.m = doc.at("m").get<std::size_t>();
        if (!doc.at("coverage_radius").is_null()) {
            s.stats.coverage_radius = doc.at("coverage_radius").get<double>();
        }
        s.stats.retained_priority_mass = doc.at("retained_priority_mass").get<double>();
        s.passthrough = doc.at("passthrough").get<bool>();
        s.scan_order = doc.at("scan_order").get<std::vector<std::size_t>>();
        s.gain_sequence = doc.at("gain_sequence").get<std::vector<double>>();
        const auto& phi = doc.at("phi_summary");
        s.phi.min = phi.at("min").get<double>();
        s.phi.max = phi.at("max").get<double>();
        s.phi.mean = phi.at("mean").get<double>();
        s.phi.histogram = phi.at("histogram").get<std::array<std::size_t, kPhiHistogramBins>>();

        const auto& cfg = doc.at("config");
        s.budget_K = cfg.at("budget_K").get<std::size_t>();
        if (config != nullptr) {
            config->budget_K = s.budget_K;
            config->alpha = cfg.at("alpha").get<double>();
            config->beta = cfg.at("beta").get<double>();
            config->rho = cfg.at("rho").get<double>();
            config->kappa = cfg.at("kappa").get<double>();
            config->saliency_mode = parse_saliency_mode(cfg.at("saliency_mode").get<std::string>());
            config->relevance_mode =
                cfg.at("relevance_mode").get<std::string>() == "none" ? RelevanceMode::none : RelevanceMode::query;
        }

        if (s.origins.size() != s.kept_indices.size() || s.weights.size() != s.kept_indices.size()) {
            throw Error(ErrorCode::size_mismatch, "per-token arrays differ in length");
        }
        for (std::size_t k = 1; k < s.kept_indices.size(); ++k) {
            if (s.kept_indices[k - 1] >= s.kept_indices[k]) {
                throw Error(ErrorCode::invalid_argument, "kept_indices must be strictly ascending");
            }
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("malformed result document: ") + e.what());
    }
}

std::string dump_document(const nlohmann::json& doc) {
    return doc.dump(2) + "\n";
}

}  // namespace fsr
