// Copyright 2026 The FSR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "json.hpp"

#include "fsr/core.hpp"
#include "fsr/focus.hpp"
#include "fsr/pipeline.hpp"

namespace fsr {

// FSRT tensor file, all integers little-endian:
//
//   offset  size  field
//   0       4     magic "FSRT"
//   4       4     version (u32) = 1
//   8       1     kind (u8): 0 token matrix, 1 [CLS] attention H x N,
//                            2 self-attention N x N, 3 query vector (rows = 1)
//   9       4     rows (u32)
//   13      4     cols (u32)
//   17      4*r*c payload, IEEE-754 binary32, row-major
//
// Nothing may follow the payload.

enum class TensorKind : std::uint8_t {
    token_matrix = 0,
    cls_attention = 1,
    self_attention = 2,
    query_vector = 3,
};

inline constexpr std::uint32_t kFsrtVersion = 1;
inline constexpr std::size_t kFsrtHeaderSize = 17;

/// Header plus float payload exactly as stored on disk.
struct RawTensor {
    TensorKind kind = TensorKind::token_matrix;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<float> values;

    friend bool operator==(const RawTensor&, const RawTensor&) = default;
};

using TensorValue = std::variant<TokenMatrix, AttentionInput, QueryEmbedding>;

std::vector<std::uint8_t> encode_tensor(const RawTensor& tensor);
RawTensor decode_tensor(std::span<const std::uint8_t> bytes);

/// Widens to 64-bit and wraps in the role selected by `kind`.
TensorValue to_value(const RawTensor& raw);
/// Narrows to 32-bit. Kind follows the value type (attention kind from its mode).
RawTensor to_raw(const TensorValue& value);

RawTensor read_raw_tensor(const std::filesystem::path& path);
void write_raw_tensor(const RawTensor& tensor, const std::filesystem::path& path);

TensorValue read_tensor(const std::filesystem::path& path);
void write_tensor(const TensorValue& value, const std::filesystem::path& path);

// Result document (JSON). See docs/formats.md.

nlohmann::json to_json(const PruneSummary& summary, const PruneConfig& config);
/// Parses a document written by `to_json`; `config` is optional output.
PruneSummary summary_from_json(const nlohmann::json& doc, PruneConfig* config = nullptr);

std::string dump_document(const nlohmann::json& doc);

}  // namespace fsr
