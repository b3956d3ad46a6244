#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace clausevec {

// One clause embedding. `d` is the configured dimension; `values` holds d
// entries (or 2d for the sign-split chain-pattern encoder). Pattern encoders
// produce non-negative integer counts, GNN encoders reals.
struct FeatureVector {
    std::string id;
    std::string encoder;
    int d = 0;
    std::vector<double> values;
};

enum class VectorFormat { json, csv, binary };

VectorFormat vector_format_from_string(const std::string& s);

// JSON lines, one object per clause: {"id":..., "encoder":..., "d":..., "values":[...]}
std::string feature_vectors_to_jsonl(std::span<const FeatureVector> vectors);

// Header row, then id,encoder,d,v0,v1,...
std::string feature_vectors_to_csv(std::span<const FeatureVector> vectors);

// 16-byte header (8-byte magic "CLVECF32", uint32 LE dim, uint32 LE count),
// then count*dim little-endian 32-bit floats. All vectors must share one
// length.
std::vector<uint8_t> feature_vectors_to_binary(std::span<const FeatureVector> vectors);

std::vector<FeatureVector> feature_vectors_from_binary(std::span<const uint8_t> bytes);

}  // namespace clausevec
