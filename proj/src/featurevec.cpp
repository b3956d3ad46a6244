#include "clausevec/featurevec.hpp"

#include <bit>
#include <cstring>

#include <json.hpp>

#include "clausevec/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary vector export assumes a little-endian host");

namespace clausevec {

namespace {
constexpr char kMagic[8] = {'C', 'L', 'V', 'E', 'C', 'F', '3', '2'};
}

VectorFormat vector_format_from_string(const std::string& s) {
    if (s == "json") return VectorFormat::json;
    if (s == "csv") return VectorFormat::csv;
    if (s == "bin" || s == "binary") return VectorFormat::binary;
    throw ConfigError("unknown vector format '" + s + "' (expected json, csv or bin)");
}

std::string feature_vectors_to_jsonl(std::span<const FeatureVector> vectors) {
    std::string out;
    for (const auto& fv : vectors) {
        nlohmann::json j{{"id", fv.id}, {"encoder", fv.encoder}, {"d", fv.d}};
        j["values"] = fv.values;
        out += j.dump();
        out += "\n";
    }
    return out;
}

std::string feature_vectors_to_csv(std::span<const FeatureVector> vectors) {
    std::string out = "id,encoder,d,values...\n";
    char buf[64];
    for (const auto& fv : vectors) {
        out += fv.id;
        out += ",";
        out += fv.encoder;
        out += ",";
        out += std::to_string(fv.d);
        for (double v : fv.values) {
            std::snprintf(buf, sizeof(buf), ",%.9g", v);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

std::vector<uint8_t> feature_vectors_to_binary(std::span<const FeatureVector> vectors) {
    uint32_t dim = vectors.empty() ? 0 : static_cast<uint32_t>(vectors[0].values.size());
    for (const auto& fv : vectors) {
        if (fv.values.size() != dim)
            throw ConfigError("binary export needs uniform vector lengths (got " +
                              std::to_string(fv.values.size()) + " and " + std::to_string(dim) +
                              ")");
    }
    uint32_t count = static_cast<uint32_t>(vectors.size());
    std::vector<uint8_t> out(16 + size_t{4} * dim * count);
    std::memcpy(out.data(), kMagic, 8);
    std::memcpy(out.data() + 8, &dim, 4);
    std::memcpy(out.data() + 12, &count, 4);
    size_t off = 16;
    for (const auto& fv : vectors) {
        for (double v : fv.values) {
            float f = static_cast<float>(v);
            std::memcpy(out.data() + off, &f, 4);
            off += 4;
        }
    }
    return out;
}

std::vector<FeatureVector> feature_vectors_from_binary(std::span<const uint8_t> bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0)
        throw ConfigError("not a CLVECF32 vector file");
    uint32_t dim = 0, count = 0;
    std::memcpy(&dim, bytes.data() + 8, 4);
    std::memcpy(&count, bytes.data() + 12, 4);
    if (bytes.size() != 16 + size_t{4} * dim * count)
        throw ConfigError("truncated CLVECF32 vector file");
    std::vector<FeatureVector> out(count);
    size_t off = 16;
    for (uint32_t i = 0; i < count; ++i) {
        out[i].d = static_cast<int>(dim);
        out[i].values.resize(dim);
        for (uint32_t k = 0; k < dim; ++k) {
            float f;
            std::memcpy(&f, bytes.data() + off, 4);
            off += 4;
            out[i].values[k] = f;
        }
    }
    return out;
}

}  // namespace clausevec
