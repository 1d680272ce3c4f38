#include "segtopics/model_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "segtopics/error.hpp"
#include "segtopics/interchange.hpp"

namespace segtopics {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'S', 'G', 'H', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<std::uint8_t>(v >> shift));
    }
}

std::uint32_t get_u32(const std::uint8_t* in) {
    return static_cast<std::uint32_t>(in[0]) | (static_cast<std::uint32_t>(in[1]) << 8) |
           (static_cast<std::uint32_t>(in[2]) << 16) | (static_cast<std::uint32_t>(in[3]) << 24);
}

json config_to_json(const HeadConfig& c) {
    return {{"input_dim", c.input_dim}, {"model_dim", c.model_dim}, {"layers", c.layers},
            {"heads", c.heads},         {"ff_mult", c.ff_mult},     {"dropout", c.dropout},
            {"max_blocks", c.max_blocks}};
}

HeadConfig config_from_json(const json& doc) {
    HeadConfig c;
    try {
        c.input_dim = doc.at("input_dim").get<int>();
        c.model_dim = doc.at("model_dim").get<int>();
        c.layers = doc.at("layers").get<int>();
        c.heads = doc.at("heads").get<int>();
        c.ff_mult = doc.at("ff_mult").get<int>();
        c.dropout = doc.at("dropout").get<double>();
        c.max_blocks = doc.at("max_blocks").get<int>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("SGH1 header: bad config: ") + e.what());
    }
    c.validate();
    return c;
}

} // namespace

void round_to_float(HeadParams& params) {
    for (auto& [name, tensor] : params.named_tensors()) {
        *tensor = tensor->cast<float>().cast<double>();
    }
}

std::vector<std::uint8_t> encode_model(const HeadModel& model) {
    json tensors = json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, tensor] : model.params.named_tensors()) {
        tensors.push_back({{"name", name},
                           {"shape", {tensor->rows(), tensor->cols()}},
                           {"offset", offset}});
        offset += 4 * static_cast<std::uint64_t>(tensor->size());
    }
    json header = {{"format", "SGH1"},
                   {"config", config_to_json(model.config)},
                   {"threshold", model.threshold},
                   {"blob_bytes", offset},
                   {"tensors", std::move(tensors)}};
    const std::string header_text = header.dump();

    std::vector<std::uint8_t> out;
    out.reserve(8 + header_text.size() + offset);
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, static_cast<std::uint32_t>(header_text.size()));
    out.insert(out.end(), header_text.begin(), header_text.end());
    for (const auto& [name, tensor] : model.params.named_tensors()) {
        // Row-major within each tensor.
        for (Eigen::Index r = 0; r < tensor->rows(); ++r) {
            for (Eigen::Index c = 0; c < tensor->cols(); ++c) {
                const auto value = static_cast<float>((*tensor)(r, c));
                if (!std::isfinite(value)) {
                    throw ValidationError("non-finite parameter in " + name);
                }
                put_u32(out, std::bit_cast<std::uint32_t>(value));
            }
        }
    }
    return out;
}

HeadModel decode_model(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw FormatError("bad magic: not an SGH1 model file");
    }
    const std::size_t header_len = get_u32(bytes.data() + 4);
    if (bytes.size() < 8 + header_len) {
        throw FormatError("truncated SGH1 header");
    }
    json header;
    try {
        header = json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(header_len));
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("SGH1 header: malformed JSON: ") + e.what());
    }
    if (!header.is_object() || header.value("format", "") != "SGH1" || !header.contains("config") ||
        !header.contains("tensors") || !header["tensors"].is_array()) {
        throw FormatError("SGH1 header: missing format, config or tensors");
    }

    HeadModel model;
    model.config = config_from_json(header["config"]);
    model.threshold = header.value("threshold", 0.5);
    model.params = HeadParams::zeros(model.config);

    const std::uint8_t* blob = bytes.data() + 8 + header_len;
    const std::size_t blob_len = bytes.size() - 8 - header_len;
    const json& manifest = header["tensors"];
    auto expected = model.params.named_tensors();
    if (manifest.size() != expected.size()) {
        throw FormatError("SGH1 header lists " + std::to_string(manifest.size()) + " tensors, config implies " +
                          std::to_string(expected.size()));
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        auto& [name, tensor] = expected[i];
        const json& entry = manifest[i];
        try {
            if (entry.at("name").get<std::string>() != name) {
                throw FormatError("SGH1 tensor " + std::to_string(i) + " is \"" +
                                  entry.at("name").get<std::string>() + "\", expected \"" + name + "\"");
            }
            const auto rows = entry.at("shape").at(0).get<Eigen::Index>();
            const auto cols = entry.at("shape").at(1).get<Eigen::Index>();
            if (rows != tensor->rows() || cols != tensor->cols()) {
                throw FormatError("SGH1 tensor " + name + " has the wrong shape");
            }
            const auto offset = entry.at("offset").get<std::size_t>();
            if (offset + 4 * static_cast<std::size_t>(tensor->size()) > blob_len) {
                throw FormatError("truncated SGH1 blob at tensor " + name);
            }
            const std::uint8_t* at = blob + offset;
            for (Eigen::Index r = 0; r < rows; ++r) {
                for (Eigen::Index c = 0; c < cols; ++c) {
                    const float value = std::bit_cast<float>(get_u32(at));
                    if (!std::isfinite(value)) {
                        throw FormatError("non-finite parameter in " + name);
                    }
                    (*tensor)(r, c) = value;
                    at += 4;
                }
            }
        } catch (const json::exception& e) {
            throw FormatError("SGH1 tensor manifest entry " + std::to_string(i) + ": " + e.what());
        }
    }
    return model;
}

void save_model(const HeadModel& model, const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = encode_model(model);
    write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

HeadModel load_model(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return decode_model(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace segtopics
