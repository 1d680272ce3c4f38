#include "segtopics/embedio.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "segtopics/error.hpp"
#include "segtopics/interchange.hpp"

namespace segtopics {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

void put_u32(std::uint8_t* out, std::uint32_t v) {
    out[0] = static_cast<std::uint8_t>(v);
    out[1] = static_cast<std::uint8_t>(v >> 8);
    out[2] = static_cast<std::uint8_t>(v >> 16);
    out[3] = static_cast<std::uint8_t>(v >> 24);
}

std::uint32_t get_u32(const std::uint8_t* in) {
    return static_cast<std::uint32_t>(in[0]) | (static_cast<std::uint32_t>(in[1]) << 8) |
           (static_cast<std::uint32_t>(in[2]) << 16) | (static_cast<std::uint32_t>(in[3]) << 24);
}

std::string position(std::size_t index, std::size_t d) {
    return "(" + std::to_string(index / d) + "," + std::to_string(index % d) + ")";
}

void check_dims(std::size_t n, std::size_t d) {
    if (n == 0 || d == 0) {
        throw FormatError("embedding sequence has zero dimension (n=" + std::to_string(n) +
                          ", d=" + std::to_string(d) + ")");
    }
    if (n > 0xFFFFFFFFu || d > 0xFFFFFFFFu) {
        throw FormatError("embedding dimensions exceed 32-bit range");
    }
}

} // namespace

BlockEmbeddingSequence::BlockEmbeddingSequence(std::size_t n, std::size_t d)
    : n_(n), d_(d), data_(n * d, 0.0f) {}

BlockEmbeddingSequence::BlockEmbeddingSequence(std::size_t n, std::size_t d, std::vector<float> data)
    : n_(n), d_(d), data_(std::move(data)) {
    if (data_.size() != n_ * d_) {
        throw ValidationError("embedding data size " + std::to_string(data_.size()) +
                              " does not match " + std::to_string(n_) + "x" + std::to_string(d_));
    }
}

std::size_t emb1_size(std::size_t n, std::size_t d) { return kEmb1HeaderBytes + 4 * n * d; }

std::vector<std::uint8_t> encode_embeddings(const BlockEmbeddingSequence& seq) {
    const std::size_t n = seq.rows();
    const std::size_t d = seq.dim();
    check_dims(n, d);
    std::vector<std::uint8_t> bytes(emb1_size(n, d));
    std::memcpy(bytes.data(), kMagic, 4);
    put_u32(bytes.data() + 4, static_cast<std::uint32_t>(n));
    put_u32(bytes.data() + 8, static_cast<std::uint32_t>(d));
    put_u32(bytes.data() + 12, 0);
    const std::vector<float>& data = seq.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i])) {
            throw FormatError("non-finite value at " + position(i, d));
        }
        put_u32(bytes.data() + kEmb1HeaderBytes + 4 * i, std::bit_cast<std::uint32_t>(data[i]));
    }
    return bytes;
}

BlockEmbeddingSequence decode_embeddings(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kEmb1HeaderBytes) {
        throw FormatError("truncated EMB1 header: " + std::to_string(bytes.size()) + " bytes");
    }
    if (std::memcmp(bytes.data(), "EMB", 3) != 0) {
        throw FormatError("bad magic: not an EMB1 file");
    }
    if (bytes[3] != '1') {
        throw FormatError(std::string("unsupported version: EMB") + static_cast<char>(bytes[3]));
    }
    const std::size_t n = get_u32(bytes.data() + 4);
    const std::size_t d = get_u32(bytes.data() + 8);
    check_dims(n, d);
    const std::size_t expected = emb1_size(n, d);
    if (bytes.size() < expected) {
        throw FormatError("truncated EMB1 payload: expected " + std::to_string(expected) +
                          " bytes for n=" + std::to_string(n) + ", d=" + std::to_string(d) +
                          ", got " + std::to_string(bytes.size()));
    }
    if (bytes.size() > expected) {
        throw FormatError("trailing bytes after EMB1 payload");
    }
    std::vector<float> data(n * d);
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = std::bit_cast<float>(get_u32(bytes.data() + kEmb1HeaderBytes + 4 * i));
        if (!std::isfinite(data[i])) {
            throw FormatError("non-finite value at " + position(i, d));
        }
    }
    return BlockEmbeddingSequence(n, d, std::move(data));
}

std::size_t write_embeddings(const BlockEmbeddingSequence& seq, std::ostream& sink) {
    const std::vector<std::uint8_t> bytes = encode_embeddings(seq);
    sink.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!sink) {
        throw std::runtime_error("failed writing EMB1 stream");
    }
    return bytes.size();
}

BlockEmbeddingSequence read_embeddings(std::istream& source) {
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(source)),
                                    std::istreambuf_iterator<char>());
    return decode_embeddings(bytes);
}

BlockEmbeddingSequence load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open embedding file " + path.string());
    }
    try {
        return read_embeddings(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_embeddings(const BlockEmbeddingSequence& seq, const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = encode_embeddings(seq);
    write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

} // namespace segtopics
