#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace segtopics {

// n blocks by d dims, row-major 32-bit floats.
class BlockEmbeddingSequence {
public:
    BlockEmbeddingSequence() = default;
    BlockEmbeddingSequence(std::size_t n, std::size_t d);
    BlockEmbeddingSequence(std::size_t n, std::size_t d, std::vector<float> data);

    std::size_t rows() const { return n_; }
    std::size_t dim() const { return d_; }
    bool empty() const { return n_ == 0; }

    float& at(std::size_t row, std::size_t col) { return data_[row * d_ + col]; }
    float at(std::size_t row, std::size_t col) const { return data_[row * d_ + col]; }

    std::span<const float> row(std::size_t r) const { return {data_.data() + r * d_, d_}; }
    std::span<float> row(std::size_t r) { return {data_.data() + r * d_, d_}; }

    const std::vector<float>& data() const { return data_; }

    friend bool operator==(const BlockEmbeddingSequence&, const BlockEmbeddingSequence&) = default;

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<float> data_;
};

// EMB1 layout, all little-endian:
//   "EMB1" | n: u32 | d: u32 | reserved: u32 = 0 | n*d f32 row-major
inline constexpr std::size_t kEmb1HeaderBytes = 16;

std::size_t emb1_size(std::size_t n, std::size_t d);

// Returns the number of bytes written. Throws FormatError on empty dims
// or a non-finite value.
std::size_t write_embeddings(const BlockEmbeddingSequence& seq, std::ostream& sink);
BlockEmbeddingSequence read_embeddings(std::istream& source);

std::vector<std::uint8_t> encode_embeddings(const BlockEmbeddingSequence& seq);
BlockEmbeddingSequence decode_embeddings(std::span<const std::uint8_t> bytes);

BlockEmbeddingSequence load_embeddings(const std::filesystem::path& path);
void save_embeddings(const BlockEmbeddingSequence& seq, const std::filesystem::path& path);

} // namespace segtopics
