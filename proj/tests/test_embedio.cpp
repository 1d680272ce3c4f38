#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "segtopics/embedio.hpp"
#include "segtopics/error.hpp"
#include "segtopics/random.hpp"

using namespace segtopics;

namespace {

BlockEmbeddingSequence random_sequence(Rng& rng, std::size_t n, std::size_t d) {
    BlockEmbeddingSequence seq(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            seq.at(r, c) = static_cast<float>(rng.normal() * 10.0);
        }
    }
    return seq;
}

std::string bytes_of(const BlockEmbeddingSequence& seq) {
    std::ostringstream out;
    write_embeddings(seq, out);
    return out.str();
}

} // namespace

TEST_CASE("EMB1 byte counts") {
    std::ostringstream out;
    CHECK(write_embeddings(BlockEmbeddingSequence(1, 4), out) == 32);
    CHECK(out.str().size() == 32);
    Rng rng(1);
    CHECK(write_embeddings(random_sequence(rng, 3, 1024), out) == 12304);
}

TEST_CASE("EMB1 header layout is little-endian") {
    BlockEmbeddingSequence seq(2, 3);
    seq.at(0, 0) = 1.0f;
    const std::string b = bytes_of(seq);
    CHECK(b.substr(0, 4) == "EMB1");
    CHECK(static_cast<unsigned char>(b[4]) == 2);
    CHECK(b[5] == 0);
    CHECK(static_cast<unsigned char>(b[8]) == 3);
    CHECK(b.substr(12, 4) == std::string(4, '\0'));
    // 1.0f == 0x3F800000
    CHECK(static_cast<unsigned char>(b[16]) == 0x00);
    CHECK(static_cast<unsigned char>(b[18]) == 0x80);
    CHECK(static_cast<unsigned char>(b[19]) == 0x3F);
}

TEST_CASE("EMB1 rejects invalid sequences on write") {
    BlockEmbeddingSequence seq(2, 2);
    seq.at(1, 0) = std::numeric_limits<float>::quiet_NaN();
    std::ostringstream out;
    CHECK_THROWS_WITH_AS(write_embeddings(seq, out), doctest::Contains("non-finite value at (1,0)"), FormatError);
    CHECK_THROWS_AS(write_embeddings(BlockEmbeddingSequence(0, 4), out), FormatError);
    CHECK_THROWS_AS(write_embeddings(BlockEmbeddingSequence(4, 0), out), FormatError);
}

TEST_CASE("EMB1 read errors") {
    Rng rng(2);
    const std::string good = bytes_of(random_sequence(rng, 2, 4));

    std::istringstream truncated(good.substr(0, 20));
    CHECK_THROWS_WITH_AS(read_embeddings(truncated), doctest::Contains("truncated"), FormatError);

    std::string v2 = good;
    v2[3] = '2';
    std::istringstream version(v2);
    CHECK_THROWS_WITH_AS(read_embeddings(version), doctest::Contains("unsupported version"), FormatError);

    std::istringstream magic("XXXX" + good.substr(4));
    CHECK_THROWS_WITH_AS(read_embeddings(magic), doctest::Contains("bad magic"), FormatError);

    std::string zero = good.substr(0, 16);
    zero[4] = 0;
    zero[5] = 0;
    std::istringstream zero_dims(zero);
    CHECK_THROWS_AS(read_embeddings(zero_dims), FormatError);

    std::string inf = good;
    inf.replace(16, 4, std::string("\x00\x00\x80\x7f", 4));
    std::istringstream infinite(inf);
    CHECK_THROWS_WITH_AS(read_embeddings(infinite), doctest::Contains("non-finite"), FormatError);

    std::istringstream trailing(good + "x");
    CHECK_THROWS_AS(read_embeddings(trailing), FormatError);
}

TEST_CASE("EMB1 write/read is the identity and sizes are exact") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(40);
        const std::size_t d = 1 + rng.below(64);
        const BlockEmbeddingSequence seq = random_sequence(rng, n, d);
        const std::string bytes = bytes_of(seq);
        CHECK(bytes.size() == emb1_size(n, d));
        std::istringstream in(bytes);
        const BlockEmbeddingSequence back = read_embeddings(in);
        CHECK(back == seq);
        CHECK(bytes_of(back) == bytes);
    }
}
