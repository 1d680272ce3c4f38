#include "segtopics/texttiling.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "segtopics/error.hpp"

namespace segtopics {

namespace {

void append_utf8(std::string& out, UChar32 c) {
    char buf[U8_MAX_LENGTH];
    int32_t len = 0;
    U8_APPEND_UNSAFE(buf, len, c);
    out.append(buf, static_cast<std::size_t>(len));
}

void require_kind(const GapScores& scores, ScoreKind kind, const char* op) {
    if (scores.kind != kind) {
        throw ValidationError(std::string(op) + " expects " + std::string(to_string(kind)) +
                              " scores, got " + std::string(to_string(scores.kind)));
    }
}

} // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
    const auto length = static_cast<int32_t>(text.size());
    int32_t i = 0;
    while (i < length) {
        UChar32 c = 0;
        U8_NEXT(bytes, i, length, c);
        const bool mark = c >= 0 && (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0;
        if (c >= 0 && (u_isalnum(c) || (mark && !current.empty()))) {
            append_utf8(current, u_tolower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

TokenSequenceStream build_token_sequences(std::span<const std::string> tokens, int w) {
    if (w < 1) {
        throw ValidationError("token sequence length w must be >= 1");
    }
    TokenSequenceStream stream;
    stream.w = w;
    std::unordered_map<std::string, int> index;
    const std::size_t count = tokens.size() / static_cast<std::size_t>(w);
    stream.sequences.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        std::vector<int> seq;
        seq.reserve(static_cast<std::size_t>(w));
        for (std::size_t t = 0; t < static_cast<std::size_t>(w); ++t) {
            const std::string& token = tokens[s * static_cast<std::size_t>(w) + t];
            auto [it, inserted] = index.try_emplace(token, static_cast<int>(stream.vocab.size()));
            if (inserted) {
                stream.vocab.push_back(token);
            }
            seq.push_back(it->second);
        }
        stream.sequences.push_back(std::move(seq));
    }
    return stream;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ValidationError("cosine_similarity: vector lengths differ");
    }
    double dot = 0.0;
    double norm_a = 0.0;
    double norm_b = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        dot += a[t] * b[t];
        norm_a += a[t] * a[t];
        norm_b += b[t] * b[t];
    }
    if (norm_a == 0.0 || norm_b == 0.0) {
        return 0.0;
    }
    return dot / std::sqrt(norm_a * norm_b);
}

GapScores block_similarity(const TokenSequenceStream& stream, int blocksize) {
    if (stream.size() < 2) {
        throw ValidationError("block_similarity needs at least 2 token sequences, got " +
                              std::to_string(stream.size()));
    }
    if (blocksize < 1) {
        throw ValidationError("blocksize must be >= 1");
    }
    const auto n_seq = static_cast<int>(stream.size());
    const std::size_t vocab = stream.vocab.size();
    std::vector<double> left(vocab);
    std::vector<double> right(vocab);

    auto count_into = [&](std::vector<double>& counts, int first, int last) {
        std::fill(counts.begin(), counts.end(), 0.0);
        for (int s = first; s <= last; ++s) {
            for (int token : stream.sequences[static_cast<std::size_t>(s)]) {
                counts[static_cast<std::size_t>(token)] += 1.0;
            }
        }
    };

    GapScores out;
    out.kind = ScoreKind::similarity;
    out.values.reserve(static_cast<std::size_t>(n_seq - 1));
    // Gap g (1-based) sits after sequence g; 0-based sequences g-1 | g.
    for (int g = 1; g < n_seq; ++g) {
        count_into(left, std::max(0, g - blocksize), g - 1);
        count_into(right, g, std::min(n_seq - 1, g + blocksize - 1));
        out.values.push_back(cosine_similarity(left, right));
    }
    return out;
}

GapScores smooth(const GapScores& scores, int width, int rounds) {
    if (width < 1) {
        throw ValidationError("smoothing width must be >= 1");
    }
    GapScores current = scores;
    const auto n = static_cast<std::ptrdiff_t>(scores.size());
    std::vector<double> next(scores.size());
    for (int round = 0; round < rounds; ++round) {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - width);
            const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + width);
            double sum = 0.0;
            for (std::ptrdiff_t j = lo; j <= hi; ++j) {
                sum += current.values[static_cast<std::size_t>(j)];
            }
            next[static_cast<std::size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
        }
        current.values.swap(next);
    }
    return current;
}

GapScores depth_scores(const GapScores& similarities) {
    require_kind(similarities, ScoreKind::similarity, "depth_scores");
    const std::vector<double>& s = similarities.values;
    GapScores out;
    out.kind = ScoreKind::depth;
    out.values.resize(s.size(), 0.0);
    for (std::size_t g = 0; g < s.size(); ++g) {
        std::size_t l = g;
        while (l > 0 && s[l - 1] >= s[l]) {
            --l;
        }
        std::size_t r = g;
        while (r + 1 < s.size() && s[r + 1] >= s[r]) {
            ++r;
        }
        out.values[g] = std::max(0.0, s[l] + s[r] - 2.0 * s[g]);
    }
    return out;
}

Segmentation assign_boundaries(const GapScores& depths, int min_separation) {
    require_kind(depths, ScoreKind::depth, "assign_boundaries");
    const std::vector<double>& d = depths.values;
    if (d.empty()) {
        throw ValidationError("assign_boundaries needs at least one gap");
    }
    const auto count = static_cast<double>(d.size());
    // Shifted by d[0] so equal depths give cutoff == depth exactly.
    double shifted = 0.0;
    for (double v : d) {
        shifted += v - d[0];
    }
    const double offset = shifted / count;
    double var = 0.0;
    for (double v : d) {
        var += (v - d[0] - offset) * (v - d[0] - offset);
    }
    const double cutoff = d[0] + offset - std::sqrt(var / count) / 2.0;

    std::vector<int> candidates;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] > cutoff) {
            candidates.push_back(static_cast<int>(i));
        }
    }
    // Deepest first; equal depths resolve towards the later gap.
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        const double da = d[static_cast<std::size_t>(a)];
        const double db = d[static_cast<std::size_t>(b)];
        return da != db ? da > db : a > b;
    });
    std::vector<int> accepted;
    for (int c : candidates) {
        const bool crowded = std::any_of(accepted.begin(), accepted.end(),
                                         [&](int a) { return std::abs(a - c) < min_separation; });
        if (!crowded) {
            accepted.push_back(c);
        }
    }
    std::vector<int> gaps;
    gaps.reserve(accepted.size());
    for (int a : accepted) {
        gaps.push_back(a + 1);
    }
    return Segmentation(static_cast<int>(d.size()) + 1, std::move(gaps));
}

TextTilingResult texttile(std::string_view text, const TextTilingParams& params) {
    const std::vector<std::string> tokens = tokenize(text);
    const TokenSequenceStream stream = build_token_sequences(tokens, params.w);
    if (stream.size() < 2) {
        throw ValidationError("text too short: " + std::to_string(tokens.size()) +
                              " tokens give fewer than 2 sequences of w=" + std::to_string(params.w));
    }
    TextTilingResult result;
    result.similarity = block_similarity(stream, params.blocksize);
    result.smoothed = smooth(result.similarity, params.smooth_width, params.smooth_rounds);
    result.depth = depth_scores(result.smoothed);
    result.segmentation = assign_boundaries(result.depth, params.min_separation);
    return result;
}

} // namespace segtopics
