#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segtopics/segmentation.hpp"

namespace segtopics {

// Lowercased runs of Unicode letters/digits (combining marks stay attached
// to the preceding letter). Everything else separates tokens.
std::vector<std::string> tokenize(std::string_view text);

struct TokenSequenceStream {
    int w = 20;
    std::vector<std::vector<int>> sequences; // token indices into vocab
    std::vector<std::string> vocab;

    std::size_t size() const { return sequences.size(); }
};

// Consecutive w-token sequences; a trailing partial sequence is dropped.
TokenSequenceStream build_token_sequences(std::span<const std::string> tokens, int w = 20);

// Cosine of two count vectors; 0 when either has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// One score per gap between token sequences: cosine of the token counts in
// the up-to-blocksize sequences on each side of the gap.
GapScores block_similarity(const TokenSequenceStream& stream, int blocksize = 10);

// Moving average over [i - width, i + width], clipped at the edges.
GapScores smooth(const GapScores& scores, int width = 2, int rounds = 1);

// depth(g) = s(l) + s(r) - 2 s(g), where l and r are reached by climbing
// from g towards the nearest peak on each side. Never negative.
GapScores depth_scores(const GapScores& similarities);

// Gaps whose depth is strictly above mean - stddev / 2 (population
// stddev). Candidates are accepted in descending depth order and dropped
// when an accepted boundary lies fewer than min_separation gaps away;
// min_separation = 1 disables the suppression.
Segmentation assign_boundaries(const GapScores& depths, int min_separation = 4);

struct TextTilingParams {
    int w = 20;
    int blocksize = 10;
    int smooth_width = 2;
    int smooth_rounds = 1;
    int min_separation = 4;
};

struct TextTilingResult {
    Segmentation segmentation; // units are token sequences
    GapScores similarity;
    GapScores smoothed;
    GapScores depth;
};

// Throws ValidationError("text too short ...") below two token sequences.
TextTilingResult texttile(std::string_view text, const TextTilingParams& params = {});

} // namespace segtopics
