#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segtopics/segmentation.hpp"

namespace segtopics {

struct Chapter {
    double start_sec = 0.0;
    std::string title;

    friend bool operator==(const Chapter&, const Chapter&) = default;
};

// One chaptered recording. Invariants (enforced by parse_manifest and
// validate_manifest): chapters non-empty, chapters[0] at 0.0, starts
// strictly increasing and below duration_sec.
struct RecordingManifest {
    std::string id;
    std::string language;
    std::string date; // YYYY-MM-DD, may be empty
    double duration_sec = 0.0;
    std::optional<std::string> audio_path;
    std::vector<Chapter> chapters;

    friend bool operator==(const RecordingManifest&, const RecordingManifest&) = default;
};

// Throws ValidationError naming the offending field path.
void validate_manifest(const RecordingManifest& manifest);

RecordingManifest parse_manifest(std::string_view json_text);
std::string serialize_manifest(const RecordingManifest& manifest);

// JSON-lines corpus: one manifest per non-blank line. Errors carry the
// 1-based line number.
std::vector<RecordingManifest> parse_manifest_lines(std::string_view text);
std::string serialize_manifest_lines(std::span<const RecordingManifest> manifests);

struct BlockSpan {
    double start_sec = 0.0;
    double end_sec = 0.0;

    double length() const { return end_sec - start_sec; }
    double midpoint() const { return 0.5 * (start_sec + end_sec); }

    friend bool operator==(const BlockSpan&, const BlockSpan&) = default;
};

struct BlockTimeline {
    std::vector<BlockSpan> spans;

    std::size_t size() const { return spans.size(); }
    double extent() const { return spans.empty() ? 0.0 : spans.back().end_sec; }
};

inline constexpr double kDefaultWindowSec = 10.0;
inline constexpr double kDefaultMinTailSec = 2.0;

// Fixed non-overlapping windows; a trailing partial window is kept iff it
// is at least min_tail_sec long.
BlockTimeline make_blocks(double duration_sec, double window_sec = kDefaultWindowSec,
                          double min_tail_sec = kDefaultMinTailSec);

// Each block belongs to the chapter containing its midpoint; a gap is a
// boundary iff the two adjacent blocks belong to different chapters.
Segmentation derive_labels(const BlockTimeline& timeline, const RecordingManifest& manifest);

struct CorpusSplit {
    std::vector<std::string> train;
    std::vector<std::string> dev;
    std::vector<std::string> test;
};

using SplitRatios = std::array<double, 3>;
inline constexpr SplitRatios kDefaultSplitRatios{0.90, 0.05, 0.05};

// Sorts by (date, id) and cuts train/dev/test in order. Requires N >= 3
// and a date on every manifest; every split is non-empty.
CorpusSplit split_corpus(std::span<const RecordingManifest> manifests,
                         SplitRatios ratios = kDefaultSplitRatios);

} // namespace segtopics
