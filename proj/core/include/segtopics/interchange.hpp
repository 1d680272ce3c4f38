#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "segtopics/metrics.hpp"
#include "segtopics/segmentation.hpp"

namespace segtopics {

// Whole-file read; ValidationError naming the path when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes to "<path>.tmp" and renames over path, so readers never observe a
// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// {"n_units": int, "boundaries": [int, ...]} with an optional "scores"
// array of per-gap values.
std::string segmentation_to_json(const Segmentation& seg, const GapScores* scores = nullptr);
Segmentation parse_segmentation(std::string_view json_text);

// {"segments": [[start, end], ...]}
std::string timed_to_json(const TimedSegmentation& seg);
TimedSegmentation parse_timed_segmentation(std::string_view json_text);

// Either form, detected by which key is present.
using SegmentationFile = std::variant<Segmentation, TimedSegmentation>;
SegmentationFile parse_segmentation_file(std::string_view json_text);

// {"pk", "windiff", "purity", "coverage", "spcf", "k", "n_units"}; pk and
// windiff are null when only timed segmentations were compared.
std::string report_to_json(const MetricReport& report, bool has_window_metrics = true,
                           std::optional<std::string> id = std::nullopt);

} // namespace segtopics
