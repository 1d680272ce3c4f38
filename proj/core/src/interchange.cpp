#include "segtopics/interchange.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "segtopics/error.hpp"

namespace segtopics {

namespace {

using nlohmann::json;

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
    }
}

Segmentation segmentation_from_json(const json& doc) {
    const auto n = doc.find("n_units");
    const auto b = doc.find("boundaries");
    if (n == doc.end() || !n->is_number_integer()) {
        throw ValidationError("$.n_units: missing or not an integer");
    }
    if (b == doc.end() || !b->is_array()) {
        throw ValidationError("$.boundaries: missing or not an array");
    }
    std::vector<int> gaps;
    for (std::size_t i = 0; i < b->size(); ++i) {
        if (!(*b)[i].is_number_integer()) {
            throw ValidationError("$.boundaries[" + std::to_string(i) + "]: expected an integer");
        }
        gaps.push_back((*b)[i].get<int>());
    }
    return Segmentation(n->get<int>(), std::move(gaps));
}

TimedSegmentation timed_from_json(const json& doc) {
    const auto s = doc.find("segments");
    if (s == doc.end() || !s->is_array()) {
        throw ValidationError("$.segments: missing or not an array");
    }
    std::vector<TimedSpan> spans;
    for (std::size_t i = 0; i < s->size(); ++i) {
        const json& pair = (*s)[i];
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
            throw ValidationError("$.segments[" + std::to_string(i) + "]: expected [start, end]");
        }
        spans.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    return TimedSegmentation(std::move(spans));
}

} // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                                 ec.message());
    }
}

std::string segmentation_to_json(const Segmentation& seg, const GapScores* scores) {
    json doc;
    doc["n_units"] = seg.n_units();
    doc["boundaries"] = seg.boundaries();
    if (scores != nullptr) {
        doc["scores"] = scores->values;
        doc["score_kind"] = std::string(to_string(scores->kind));
    }
    return doc.dump();
}

Segmentation parse_segmentation(std::string_view json_text) {
    return segmentation_from_json(parse_json(json_text));
}

std::string timed_to_json(const TimedSegmentation& seg) {
    json segments = json::array();
    for (const TimedSpan& s : seg.segments()) {
        segments.push_back({s.start_sec, s.end_sec});
    }
    return json{{"segments", std::move(segments)}}.dump();
}

TimedSegmentation parse_timed_segmentation(std::string_view json_text) {
    return timed_from_json(parse_json(json_text));
}

SegmentationFile parse_segmentation_file(std::string_view json_text) {
    const json doc = parse_json(json_text);
    if (!doc.is_object()) {
        throw ValidationError("$: expected a JSON object");
    }
    if (doc.contains("n_units")) {
        return segmentation_from_json(doc);
    }
    if (doc.contains("segments")) {
        return timed_from_json(doc);
    }
    throw ValidationError("$: expected either \"n_units\"/\"boundaries\" or \"segments\"");
}

std::string report_to_json(const MetricReport& report, bool has_window_metrics,
                           std::optional<std::string> id) {
    json doc;
    if (id) {
        doc["id"] = *id;
    }
    doc["pk"] = has_window_metrics ? json(report.pk) : json(nullptr);
    doc["windiff"] = has_window_metrics ? json(report.windiff) : json(nullptr);
    doc["purity"] = report.purity;
    doc["coverage"] = report.coverage;
    doc["spcf"] = report.spcf;
    doc["k"] = has_window_metrics ? json(report.k_used) : json(nullptr);
    doc["n_units"] = report.n_units;
    return doc.dump();
}

} // namespace segtopics
