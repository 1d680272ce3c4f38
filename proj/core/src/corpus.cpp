#include "segtopics/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "segtopics/error.hpp"

namespace segtopics {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ValidationError(path + ": " + message);
}

const json& require(const json& object, const std::string& key, const std::string& path) {
    const auto it = object.find(key);
    if (it == object.end()) {
        fail(path + key, "missing required field");
    }
    return *it;
}

std::string require_string(const json& object, const std::string& key, const std::string& path) {
    const json& value = require(object, key, path);
    if (!value.is_string()) {
        fail(path + key, "expected a string");
    }
    return value.get<std::string>();
}

double require_number(const json& object, const std::string& key, const std::string& path) {
    const json& value = require(object, key, path);
    if (!value.is_number()) {
        fail(path + key, "expected a number");
    }
    return value.get<double>();
}

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        return false;
    }
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            return false;
        }
    }
    const int month = std::stoi(s.substr(5, 2));
    const int day = std::stoi(s.substr(8, 2));
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

bool has_wav_extension(const std::string& path) {
    if (path.size() < 4) {
        return false;
    }
    std::string ext = path.substr(path.size() - 4);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".wav";
}

RecordingManifest manifest_from_json(const json& doc) {
    if (!doc.is_object()) {
        fail("$", "expected a JSON object");
    }
    const std::string root = "$.";
    RecordingManifest m;
    m.id = require_string(doc, "id", root);
    m.language = require_string(doc, "language", root);
    m.duration_sec = require_number(doc, "duration_sec", root);

    if (const auto it = doc.find("date"); it != doc.end() && !it->is_null()) {
        if (!it->is_string()) {
            fail("$.date", "expected a string");
        }
        m.date = it->get<std::string>();
    }
    if (const auto it = doc.find("audio_path"); it != doc.end() && !it->is_null()) {
        if (!it->is_string()) {
            fail("$.audio_path", "expected a string or null");
        }
        m.audio_path = it->get<std::string>();
    }

    const json& chapters = require(doc, "chapters", root);
    if (!chapters.is_array()) {
        fail("$.chapters", "expected an array");
    }
    for (std::size_t i = 0; i < chapters.size(); ++i) {
        const std::string path = "$.chapters[" + std::to_string(i) + "].";
        const json& entry = chapters[i];
        if (!entry.is_object()) {
            fail(path.substr(0, path.size() - 1), "expected an object");
        }
        Chapter chapter;
        chapter.start_sec = require_number(entry, "start_sec", path);
        if (const auto it = entry.find("title"); it != entry.end() && !it->is_null()) {
            if (!it->is_string()) {
                fail(path + "title", "expected a string");
            }
            chapter.title = it->get<std::string>();
        }
        m.chapters.push_back(std::move(chapter));
    }
    validate_manifest(m);
    return m;
}

json manifest_to_json(const RecordingManifest& m) {
    json chapters = json::array();
    for (const Chapter& c : m.chapters) {
        chapters.push_back({{"start_sec", c.start_sec}, {"title", c.title}});
    }
    json doc;
    doc["id"] = m.id;
    doc["language"] = m.language;
    doc["date"] = m.date.empty() ? json(nullptr) : json(m.date);
    doc["duration_sec"] = m.duration_sec;
    doc["audio_path"] = m.audio_path ? json(*m.audio_path) : json(nullptr);
    doc["chapters"] = std::move(chapters);
    return doc;
}

} // namespace

void validate_manifest(const RecordingManifest& m) {
    if (m.id.empty()) {
        fail("$.id", "must be non-empty");
    }
    if (m.language.size() != 2 ||
        !std::all_of(m.language.begin(), m.language.end(),
                     [](unsigned char c) { return std::islower(c) != 0; })) {
        fail("$.language", "expected a two-letter ISO 639-1 code, got \"" + m.language + "\"");
    }
    if (!m.date.empty() && !is_iso_date(m.date)) {
        fail("$.date", "expected YYYY-MM-DD, got \"" + m.date + "\"");
    }
    if (!std::isfinite(m.duration_sec) || m.duration_sec < 0.0) {
        fail("$.duration_sec", "must be a finite non-negative number");
    }
    if (m.audio_path && !has_wav_extension(*m.audio_path)) {
        fail("$.audio_path", "expected a .wav file, got \"" + *m.audio_path + "\"");
    }
    if (m.chapters.empty()) {
        fail("$.chapters", "must contain at least one chapter");
    }
    for (std::size_t i = 0; i < m.chapters.size(); ++i) {
        const std::string path = "$.chapters[" + std::to_string(i) + "].start_sec";
        const double start = m.chapters[i].start_sec;
        if (!std::isfinite(start) || start < 0.0) {
            fail(path, "must be a finite non-negative number");
        }
        if (i == 0 && start != 0.0) {
            fail(path, "first chapter must start at 0");
        }
        if (i > 0 && start <= m.chapters[i - 1].start_sec) {
            fail(path, "chapters not strictly increasing");
        }
        if (start >= m.duration_sec && !(i == 0 && m.duration_sec == 0.0)) {
            fail(path, "chapter starts at or after duration_sec");
        }
    }
}

RecordingManifest parse_manifest(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
    }
    return manifest_from_json(doc);
}

std::string serialize_manifest(const RecordingManifest& manifest) {
    return manifest_to_json(manifest).dump();
}

std::vector<RecordingManifest> parse_manifest_lines(std::string_view text) {
    std::vector<RecordingManifest> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        const std::string_view line = text.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        try {
            out.push_back(parse_manifest(line));
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::string serialize_manifest_lines(std::span<const RecordingManifest> manifests) {
    std::string out;
    for (const RecordingManifest& m : manifests) {
        out += serialize_manifest(m);
        out += '\n';
    }
    return out;
}

BlockTimeline make_blocks(double duration_sec, double window_sec, double min_tail_sec) {
    if (!(window_sec > 0.0) || !std::isfinite(window_sec)) {
        throw ValidationError("window_sec must be positive");
    }
    if (!std::isfinite(duration_sec) || duration_sec < min_tail_sec) {
        throw ValidationError("recording too short: duration " + std::to_string(duration_sec) +
                              " s is below the minimum block length " +
                              std::to_string(min_tail_sec) + " s");
    }
    // Tolerate representation error so that e.g. 0.3 / 0.1 counts three windows.
    constexpr double kSlack = 1e-9;
    const auto full = static_cast<std::size_t>(std::floor(duration_sec / window_sec + kSlack));

    BlockTimeline timeline;
    timeline.spans.reserve(full + 1);
    for (std::size_t i = 0; i < full; ++i) {
        timeline.spans.push_back({static_cast<double>(i) * window_sec,
                                  static_cast<double>(i + 1) * window_sec});
    }
    const double covered = static_cast<double>(full) * window_sec;
    const double tail = duration_sec - covered;
    if (tail > kSlack && tail + kSlack >= min_tail_sec) {
        timeline.spans.push_back({covered, duration_sec});
    }
    return timeline;
}

Segmentation derive_labels(const BlockTimeline& timeline, const RecordingManifest& manifest) {
    if (timeline.spans.empty()) {
        throw ValidationError("derive_labels: empty timeline");
    }
    if (manifest.chapters.empty()) {
        throw ValidationError("derive_labels: manifest has no chapters");
    }
    auto chapter_of = [&](double t) {
        const auto it = std::upper_bound(
            manifest.chapters.begin(), manifest.chapters.end(), t,
            [](double value, const Chapter& c) { return value < c.start_sec; });
        return static_cast<std::size_t>(std::max<std::ptrdiff_t>(
            0, std::distance(manifest.chapters.begin(), it) - 1));
    };

    std::vector<int> gaps;
    std::size_t previous = chapter_of(timeline.spans.front().midpoint());
    for (std::size_t b = 1; b < timeline.spans.size(); ++b) {
        const std::size_t current = chapter_of(timeline.spans[b].midpoint());
        if (current != previous) {
            gaps.push_back(static_cast<int>(b));
        }
        previous = current;
    }
    return Segmentation(static_cast<int>(timeline.spans.size()), std::move(gaps));
}

CorpusSplit split_corpus(std::span<const RecordingManifest> manifests, SplitRatios ratios) {
    const std::size_t n = manifests.size();
    if (n < 3) {
        throw ValidationError("split_corpus needs at least 3 recordings, got " + std::to_string(n));
    }
    for (double r : ratios) {
        if (!(r >= 0.0)) {
            throw ValidationError("split ratios must be non-negative");
        }
    }
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
        throw ValidationError("split ratios must sum to 1");
    }

    std::vector<const RecordingManifest*> order;
    order.reserve(n);
    std::set<std::string> seen;
    for (const RecordingManifest& m : manifests) {
        if (m.date.empty()) {
            throw ValidationError("recording \"" + m.id + "\" has no date; cannot sort chronologically");
        }
        if (!seen.insert(m.id).second) {
            throw ValidationError("duplicate recording id \"" + m.id + "\"");
        }
        order.push_back(&m);
    }
    std::sort(order.begin(), order.end(), [](const RecordingManifest* a, const RecordingManifest* b) {
        return a->date != b->date ? a->date < b->date : a->id < b->id;
    });

    const auto total = static_cast<long long>(n);
    long long n_train = std::llround(ratios[0] * static_cast<double>(n));
    long long n_dev = std::max(1LL, std::llround(ratios[1] * static_cast<double>(n)));
    n_train = std::clamp(n_train, 1LL, total - 2);
    while (n_train + n_dev > total - 1) {
        if (n_train > 1) {
            --n_train;
        } else {
            --n_dev;
        }
    }

    CorpusSplit split;
    for (long long i = 0; i < total; ++i) {
        const std::string& id = order[static_cast<std::size_t>(i)]->id;
        if (i < n_train) {
            split.train.push_back(id);
        } else if (i < n_train + n_dev) {
            split.dev.push_back(id);
        } else {
            split.test.push_back(id);
        }
    }
    return split;
}

} // namespace segtopics
