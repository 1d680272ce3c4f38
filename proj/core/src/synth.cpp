#include "segtopics/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <Eigen/Core>

#include "segtopics/error.hpp"
#include "segtopics/interchange.hpp"
#include "segtopics/random.hpp"

namespace segtopics {

namespace {

std::string word_for(int index) {
    // Letters only, so the tokenizer keeps every word intact.
    std::string word = "w";
    do {
        word += static_cast<char>('a' + index % 26);
        index /= 26;
    } while (index > 0);
    return word;
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

std::string date_after(int days) {
    static constexpr int kMonthDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int year = 2020;
    int month = 0;
    while (days >= (is_leap(year) ? 366 : 365)) {
        days -= is_leap(year) ? 366 : 365;
        ++year;
    }
    while (true) {
        const int len = kMonthDays[month] + (month == 1 && is_leap(year) ? 1 : 0);
        if (days < len) {
            break;
        }
        days -= len;
        ++month;
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month + 1, days + 1);
    return buf;
}

// Segment lengths >= min_len summing to n, uniform over compositions.
std::vector<int> segment_lengths(int n, int topics, int min_len, Rng& rng) {
    const int extra = n - topics * min_len;
    // Stars and bars: choose topics-1 bar positions among extra+topics-1 slots.
    std::vector<int> slots(static_cast<std::size_t>(extra + topics - 1));
    std::iota(slots.begin(), slots.end(), 0);
    rng.shuffle(std::span<int>(slots));
    std::vector<int> bars(slots.begin(), slots.begin() + (topics - 1));
    std::sort(bars.begin(), bars.end());
    std::vector<int> lengths;
    int previous = -1;
    for (int bar : bars) {
        lengths.push_back(min_len + (bar - previous - 1));
        previous = bar;
    }
    lengths.push_back(min_len + (extra + topics - 1 - previous - 1));
    return lengths;
}

Eigen::MatrixXd topic_centroids(int topics, int dim, double separation, Rng& rng) {
    Eigen::MatrixXd c(topics, dim);
    for (int t = 0; t < topics; ++t) {
        for (int j = 0; j < dim; ++j) {
            c(t, j) = rng.normal();
        }
        if (t < dim) {
            for (int s = 0; s < t; ++s) {
                c.row(t) -= c.row(t).dot(c.row(s)) * c.row(s);
            }
        }
        c.row(t).normalize();
    }
    // Orthonormal rows scaled by separation / sqrt(2) are exactly
    // `separation` apart.
    return c * (separation / std::sqrt(2.0));
}

} // namespace

SynthText synth_text(std::uint64_t seed, int tokens_per_topic, int n_topics, int vocab_size_per_topic, int w) {
    if (tokens_per_topic < 1 || n_topics < 1 || vocab_size_per_topic < 1 || w < 1) {
        throw ValidationError("synth_text parameters must be positive");
    }
    Rng rng(seed);
    std::string text;
    std::vector<int> gaps;
    const int total_tokens = tokens_per_topic * n_topics;
    const int n_units = total_tokens / w;
    for (int topic = 0; topic < n_topics; ++topic) {
        if (topic > 0) {
            const int gap = static_cast<int>(std::lround(static_cast<double>(topic * tokens_per_topic) / w));
            if (gap >= 1 && gap <= n_units - 1) {
                gaps.push_back(gap);
            }
        }
        for (int i = 0; i < tokens_per_topic; ++i) {
            const int word = topic * vocab_size_per_topic +
                             static_cast<int>(rng.below(static_cast<std::size_t>(vocab_size_per_topic)));
            text += word_for(word);
            const int position = topic * tokens_per_topic + i + 1;
            text += position % 15 == 0 ? ".\n" : " ";
        }
    }
    return {std::move(text), Segmentation(std::max(n_units, 1), std::move(gaps))};
}

void SynthSpec::validate() const {
    if (n_recordings < 1 || dim < 1 || min_blocks < 1 || max_blocks < min_blocks || min_topics < 1 ||
        max_topics < min_topics || min_segment_blocks < 1) {
        throw ValidationError("synth spec ranges must be positive and non-empty");
    }
    if (min_topics * min_segment_blocks > max_blocks) {
        throw ValidationError("synth spec cannot fit min_topics segments of min_segment_blocks");
    }
    if (!(cluster_separation > 0.0) || !(noise_sigma >= 0.0) || !(window_sec > 0.0)) {
        throw ValidationError("synth spec needs separation > 0, sigma >= 0 and window_sec > 0");
    }
}

SynthCorpus synth_embeddings(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    SynthCorpus corpus;
    const double noise_scale = spec.noise_sigma / std::sqrt(static_cast<double>(spec.dim));
    std::size_t correct = 0;
    std::size_t total = 0;

    for (int r = 0; r < spec.n_recordings; ++r) {
        const int n_blocks = rng.between(spec.min_blocks, spec.max_blocks);
        const int max_topics = std::min(spec.max_topics, n_blocks / spec.min_segment_blocks);
        const int topics = rng.between(std::min(spec.min_topics, max_topics), max_topics);
        const std::vector<int> lengths = segment_lengths(n_blocks, topics, spec.min_segment_blocks, rng);
        const Eigen::MatrixXd centroids = topic_centroids(topics, spec.dim, spec.cluster_separation, rng);

        SynthRecording rec;
        char id[32];
        std::snprintf(id, sizeof id, "synth-%05d", r);
        rec.manifest.id = id;
        rec.manifest.language = "en";
        rec.manifest.date = date_after(r);
        rec.manifest.duration_sec = n_blocks * spec.window_sec;
        rec.embeddings = BlockEmbeddingSequence(static_cast<std::size_t>(n_blocks),
                                                static_cast<std::size_t>(spec.dim));
        std::vector<int> gaps;
        int block = 0;
        for (int t = 0; t < topics; ++t) {
            rec.manifest.chapters.push_back({block * spec.window_sec, "topic " + std::to_string(t + 1)});
            if (t > 0) {
                gaps.push_back(block);
            }
            for (int i = 0; i < lengths[static_cast<std::size_t>(t)]; ++i, ++block) {
                rec.topic_of_block.push_back(t);
                rec.timeline.spans.push_back({block * spec.window_sec, (block + 1) * spec.window_sec});
                Eigen::VectorXd v = centroids.row(t).transpose();
                for (int j = 0; j < spec.dim; ++j) {
                    v(j) += noise_scale * rng.normal();
                    rec.embeddings.at(static_cast<std::size_t>(block), static_cast<std::size_t>(j)) =
                        static_cast<float>(v(j));
                }
                Eigen::Index nearest = 0;
                (centroids.rowwise() - v.transpose()).rowwise().squaredNorm().minCoeff(&nearest);
                correct += nearest == t ? 1 : 0;
                ++total;
            }
        }
        rec.labels = Segmentation(n_blocks, std::move(gaps));
        corpus.recordings.push_back(std::move(rec));
    }
    corpus.centroid_accuracy = static_cast<double>(correct) / static_cast<double>(total);
    return corpus;
}

SynthSpec head_oracle_spec(std::uint64_t seed) {
    SynthSpec spec;
    spec.seed = seed;
    spec.n_recordings = kHeadOracleTrain + kHeadOracleDev;
    spec.dim = 32;
    spec.cluster_separation = 4.0;
    spec.noise_sigma = 1.0;
    return spec;
}

void save_synth_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir, int train_count) {
    std::filesystem::create_directories(dir / "emb");
    std::filesystem::create_directories(dir / "labels");
    std::vector<RecordingManifest> manifests;
    for (const SynthRecording& rec : corpus.recordings) {
        manifests.push_back(rec.manifest);
        save_embeddings(rec.embeddings, dir / "emb" / (rec.manifest.id + ".emb"));
        write_file_atomic(dir / "labels" / (rec.manifest.id + ".json"), segmentation_to_json(rec.labels) + "\n");
        write_file_atomic(dir / "labels" / (rec.manifest.id + ".timed.json"),
                          timed_to_json(labels_to_timed(rec.labels, rec.timeline)) + "\n");
    }
    write_file_atomic(dir / "manifests.jsonl", serialize_manifest_lines(manifests));
    if (train_count > 0) {
        const auto cut = static_cast<std::size_t>(std::min<int>(train_count, static_cast<int>(manifests.size())));
        write_file_atomic(dir / "train.jsonl",
                          serialize_manifest_lines(std::span(manifests).first(cut)));
        write_file_atomic(dir / "dev.jsonl",
                          serialize_manifest_lines(std::span(manifests).subspan(cut)));
    }
}

} // namespace segtopics
