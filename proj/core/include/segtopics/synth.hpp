#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "segtopics/corpus.hpp"
#include "segtopics/embedio.hpp"
#include "segtopics/segmentation.hpp"

namespace segtopics {

struct SynthText {
    std::string text;
    Segmentation truth; // over token sequences of length w
};

// Topics drawn from disjoint vocabularies, tokens sampled uniformly within
// each topic's vocabulary. Boundaries sit at the topic junctions expressed
// in w-token sequences.
SynthText synth_text(std::uint64_t seed, int tokens_per_topic, int n_topics, int vocab_size_per_topic,
                     int w = 20);

struct SynthSpec {
    std::uint64_t seed = 0;
    int n_recordings = 240;
    int min_blocks = 16;
    int max_blocks = 48;
    int min_topics = 2;
    int max_topics = 6;
    int min_segment_blocks = 3;
    int dim = 32;
    double cluster_separation = 4.0; // distance between topic centroids
    // Noise is isotropic Gaussian scaled so that E|noise|^2 = sigma^2,
    // i.e. per-coordinate standard deviation sigma / sqrt(dim).
    double noise_sigma = 1.0;
    double window_sec = 10.0;

    void validate() const;
};

struct SynthRecording {
    RecordingManifest manifest;
    BlockEmbeddingSequence embeddings;
    Segmentation labels;
    BlockTimeline timeline;
    std::vector<int> topic_of_block;
};

struct SynthCorpus {
    std::vector<SynthRecording> recordings;
    // Fraction of blocks whose nearest centroid (within their recording)
    // is their own topic's centroid.
    double centroid_accuracy = 0.0;
};

// Per recording: topic centroids at pairwise distance cluster_separation
// (orthogonal directions while topics <= dim), one vector per block drawn
// around its topic's centroid. Bit-identical for identical specs.
SynthCorpus synth_embeddings(const SynthSpec& spec);

// The learnability preset: 240 recordings, d = 32, separation 4, sigma 1.
SynthSpec head_oracle_spec(std::uint64_t seed = 7);
inline constexpr int kHeadOracleTrain = 200;
inline constexpr int kHeadOracleDev = 40;

// Writes manifests.jsonl, emb/<id>.emb, labels/<id>.json and
// labels/<id>.timed.json under dir.
// When train_count > 0, also train.jsonl (first train_count recordings)
// and dev.jsonl (the rest).
void save_synth_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir, int train_count = 0);

} // namespace segtopics
