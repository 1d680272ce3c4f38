#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "segtopics/embedio.hpp"
#include "segtopics/model.hpp"
#include "segtopics/optim.hpp"
#include "segtopics/segmentation.hpp"

namespace segtopics {

struct LabeledSequence {
    std::string id;
    BlockEmbeddingSequence embeddings;
    Segmentation labels;
};

struct TrainConfig {
    double lr0 = 0.001;
    PlateauConfig scheduler;
    AdamHyper adam;
    int max_epochs = 30;
    int early_stop_patience = 5; // epochs without a dev Pk improvement
    std::uint64_t seed = 0;
    double threshold = 0.5; // decision threshold used for dev Pk

    void validate() const;
};

struct EpochRecord {
    int epoch = 0; // 1-based
    double train_loss = 0.0;
    double dev_loss = 0.0;
    double dev_pk = 0.0;
    double dev_windiff = 0.0;
    double best_dev_pk = 0.0;
    double lr = 0.0; // learning rate used during this epoch
};

struct TrainResult {
    HeadModel model; // checkpoint with the best dev Pk
    std::vector<EpochRecord> log;
    int best_epoch = 0;
};

// Called after every epoch; useful for progress logging.
using EpochCallback = std::function<void(const EpochRecord&)>;

// One recording per optimizer step in a seeded shuffled order. After each
// epoch: dev loss drives the plateau scheduler, dev Pk drives checkpoint
// selection and early stopping. The head config's input_dim must match
// the corpus. Deterministic for a fixed seed.
TrainResult train(std::span<const LabeledSequence> train_set, std::span<const LabeledSequence> dev_set,
                  const HeadConfig& head_config, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

struct Inference {
    Segmentation segmentation;
    GapScores scores; // probability per gap, length n - 1
};

// Boundary at gap k iff probability_k >= threshold.
Inference infer(const BlockEmbeddingSequence& embeddings, const HeadModel& model, double threshold);
Segmentation threshold_scores(const GapScores& scores, double threshold);

struct DevEvaluation {
    double loss = 0.0;
    double pk = 0.0;
    double windiff = 0.0;
};

// Mean dev loss, Pk and WinDiff (per recording, k from the reference).
// Recordings with fewer than two blocks are skipped.
DevEvaluation evaluate_model(std::span<const LabeledSequence> dev_set, const HeadModel& model,
                             double threshold);

// 0.05, 0.10, ..., 0.95.
std::vector<double> threshold_grid();

// Grid threshold minimising mean dev Pk; ties go to the lower threshold.
double sweep_threshold(std::span<const LabeledSequence> dev_set, const HeadModel& model);

// Same, over precomputed per-gap scores paired with references.
double sweep_threshold(std::span<const GapScores> scores, std::span<const Segmentation> references);

} // namespace segtopics
