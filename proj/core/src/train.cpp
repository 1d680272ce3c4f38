#include "segtopics/train.hpp"

#include <limits>
#include <numeric>
#include <string>

#include "segtopics/error.hpp"
#include "segtopics/metrics.hpp"
#include "segtopics/model_io.hpp"

namespace segtopics {

namespace {

// splitmix64 finaliser; derives independent stream seeds from one seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct Prepared {
    ContextSequence context;
    const Segmentation* labels = nullptr;
};

std::vector<Prepared> prepare(std::span<const LabeledSequence> items, std::size_t dim, const char* which) {
    std::vector<Prepared> out;
    out.reserve(items.size());
    for (const LabeledSequence& item : items) {
        if (item.embeddings.dim() != dim) {
            throw ValidationError(std::string(which) + " recording \"" + item.id + "\" has d=" +
                                  std::to_string(item.embeddings.dim()) + ", expected d=" +
                                  std::to_string(dim));
        }
        if (static_cast<std::size_t>(item.labels.n_units()) != item.embeddings.rows()) {
            throw ValidationError(std::string(which) + " recording \"" + item.id + "\" has " +
                                  std::to_string(item.embeddings.rows()) + " blocks but " +
                                  std::to_string(item.labels.n_units()) + " labelled units");
        }
        if (item.embeddings.rows() < 2) {
            continue; // no gap to learn from or score
        }
        out.push_back({build_context(item.embeddings), &item.labels});
    }
    return out;
}

DevEvaluation evaluate_prepared(std::span<const Prepared> items, const HeadModel& model, double threshold) {
    DevEvaluation eval;
    if (items.empty()) {
        throw ValidationError("evaluation set has no recording with at least two blocks");
    }
    for (const Prepared& item : items) {
        const std::vector<double> probs = head_forward(item.context, model);
        eval.loss += bce_loss(probs, *item.labels);
        GapScores scores{{probs.begin(), probs.end() - 1}, ScoreKind::probability};
        const Segmentation hyp = threshold_scores(scores, threshold);
        const int k = compute_k(*item.labels);
        eval.pk += pk(*item.labels, hyp, k);
        eval.windiff += windiff(*item.labels, hyp, k);
    }
    const auto count = static_cast<double>(items.size());
    eval.loss /= count;
    eval.pk /= count;
    eval.windiff /= count;
    return eval;
}

} // namespace

void TrainConfig::validate() const {
    if (!(lr0 > scheduler.min_lr)) {
        throw ValidationError("lr0 must exceed the scheduler's min_lr");
    }
    if (!(scheduler.factor > 0.0 && scheduler.factor < 1.0)) {
        throw ValidationError("scheduler factor must be in (0, 1)");
    }
    if (max_epochs < 1 || early_stop_patience < 1 || scheduler.patience < 1) {
        throw ValidationError("max_epochs and patience values must be positive");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ValidationError("threshold must be in (0, 1)");
    }
}

TrainResult train(std::span<const LabeledSequence> train_set, std::span<const LabeledSequence> dev_set,
                  const HeadConfig& head_config, const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    head_config.validate();
    if (train_set.empty()) {
        throw ValidationError("training corpus is empty");
    }
    if (dev_set.empty()) {
        throw ValidationError("dev corpus is empty");
    }
    const std::size_t dim = train_set.front().embeddings.dim();
    if (static_cast<std::size_t>(head_config.input_dim) != dim) {
        throw ValidationError("head input_dim " + std::to_string(head_config.input_dim) +
                              " does not match corpus embedding width " + std::to_string(dim));
    }
    const std::vector<Prepared> train_items = prepare(train_set, dim, "train");
    const std::vector<Prepared> dev_items = prepare(dev_set, dim, "dev");
    if (train_items.empty()) {
        throw ValidationError("training corpus has no recording with at least two blocks");
    }
    if (dev_items.empty()) {
        throw ValidationError("dev corpus has no recording with at least two blocks");
    }

    TrainResult result;
    HeadModel model = HeadModel::initialize(head_config, derive_seed(config.seed, 0));
    model.threshold = config.threshold;
    Rng order_rng(derive_seed(config.seed, 1));
    Rng dropout_rng(derive_seed(config.seed, 2));
    AdamState adam = AdamState::for_config(head_config);
    PlateauScheduler scheduler(config.lr0, config.scheduler);

    std::vector<std::size_t> order(train_items.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    double lr = config.lr0;
    double best_pk = std::numeric_limits<double>::infinity();
    HeadParams best_params = model.params;
    int stale_epochs = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        order_rng.shuffle(std::span<std::size_t>(order));
        double train_loss = 0.0;
        for (std::size_t idx : order) {
            const Prepared& item = train_items[idx];
            const LossAndGradients step = head_backward(item.context, model, *item.labels, &dropout_rng);
            adam_step(model.params, step.gradients, adam, lr, config.adam);
            train_loss += step.loss;
        }
        train_loss /= static_cast<double>(order.size());

        const DevEvaluation dev = evaluate_prepared(dev_items, model, config.threshold);
        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = train_loss;
        record.dev_loss = dev.loss;
        record.dev_pk = dev.pk;
        record.dev_windiff = dev.windiff;
        record.lr = lr;
        if (dev.pk < best_pk) {
            best_pk = dev.pk;
            best_params = model.params;
            result.best_epoch = epoch;
            stale_epochs = 0;
        } else {
            ++stale_epochs;
        }
        record.best_dev_pk = best_pk;
        result.log.push_back(record);
        if (on_epoch) {
            on_epoch(record);
        }
        lr = scheduler.observe(dev.loss);
        if (stale_epochs >= config.early_stop_patience) {
            break;
        }
    }

    model.params = std::move(best_params);
    round_to_float(model.params);
    result.model = std::move(model);
    return result;
}

Segmentation threshold_scores(const GapScores& scores, double threshold) {
    std::vector<int> gaps;
    for (std::size_t k = 0; k < scores.values.size(); ++k) {
        if (scores.values[k] >= threshold) {
            gaps.push_back(static_cast<int>(k) + 1);
        }
    }
    return Segmentation(static_cast<int>(scores.values.size()) + 1, std::move(gaps));
}

Inference infer(const BlockEmbeddingSequence& embeddings, const HeadModel& model, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ValidationError("threshold must be in (0, 1)");
    }
    if (embeddings.dim() != static_cast<std::size_t>(model.config.input_dim)) {
        throw ValidationError("embedding width " + std::to_string(embeddings.dim()) +
                              " does not match model input_dim " + std::to_string(model.config.input_dim));
    }
    const std::vector<double> probs = head_forward(build_context(embeddings), model);
    Inference out;
    out.scores.kind = ScoreKind::probability;
    out.scores.values.assign(probs.begin(), probs.end() - 1);
    out.segmentation = threshold_scores(out.scores, threshold);
    return out;
}

DevEvaluation evaluate_model(std::span<const LabeledSequence> dev_set, const HeadModel& model,
                             double threshold) {
    const std::vector<Prepared> items =
        prepare(dev_set, static_cast<std::size_t>(model.config.input_dim), "evaluation");
    return evaluate_prepared(items, model, threshold);
}

std::vector<double> threshold_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) {
        grid.push_back(static_cast<double>(i) / 20.0);
    }
    return grid;
}

double sweep_threshold(std::span<const GapScores> scores, std::span<const Segmentation> references) {
    if (scores.empty()) {
        throw ValidationError("threshold sweep needs a non-empty dev set");
    }
    if (scores.size() != references.size()) {
        throw ValidationError("threshold sweep: scores and references differ in count");
    }
    std::vector<int> ks;
    for (const Segmentation& ref : references) {
        ks.push_back(compute_k(ref));
    }
    double best_threshold = 0.0;
    double best_pk = std::numeric_limits<double>::infinity();
    for (double threshold : threshold_grid()) {
        double total = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            total += pk(references[i], threshold_scores(scores[i], threshold), ks[i]);
        }
        const double mean = total / static_cast<double>(scores.size());
        if (mean < best_pk) {
            best_pk = mean;
            best_threshold = threshold;
        }
    }
    return best_threshold;
}

double sweep_threshold(std::span<const LabeledSequence> dev_set, const HeadModel& model) {
    std::vector<GapScores> scores;
    std::vector<Segmentation> references;
    for (const LabeledSequence& item : dev_set) {
        if (item.embeddings.rows() < 2) {
            continue;
        }
        scores.push_back(infer(item.embeddings, model, 0.5).scores);
        references.push_back(item.labels);
    }
    return sweep_threshold(scores, references);
}

} // namespace segtopics
