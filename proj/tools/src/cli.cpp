#include "segtopics/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "log.hpp"
#include "segtopics/corpus.hpp"
#include "segtopics/embedio.hpp"
#include "segtopics/error.hpp"
#include "segtopics/interchange.hpp"
#include "segtopics/metrics.hpp"
#include "segtopics/model_io.hpp"
#include "segtopics/synth.hpp"
#include "segtopics/texttiling.hpp"
#include "segtopics/train.hpp"

namespace segtopics::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void require_file(const fs::path& path, const std::string& what) {
    if (!fs::is_regular_file(path)) {
        throw ValidationError(what + " not found: " + path.string());
    }
}

void require_dir(const fs::path& path, const std::string& what) {
    if (!fs::is_directory(path)) {
        throw ValidationError(what + " is not a directory: " + path.string());
    }
}

// Prints to out when path is empty.
void emit(const std::string& path, const std::string& contents, std::ostream& out) {
    if (path.empty()) {
        out << contents;
    } else {
        write_file_atomic(path, contents);
    }
}

std::vector<RecordingManifest> load_manifests(const fs::path& path) {
    require_file(path, "manifest");
    try {
        return parse_manifest_lines(read_file(path));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

BlockTimeline timeline_for(const RecordingManifest& m, double window_sec) {
    try {
        return make_blocks(m.duration_sec, window_sec);
    } catch (const ValidationError& e) {
        throw ValidationError(m.id + ": " + e.what());
    }
}

struct Recording {
    RecordingManifest manifest;
    BlockTimeline timeline;
    LabeledSequence sequence;
};

// Every embedding file is checked for existence before any is read.
std::vector<Recording> load_recordings(const fs::path& manifest_path, const fs::path& emb_dir,
                                       double window_sec, const Log& log) {
    std::vector<RecordingManifest> manifests = load_manifests(manifest_path);
    require_dir(emb_dir, "--emb-dir");
    for (const RecordingManifest& m : manifests) {
        require_file(emb_dir / (m.id + ".emb"), "embedding file");
    }
    std::vector<Recording> out;
    out.reserve(manifests.size());
    for (RecordingManifest& m : manifests) {
        const fs::path path = emb_dir / (m.id + ".emb");
        Recording r;
        r.timeline = timeline_for(m, window_sec);
        BlockEmbeddingSequence emb;
        try {
            emb = load_embeddings(path);
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ": " + e.what());
        }
        if (emb.rows() != r.timeline.size()) {
            throw ValidationError(path.string() + ": " + std::to_string(emb.rows()) + " rows but " + m.id +
                                  " has " + std::to_string(r.timeline.size()) + " blocks of " +
                                  std::to_string(window_sec) + " s");
        }
        r.sequence = {m.id, std::move(emb), derive_labels(r.timeline, m)};
        r.manifest = std::move(m);
        out.push_back(std::move(r));
    }
    log.debug("loaded " + std::to_string(out.size()) + " recordings from " + manifest_path.string());
    return out;
}

std::vector<LabeledSequence> sequences_of(std::vector<Recording>& recs) {
    std::vector<LabeledSequence> out;
    out.reserve(recs.size());
    for (Recording& r : recs) {
        out.push_back(std::move(r.sequence));
    }
    return out;
}

// Chapter spans clipped to the part of the recording covered by blocks.
TimedSegmentation chapter_spans(const RecordingManifest& m, double extent) {
    std::vector<TimedSpan> spans;
    for (std::size_t i = 0; i < m.chapters.size(); ++i) {
        const double start = m.chapters[i].start_sec;
        if (start >= extent) {
            break;
        }
        const double end = i + 1 < m.chapters.size() ? std::min(m.chapters[i + 1].start_sec, extent) : extent;
        spans.push_back({start, end});
    }
    return TimedSegmentation(std::move(spans));
}

// ---- prepare

struct PrepareArgs {
    std::string manifest;
    std::string out;
    double window_sec = kDefaultWindowSec;
    double min_tail_sec = kDefaultMinTailSec;
    double train_ratio = 0.90;
    double dev_ratio = 0.05;
    double test_ratio = 0.05;
};

void run_prepare(const PrepareArgs& a, const Log& log) {
    const std::vector<RecordingManifest> manifests = load_manifests(a.manifest);
    std::vector<BlockTimeline> timelines;
    for (const RecordingManifest& m : manifests) {
        try {
            timelines.push_back(make_blocks(m.duration_sec, a.window_sec, a.min_tail_sec));
        } catch (const ValidationError& e) {
            throw ValidationError(m.id + ": " + e.what());
        }
    }
    const CorpusSplit split = split_corpus(manifests, {a.train_ratio, a.dev_ratio, a.test_ratio});

    const fs::path out = a.out;
    fs::create_directories(out / "labels");
    std::map<std::string, const RecordingManifest*> by_id;
    for (std::size_t i = 0; i < manifests.size(); ++i) {
        const RecordingManifest& m = manifests[i];
        by_id[m.id] = &m;
        write_file_atomic(out / "labels" / (m.id + ".json"),
                          segmentation_to_json(derive_labels(timelines[i], m)) + "\n");
        write_file_atomic(out / "labels" / (m.id + ".timed.json"),
                          timed_to_json(chapter_spans(m, timelines[i].extent())) + "\n");
    }
    const auto write_split = [&](const std::vector<std::string>& ids, const char* name) {
        std::vector<RecordingManifest> part;
        for (const std::string& id : ids) {
            part.push_back(*by_id.at(id));
        }
        write_file_atomic(out / name, serialize_manifest_lines(part));
    };
    write_split(split.train, "train.jsonl");
    write_split(split.dev, "dev.jsonl");
    write_split(split.test, "test.jsonl");
    log.info("prepared " + std::to_string(manifests.size()) + " recordings: " + std::to_string(split.train.size()) +
             " train, " + std::to_string(split.dev.size()) + " dev, " + std::to_string(split.test.size()) + " test");
}

// ---- tile

struct TileArgs {
    std::string input;
    std::string out;
    TextTilingParams params;
};

void run_tile(const TileArgs& a, std::ostream& out, const Log& log) {
    require_file(a.input, "transcript");
    const TextTilingResult result = texttile(read_file(a.input), a.params);
    log.info("tiled " + std::to_string(result.segmentation.n_units()) + " token sequences into " +
             std::to_string(result.segmentation.segment_count()) + " segments");
    emit(a.out, segmentation_to_json(result.segmentation, &result.depth) + "\n", out);
}

// ---- train

struct TrainArgs {
    std::string manifest;
    std::string dev_manifest;
    std::string emb_dir;
    std::string out;
    std::string log_path;
    std::uint64_t seed = 0;
    int epochs = 30;
    double lr = 0.001;
    double window_sec = kDefaultWindowSec;
    int model_dim = 256;
    int layers = 2;
    int heads = 4;
    int ff_mult = 4;
    double dropout = 0.1;
    int max_blocks = 4096;
    int early_stop = 5;
    double threshold = 0.5;
    bool sweep = false;
};

std::string epoch_line(const EpochRecord& r) {
    json line;
    line["epoch"] = r.epoch;
    line["train_loss"] = r.train_loss;
    line["dev_loss"] = r.dev_loss;
    line["dev_pk"] = r.dev_pk;
    line["dev_windiff"] = r.dev_windiff;
    line["best_dev_pk"] = r.best_dev_pk;
    line["lr"] = r.lr;
    return line.dump();
}

void run_train(const TrainArgs& a, const Log& log) {
    std::vector<Recording> train_recs = load_recordings(a.manifest, a.emb_dir, a.window_sec, log);
    std::vector<Recording> dev_recs = load_recordings(a.dev_manifest, a.emb_dir, a.window_sec, log);
    if (train_recs.empty() || dev_recs.empty()) {
        throw ValidationError("train and dev manifests must each list at least one recording");
    }
    const std::vector<LabeledSequence> train_set = sequences_of(train_recs);
    const std::vector<LabeledSequence> dev_set = sequences_of(dev_recs);

    HeadConfig head;
    head.input_dim = static_cast<int>(train_set.front().embeddings.dim());
    head.model_dim = a.model_dim;
    head.layers = a.layers;
    head.heads = a.heads;
    head.ff_mult = a.ff_mult;
    head.dropout = a.dropout;
    head.max_blocks = a.max_blocks;

    TrainConfig cfg;
    cfg.lr0 = a.lr;
    cfg.max_epochs = a.epochs;
    cfg.early_stop_patience = a.early_stop;
    cfg.seed = a.seed;
    cfg.threshold = a.threshold;

    std::string log_lines;
    TrainResult result = train(train_set, dev_set, head, cfg, [&](const EpochRecord& r) {
        const std::string line = epoch_line(r);
        log_lines += line + "\n";
        log.info(line);
    });
    result.model.threshold = a.threshold;
    if (a.sweep) {
        result.model.threshold = sweep_threshold(dev_set, result.model);
        log.info("swept threshold " + std::to_string(result.model.threshold));
    }
    save_model(result.model, a.out);
    if (!a.log_path.empty()) {
        write_file_atomic(a.log_path, log_lines);
    }
    log.info("best epoch " + std::to_string(result.best_epoch) + ", dev Pk " +
             std::to_string(result.log.back().best_dev_pk) + ", model written to " + a.out);
}

// ---- segment

struct SegmentArgs {
    std::string model;
    std::string emb;
    std::string emb_dir;
    std::string manifest;
    std::optional<double> threshold;
    double window_sec = kDefaultWindowSec;
    std::string out;
};

HeadModel load_model_checked(const std::string& path) {
    require_file(path, "model file");
    try {
        return load_model(path);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void run_segment(const SegmentArgs& a, std::ostream& out, const Log& log) {
    const bool single = !a.emb.empty();
    if (single == !a.emb_dir.empty() || (!a.emb_dir.empty()) != (!a.manifest.empty())) {
        throw ValidationError("segment needs either --emb or both --emb-dir and --manifest");
    }
    if (!single && a.out.empty()) {
        throw ValidationError("segment over a corpus needs --out DIR");
    }
    const HeadModel model = load_model_checked(a.model);
    const double threshold = a.threshold.value_or(model.threshold);

    if (single) {
        require_file(a.emb, "embedding file");
        const Inference inf = infer(load_embeddings(a.emb), model, threshold);
        emit(a.out, segmentation_to_json(inf.segmentation, &inf.scores) + "\n", out);
        return;
    }
    const std::vector<Recording> recs = load_recordings(a.manifest, a.emb_dir, a.window_sec, log);
    const fs::path dir = a.out;
    fs::create_directories(dir);
    for (const Recording& r : recs) {
        const Inference inf = infer(r.sequence.embeddings, model, threshold);
        write_file_atomic(dir / (r.manifest.id + ".json"), segmentation_to_json(inf.segmentation, &inf.scores) + "\n");
        write_file_atomic(dir / (r.manifest.id + ".timed.json"),
                          timed_to_json(labels_to_timed(inf.segmentation, r.timeline)) + "\n");
        log.debug(r.manifest.id + ": " + std::to_string(inf.segmentation.boundaries().size()) + " boundaries");
    }
    log.info("segmented " + std::to_string(recs.size()) + " recordings at threshold " + std::to_string(threshold));
}

// ---- eval

struct EvalArgs {
    std::string ref;
    std::string hyp;
    std::optional<int> k;
    bool timed = false;
    std::string manifest;
    std::string out;
    std::string rows;
};

struct PairResult {
    MetricReport report;
    bool window_metrics = true;
};

SegmentationFile load_segmentation_file(const fs::path& path) {
    try {
        return parse_segmentation_file(read_file(path));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

PairResult evaluate_pair(const fs::path& ref_path, const fs::path& hyp_path, std::optional<int> k) {
    const SegmentationFile ref = load_segmentation_file(ref_path);
    const SegmentationFile hyp = load_segmentation_file(hyp_path);
    if (ref.index() != hyp.index()) {
        throw ValidationError(hyp_path.string() + ": cannot compare a block segmentation with a timed one (" +
                              ref_path.string() + ")");
    }
    try {
        if (const auto* r = std::get_if<Segmentation>(&ref)) {
            const auto& h = std::get<Segmentation>(hyp);
            if (r->n_units() != h.n_units()) {
                throw ValidationError("n_units differ: reference " + std::to_string(r->n_units()) + ", hypothesis " +
                                      std::to_string(h.n_units()));
            }
            return {evaluate(*r, h, k), true};
        }
        const auto& r = std::get<TimedSegmentation>(ref);
        const auto& h = std::get<TimedSegmentation>(hyp);
        const PurityCoverage pc = purity_coverage(r, h);
        MetricReport report;
        report.purity = pc.purity;
        report.coverage = pc.coverage;
        report.spcf = spcf(pc.purity, pc.coverage);
        report.n_units = static_cast<int>(r.segments().size());
        return {report, false};
    } catch (const ValidationError& e) {
        throw ValidationError(hyp_path.string() + ": " + e.what());
    }
}

bool is_timed_name(const std::string& name) {
    static const std::string suffix = ".timed.json";
    return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void run_eval(const EvalArgs& a, std::ostream& out, const Log& log) {
    if (a.k && *a.k < 1) {
        throw ValidationError("--k must be at least 1");
    }
    const bool dirs = fs::is_directory(a.ref);
    if (!dirs) {
        require_file(a.ref, "reference");
        require_file(a.hyp, "hypothesis");
        const PairResult r = evaluate_pair(a.ref, a.hyp, a.k);
        emit(a.out, report_to_json(r.report, r.window_metrics) + "\n", out);
        return;
    }
    require_dir(a.hyp, "hypothesis directory");
    const std::string suffix = a.timed ? ".timed.json" : ".json";
    std::vector<std::string> names;
    if (!a.manifest.empty()) {
        for (const RecordingManifest& m : load_manifests(a.manifest)) {
            names.push_back(m.id + suffix);
            require_file(fs::path(a.ref) / names.back(), "reference");
        }
    }
    for (const auto& entry : a.manifest.empty() ? fs::directory_iterator(a.ref) : fs::directory_iterator()) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && entry.path().extension() == ".json" && is_timed_name(name) == a.timed) {
            names.push_back(name);
        }
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) {
        throw ValidationError("no *" + suffix + " files in " + a.ref);
    }
    for (const std::string& name : names) {
        require_file(fs::path(a.hyp) / name, "hypothesis");
    }

    std::vector<MetricReport> reports;
    std::string rows;
    bool window_metrics = true;
    for (const std::string& name : names) {
        const PairResult r = evaluate_pair(fs::path(a.ref) / name, fs::path(a.hyp) / name, a.k);
        window_metrics = window_metrics && r.window_metrics;
        reports.push_back(r.report);
        const std::string id = name.substr(0, name.size() - suffix.size());
        rows += report_to_json(r.report, r.window_metrics, id) + "\n";
    }
    json summary = json::parse(report_to_json(mean_report(reports), window_metrics));
    summary["k"] = a.k && window_metrics ? json(*a.k) : json(nullptr);
    summary["recordings"] = reports.size();
    if (!a.rows.empty()) {
        write_file_atomic(a.rows, rows);
    }
    log.info("evaluated " + std::to_string(reports.size()) + " recordings");
    emit(a.out, summary.dump() + "\n", out);
}

// ---- synth

struct SynthArgs {
    std::string preset;
    std::uint64_t seed = 7;
    std::string out;
    int count = 100;
};

void run_synth(const SynthArgs& a, const Log& log) {
    const fs::path dir = a.out;
    if (a.preset == "head-oracle") {
        const SynthCorpus corpus = synth_embeddings(head_oracle_spec(a.seed));
        save_synth_corpus(corpus, dir, kHeadOracleTrain);
        log.info("wrote " + std::to_string(corpus.recordings.size()) + " recordings (" +
                 std::to_string(kHeadOracleTrain) + " train), nearest-centroid accuracy " +
                 std::to_string(corpus.centroid_accuracy));
        return;
    }
    if (a.count < 1) {
        throw ValidationError("--count must be at least 1");
    }
    fs::create_directories(dir / "texts");
    fs::create_directories(dir / "truth");
    for (int i = 0; i < a.count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "text-%03d", i);
        const SynthText t = synth_text(a.seed + static_cast<std::uint64_t>(i), 400, 2, 50);
        write_file_atomic(dir / "texts" / (std::string(name) + ".txt"), t.text);
        write_file_atomic(dir / "truth" / (std::string(name) + ".json"), segmentation_to_json(t.truth) + "\n");
    }
    log.info("wrote " + std::to_string(a.count) + " two-topic texts");
}

// ---- sweep

struct SweepArgs {
    std::string model;
    std::string manifest;
    std::string emb_dir;
    double window_sec = kDefaultWindowSec;
    std::string out;
};

void run_sweep(const SweepArgs& a, std::ostream& out, const Log& log) {
    HeadModel model = load_model_checked(a.model);
    std::vector<Recording> recs = load_recordings(a.manifest, a.emb_dir, a.window_sec, log);
    const std::vector<LabeledSequence> dev = sequences_of(recs);
    if (dev.empty()) {
        throw ValidationError(a.manifest + ": no recordings to sweep over");
    }
    model.threshold = sweep_threshold(dev, model);
    const DevEvaluation eval = evaluate_model(dev, model, model.threshold);
    json result;
    result["threshold"] = model.threshold;
    result["dev_pk"] = eval.pk;
    result["dev_windiff"] = eval.windiff;
    if (!a.out.empty()) {
        save_model(model, a.out);
        log.info("model with threshold " + std::to_string(model.threshold) + " written to " + a.out);
    }
    out << result.dump() << '\n';
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Topic segmentation of chaptered recordings and transcripts.", "segtopics"};
    app.require_subcommand(1, 1);
    app.option_defaults()->always_capture_default();

    PrepareArgs prepare;
    CLI::App* prepare_cmd = app.add_subcommand("prepare", "Split manifests chronologically and write block labels");
    prepare_cmd->add_option("--manifest", prepare.manifest, "JSON-lines manifests")->required();
    prepare_cmd->add_option("--out", prepare.out, "Output directory")->required();
    prepare_cmd->add_option("--window-sec", prepare.window_sec, "Block length in seconds");
    prepare_cmd->add_option("--min-tail-sec", prepare.min_tail_sec, "Shortest trailing block kept");
    prepare_cmd->add_option("--train-ratio", prepare.train_ratio, "Share of recordings for training");
    prepare_cmd->add_option("--dev-ratio", prepare.dev_ratio, "Share of recordings for dev");
    prepare_cmd->add_option("--test-ratio", prepare.test_ratio, "Share of recordings for test");

    TileArgs tile;
    CLI::App* tile_cmd = app.add_subcommand("tile", "TextTiling over a plain-text transcript");
    tile_cmd->add_option("--input", tile.input, "UTF-8 transcript")->required();
    tile_cmd->add_option("--out", tile.out, "Segmentation JSON (stdout when omitted)");
    tile_cmd->add_option("--w", tile.params.w, "Tokens per token sequence");
    tile_cmd->add_option("--blocksize", tile.params.blocksize, "Token sequences per comparison block");
    tile_cmd->add_option("--smooth-width", tile.params.smooth_width, "Moving-average half width");
    tile_cmd->add_option("--smooth-rounds", tile.params.smooth_rounds, "Smoothing passes");
    tile_cmd->add_option("--min-separation", tile.params.min_separation,
                         "Minimum gaps between boundaries (1 disables)");

    TrainArgs tr;
    CLI::App* train_cmd = app.add_subcommand("train", "Train the segmentation head on block embeddings");
    train_cmd->add_option("--manifest", tr.manifest, "Training manifests (JSON-lines)")->required();
    train_cmd->add_option("--dev-manifest", tr.dev_manifest, "Dev manifests (JSON-lines)")->required();
    train_cmd->add_option("--emb-dir", tr.emb_dir, "Directory of <id>.emb files")->required();
    train_cmd->add_option("--out", tr.out, "Model file to write")->required();
    train_cmd->add_option("--log", tr.log_path, "Per-epoch JSON-lines log");
    train_cmd->add_option("--seed", tr.seed, "Seed for initialization, shuffling and dropout");
    train_cmd->add_option("--epochs", tr.epochs, "Maximum epochs");
    train_cmd->add_option("--lr", tr.lr, "Initial Adam learning rate");
    train_cmd->add_option("--window-sec", tr.window_sec, "Block length in seconds");
    train_cmd->add_option("--model-dim", tr.model_dim, "Head width");
    train_cmd->add_option("--layers", tr.layers, "Self-attention layers");
    train_cmd->add_option("--heads", tr.heads, "Attention heads");
    train_cmd->add_option("--ff-mult", tr.ff_mult, "Feed-forward width multiplier");
    train_cmd->add_option("--dropout", tr.dropout, "Dropout rate");
    train_cmd->add_option("--max-blocks", tr.max_blocks, "Positional-encoding capacity");
    train_cmd->add_option("--early-stop", tr.early_stop, "Epochs without dev Pk improvement before stopping");
    train_cmd->add_option("--threshold", tr.threshold, "Decision threshold for dev Pk");
    train_cmd->add_flag("--sweep", tr.sweep, "Store the dev-swept threshold in the model");

    SegmentArgs seg;
    CLI::App* segment_cmd = app.add_subcommand("segment", "Predict boundaries with a trained head");
    segment_cmd->add_option("--model", seg.model, "Model file")->required();
    segment_cmd->add_option("--emb", seg.emb, "Single EMB1 file");
    segment_cmd->add_option("--emb-dir", seg.emb_dir, "Directory of <id>.emb files (with --manifest)");
    segment_cmd->add_option("--manifest", seg.manifest, "Manifests to segment (with --emb-dir)");
    segment_cmd->add_option("--threshold", seg.threshold, "Decision threshold (default: stored in the model)");
    segment_cmd->add_option("--window-sec", seg.window_sec, "Block length in seconds");
    segment_cmd->add_option("--out", seg.out, "Output file (--emb, stdout when omitted) or directory");

    EvalArgs ev;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Score hypotheses against references");
    eval_cmd->add_option("--ref", ev.ref, "Reference segmentation file or directory")->required();
    eval_cmd->add_option("--hyp", ev.hyp, "Hypothesis segmentation file or directory")->required();
    eval_cmd->add_option("--k", ev.k, "Window size (default: half the mean reference segment length)");
    eval_cmd->add_flag("--timed", ev.timed, "In directory mode, compare *.timed.json files");
    eval_cmd->add_option("--manifest", ev.manifest, "In directory mode, evaluate only these recordings");
    eval_cmd->add_option("--out", ev.out, "Report JSON (stdout when omitted)");
    eval_cmd->add_option("--rows", ev.rows, "Per-recording JSON-lines (directory mode)");

    SynthArgs syn;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate planted-boundary corpora");
    synth_cmd->add_option("--preset", syn.preset, "Corpus preset")
        ->required()
        ->check(CLI::IsMember({"head-oracle", "texttiling-oracle"}));
    synth_cmd->add_option("--seed", syn.seed, "Generator seed");
    synth_cmd->add_option("--out", syn.out, "Output directory")->required();
    synth_cmd->add_option("--count", syn.count, "Texts for texttiling-oracle");

    SweepArgs sw;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Pick the decision threshold minimising dev Pk");
    sweep_cmd->add_option("--model", sw.model, "Model file")->required();
    sweep_cmd->add_option("--manifest", sw.manifest, "Dev manifests (JSON-lines)")->required();
    sweep_cmd->add_option("--emb-dir", sw.emb_dir, "Directory of <id>.emb files")->required();
    sweep_cmd->add_option("--window-sec", sw.window_sec, "Block length in seconds");
    sweep_cmd->add_option("--out", sw.out, "Write the model with the swept threshold here");

    // Help shows a default for every optional flag.
    for (CLI::App* sub : app.get_subcommands({})) {
        for (CLI::Option* opt : sub->get_options()) {
            if (!opt->get_required() && opt->get_default_str().empty() && opt->get_name() != "--help") {
                opt->default_str(opt->get_expected_min() == 0 ? "off" : "none");
            }
        }
    }

    try {
        // CLI11 consumes arguments from the back.
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help(); // delegates to the selected subcommand
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "segtopics: " << e.what() << " (see --help)\n";
        return kExitValidation;
    }
    try {
        const Log log(err);
        if (prepare_cmd->parsed()) {
            run_prepare(prepare, log);
        } else if (tile_cmd->parsed()) {
            run_tile(tile, out, log);
        } else if (train_cmd->parsed()) {
            run_train(tr, log);
        } else if (segment_cmd->parsed()) {
            run_segment(seg, out, log);
        } else if (eval_cmd->parsed()) {
            run_eval(ev, out, log);
        } else if (synth_cmd->parsed()) {
            run_synth(syn, log);
        } else if (sweep_cmd->parsed()) {
            run_sweep(sw, out, log);
        }
    } catch (const ValidationError& e) {
        err << "segtopics: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "segtopics: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

} // namespace segtopics::cli
