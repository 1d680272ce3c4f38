#include <doctest.h>

#include <filesystem>
#include <map>
#include <regex>
#include <sstream>

#include "segtopics/cli.hpp"
#include "segtopics/interchange.hpp"
#include "segtopics/synth.hpp"

namespace fs = std::filesystem;
using segtopics::cli::dispatch;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("segtopics_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

std::string slurp(const fs::path& p) { return segtopics::read_file(p); }

// Relative path -> contents for every file under root.
std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            files[fs::relative(e.path(), root).string()] = slurp(e.path());
        }
    }
    return files;
}

const std::vector<std::string> kTinyHead{"--model-dim", "8", "--layers", "1", "--epochs", "2"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace

TEST_CASE("help lists every flag with a default") {
    for (const char* sub : {"prepare", "tile", "train", "segment", "eval", "synth", "sweep"}) {
        const Run r = run({sub, "--help"});
        CHECK(r.code == 0);
        std::istringstream lines(r.out);
        std::string line;
        int flags = 0;
        while (std::getline(lines, line)) {
            if (line.rfind("  --", 0) != 0) {
                continue;
            }
            ++flags;
            INFO(sub << ": " << line);
            CHECK((line.find("[") != std::string::npos || line.find("REQUIRED") != std::string::npos));
        }
        CHECK(flags >= 2);
    }
    const Run top = run({"--help"});
    CHECK(top.code == 0);
    CHECK(top.out.find("sweep") != std::string::npos);
}

TEST_CASE("usage errors exit 1 with one line") {
    Run r = run({});
    CHECK(r.code == 1);
    r = run({"frobnicate"});
    CHECK(r.code == 1);
    r = run({"tile", "--input", "missing.txt"});
    CHECK(r.code == 1);
    CHECK(r.err.find("missing.txt") != std::string::npos);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
    r = run({"eval", "--ref", "a.json", "--hyp", "b.json", "--bogus"});
    CHECK(r.code == 1);
    CHECK(r.err.find("--bogus") != std::string::npos);
    r = run({"synth", "--preset", "nope", "--out", "x"});
    CHECK(r.code == 1);
}

TEST_CASE("eval on identical files reports zero error") {
    TempDir dir("eval");
    segtopics::write_file_atomic(dir / "r.json", R"({"n_units": 12, "boundaries": [4, 8]})");
    const Run r = run({"eval", "--ref", dir / "r.json", "--hyp", dir / "r.json"});
    REQUIRE(r.code == 0);
    const std::regex pk(R"("pk":0(\.0)?[,}])");
    CHECK(std::regex_search(r.out, pk));
    CHECK(r.out.find("\"k\":2") != std::string::npos);

    segtopics::write_file_atomic(dir / "h.json", R"({"n_units": 12, "boundaries": []})");
    const Run k = run({"eval", "--ref", dir / "r.json", "--hyp", dir / "h.json", "--k", "3", "--out", dir / "rep.json"});
    REQUIRE(k.code == 0);
    CHECK(slurp(dir / "rep.json").find("\"k\":3") != std::string::npos);

    segtopics::write_file_atomic(dir / "bad.json", R"({"n_units": 9, "boundaries": []})");
    const Run mismatch = run({"eval", "--ref", dir / "r.json", "--hyp", dir / "bad.json"});
    CHECK(mismatch.code == 1);
    CHECK(mismatch.err.find("bad.json") != std::string::npos);
    segtopics::write_file_atomic(dir / "t.json", R"({"segments": [[0, 5], [5, 12]]})");
    CHECK(run({"eval", "--ref", dir / "r.json", "--hyp", dir / "t.json"}).code == 1);
}

TEST_CASE("runtime failures exit 2") {
    TempDir dir("runtime");
    segtopics::write_file_atomic(dir / "r.json", R"({"n_units": 5, "boundaries": [2]})");
    const Run r = run({"eval", "--ref", dir / "r.json", "--hyp", dir / "r.json", "--out", "/proc/segtopics/out.json"});
    CHECK(r.code == 2);
}

TEST_CASE("tile writes a segmentation") {
    TempDir dir("tile");
    const std::string text = segtopics::synth_text(11, 400, 2, 50).text;
    segtopics::write_file_atomic(dir / "in.txt", text);
    const Run r = run({"tile", "--input", dir / "in.txt", "--out", dir / "seg.json"});
    REQUIRE(r.code == 0);
    const auto seg = segtopics::parse_segmentation(slurp(dir / "seg.json"));
    CHECK(seg.n_units() == 40);
    const auto near = std::count_if(seg.boundaries().begin(), seg.boundaries().end(),
                                    [](int b) { return std::abs(b - 20) <= 2; });
    CHECK(near == 1);
}

TEST_CASE("prepare splits the fixture and writes labels") {
    TempDir dir("prepare");
    const std::string manifests = std::string(SEGTOPICS_TEST_DATA) + "/sample_manifests.jsonl";
    const Run r = run({"prepare", "--manifest", manifests, "--out", dir / "p"});
    REQUIRE(r.code == 0);
    for (const char* split : {"train.jsonl", "dev.jsonl", "test.jsonl"}) {
        CHECK(fs::exists(dir.path / "p" / split));
    }
    const auto labels = segtopics::parse_segmentation(slurp(dir.path / "p/labels/en-2023-03-01-evening.json"));
    CHECK(labels.segment_count() == 8);
    const auto timed = segtopics::parse_timed_segmentation(slurp(dir.path / "p/labels/en-2023-03-01-evening.timed.json"));
    CHECK(timed.segments().size() == 8);
    CHECK(timed.segments().front().start_sec == 0.0);
}

TEST_CASE("synth and train are byte-identical across runs") {
    TempDir dir("determinism");
    REQUIRE(run({"synth", "--preset", "head-oracle", "--seed", "3", "--out", dir / "a"}).code == 0);
    REQUIRE(run({"synth", "--preset", "head-oracle", "--seed", "3", "--out", dir / "b"}).code == 0);
    CHECK(snapshot(dir.path / "a") == snapshot(dir.path / "b"));

    const auto train_args = [&](const std::string& tag) {
        return concat({"train", "--manifest", dir / "a/train.jsonl", "--dev-manifest", dir / "a/dev.jsonl",
                       "--emb-dir", dir / "a/emb", "--seed", "5", "--out", dir / (tag + ".sgh"), "--log",
                       dir / (tag + ".jsonl")},
                      kTinyHead);
    };
    REQUIRE(run(train_args("m1")).code == 0);
    REQUIRE(run(train_args("m2")).code == 0);
    CHECK(slurp(dir / "m1.sgh") == slurp(dir / "m2.sgh"));
    CHECK(slurp(dir / "m1.jsonl") == slurp(dir / "m2.jsonl"));
    const std::string log = slurp(dir / "m1.jsonl");
    CHECK(std::count(log.begin(), log.end(), '\n') == 2);

    // segment -> eval -> sweep on the dev split.
    REQUIRE(run({"segment", "--model", dir / "m1.sgh", "--emb-dir", dir / "a/emb", "--manifest", dir / "a/dev.jsonl",
                 "--out", dir / "hyp"})
                .code == 0);
    const Run ev = run({"eval", "--ref", dir / "a/labels", "--hyp", dir / "hyp", "--manifest", dir / "a/dev.jsonl",
                        "--rows", dir / "rows.jsonl"});
    REQUIRE(ev.code == 0);
    CHECK(ev.out.find("\"recordings\":40") != std::string::npos);
    const Run timed = run({"eval", "--ref", dir / "a/labels", "--hyp", dir / "hyp", "--manifest",
                           dir / "a/dev.jsonl", "--timed"});
    CHECK(timed.code == 0);
    CHECK(timed.out.find("\"pk\":null") != std::string::npos);
    const Run sw = run({"sweep", "--model", dir / "m1.sgh", "--manifest", dir / "a/dev.jsonl", "--emb-dir",
                        dir / "a/emb", "--out", dir / "m1s.sgh"});
    CHECK(sw.code == 0);
    CHECK(sw.out.find("\"threshold\"") != std::string::npos);
    CHECK(fs::exists(dir.path / "m1s.sgh"));

    const Run single = run({"segment", "--model", dir / "m1.sgh", "--emb", dir / "a/emb/synth-00000.emb"});
    CHECK(single.code == 0);
    CHECK(single.out.find("\"score_kind\":\"probability\"") != std::string::npos);
}

TEST_CASE("train validates inputs before starting") {
    TempDir dir("train_errors");
    REQUIRE(run({"synth", "--preset", "head-oracle", "--out", dir / "a"}).code == 0);
    fs::remove(dir.path / "a/emb/synth-00239.emb");
    const Run r = run(concat({"train", "--manifest", dir / "a/train.jsonl", "--dev-manifest", dir / "a/dev.jsonl",
                              "--emb-dir", dir / "a/emb", "--out", dir / "m.sgh"},
                             kTinyHead));
    CHECK(r.code == 1);
    CHECK(r.err.find("synth-00239.emb") != std::string::npos);
    CHECK(!fs::exists(dir.path / "m.sgh"));
    CHECK(run({"segment", "--model", dir / "m.sgh", "--emb", dir / "a/emb/synth-00000.emb"}).code == 1);
}

TEST_CASE("texttiling oracle preset") {
    TempDir dir("tt");
    REQUIRE(run({"synth", "--preset", "texttiling-oracle", "--count", "3", "--out", dir / "t"}).code == 0);
    CHECK(fs::exists(dir.path / "t/texts/text-002.txt"));
    const Run r = run({"tile", "--input", dir / "t/texts/text-000.txt", "--out", dir / "h.json"});
    REQUIRE(r.code == 0);
    CHECK(run({"eval", "--ref", dir / "t/truth/text-000.json", "--hyp", dir / "h.json"}).code == 0);
}
