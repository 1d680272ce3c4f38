#include <doctest.h>

#include <filesystem>

#include "segtopics/error.hpp"
#include "segtopics/interchange.hpp"

using namespace segtopics;

TEST_CASE("segmentation JSON round-trip") {
    const Segmentation seg(12, {4, 9});
    const std::string text = segmentation_to_json(seg);
    CHECK(text == R"({"boundaries":[4,9],"n_units":12})");
    CHECK(parse_segmentation(text) == seg);
    CHECK(std::holds_alternative<Segmentation>(parse_segmentation_file(text)));
}

TEST_CASE("timed segmentation JSON round-trip") {
    const TimedSegmentation seg({{0, 12.5}, {12.5, 40}});
    const std::string text = timed_to_json(seg);
    CHECK(parse_timed_segmentation(text) == seg);
    CHECK(std::holds_alternative<TimedSegmentation>(parse_segmentation_file(text)));
}

TEST_CASE("segmentation files are validated") {
    CHECK_THROWS_AS(parse_segmentation(R"({"n_units":3,"boundaries":[3]})"), ValidationError);
    CHECK_THROWS_AS(parse_segmentation(R"({"boundaries":[1]})"), ValidationError);
    CHECK_THROWS_AS(parse_segmentation_file(R"({"foo":1})"), ValidationError);
    CHECK_THROWS_AS(parse_segmentation_file("[1,2"), ValidationError);
}

TEST_CASE("atomic writes leave no temp file behind") {
    const auto dir = std::filesystem::temp_directory_path() / "segtopics-interchange-test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "out.json";
    write_file_atomic(path, "first");
    write_file_atomic(path, "second");
    CHECK(read_file(path) == "second");
    CHECK_FALSE(std::filesystem::exists(dir / "out.json.tmp"));
    CHECK_THROWS_WITH_AS(read_file(dir / "missing.json"), doctest::Contains("missing.json"), ValidationError);
    std::filesystem::remove_all(dir);
}
