#include <doctest.h>

#include "segtopics/error.hpp"
#include "segtopics/segmentation.hpp"

using namespace segtopics;

TEST_CASE("Segmentation keeps sorted unique gaps") {
    const Segmentation seg(10, {7, 3, 3});
    CHECK(seg.boundaries() == std::vector<int>{3, 7});
    CHECK(seg.segment_count() == 3);
    CHECK(seg.segment_lengths() == std::vector<int>{3, 4, 3});
    CHECK(seg.is_boundary(7));
    CHECK_FALSE(seg.is_boundary(4));
}

TEST_CASE("Segmentation rejects out-of-range gaps") {
    CHECK_THROWS_AS(Segmentation(0, {}), ValidationError);
    CHECK_THROWS_AS(Segmentation(5, {0}), ValidationError);
    CHECK_THROWS_AS(Segmentation(5, {5}), ValidationError);
    CHECK_NOTHROW(Segmentation(1, {}));
}

TEST_CASE("gap flags round-trip") {
    const Segmentation seg(6, {1, 4});
    const std::vector<int> flags = seg.gap_flags();
    CHECK(flags == std::vector<int>{1, 0, 0, 1, 0});
    CHECK(Segmentation::from_gap_flags(flags) == seg);
}
