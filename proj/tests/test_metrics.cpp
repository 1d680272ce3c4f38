#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "segtopics/error.hpp"
#include "segtopics/metrics.hpp"

using namespace segtopics;

TEST_CASE("compute_k rounds half the mean segment length up") {
    CHECK(compute_k(Segmentation(8, {4})) == 2);
    CHECK(compute_k(Segmentation(10, {})) == 5);
    CHECK(compute_k(Segmentation(6, {3})) == 2); // mean 3 -> 1.5 -> 2
    CHECK(compute_k(Segmentation(2, {1})) == 1); // floor at 1
    CHECK_THROWS_AS(compute_k(Segmentation(1, {})), ValidationError);
}

TEST_CASE("pk on hand-enumerated cases") {
    const Segmentation ref(6, {3});
    CHECK(pk(ref, ref, 2) == 0.0);
    CHECK(pk(ref, Segmentation(6, {}), 2) == doctest::Approx(0.5));
    CHECK(pk(Segmentation(6, {}), Segmentation(6, {1, 2, 3, 4, 5}), 2) == 1.0);
}

TEST_CASE("windiff on hand-enumerated cases") {
    const Segmentation ref(6, {3});
    CHECK(windiff(ref, ref, 2) == 0.0);
    CHECK(windiff(ref, Segmentation(6, {}), 2) == doctest::Approx(0.5));
    // Two boundaries inside one window count as a disagreement with one.
    CHECK(windiff(Segmentation(6, {2}), Segmentation(6, {2, 3}), 2) == doctest::Approx(0.5));
    CHECK(pk(Segmentation(6, {2}), Segmentation(6, {2, 3}), 2) == doctest::Approx(0.25));
}

TEST_CASE("window metrics reject bad arguments") {
    CHECK_THROWS_AS(pk(Segmentation(6, {}), Segmentation(7, {}), 2), ValidationError);
    CHECK_THROWS_AS(pk(Segmentation(6, {}), Segmentation(6, {}), 6), ValidationError);
    CHECK_THROWS_AS(windiff(Segmentation(6, {}), Segmentation(6, {}), 0), ValidationError);
}

TEST_CASE("window metrics match the brute-force oracle and stay in range") {
    Rng rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(49));
        const Segmentation ref = oracle::random_segmentation(rng, n, rng.uniform(0.0, 0.5));
        const Segmentation hyp = oracle::random_segmentation(rng, n, rng.uniform(0.0, 0.5));
        const int k = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(n - 1)));
        const double p = pk(ref, hyp, k);
        const double w = windiff(ref, hyp, k);
        REQUIRE(p == oracle::pk(ref, hyp, k));
        REQUIRE(w == oracle::windiff(ref, hyp, k));
        CHECK(p >= 0.0);
        CHECK(w <= 1.0);
        CHECK(w >= p);
    }
}

TEST_CASE("pk and windiff vanish only on exact agreement when k is below the minimum segment length") {
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 4 + static_cast<int>(rng.below(40));
        const Segmentation ref = oracle::random_segmentation(rng, n, 0.2);
        const Segmentation hyp = oracle::random_segmentation(rng, n, 0.2);
        const auto ref_len = ref.segment_lengths();
        const auto hyp_len = hyp.segment_lengths();
        const int min_len = std::min(*std::min_element(ref_len.begin(), ref_len.end()),
                                     *std::min_element(hyp_len.begin(), hyp_len.end()));
        for (int k = 1; k < std::min(min_len, n); ++k) {
            const bool equal = ref == hyp;
            CHECK((pk(ref, hyp, k) == 0.0) == equal);
            CHECK((windiff(ref, hyp, k) == 0.0) == equal);
        }
    }
}

TEST_CASE("purity and coverage on hand cases") {
    const TimedSegmentation halves({{0, 30}, {30, 60}});
    const TimedSegmentation whole({{0, 60}});
    const PurityCoverage same = purity_coverage(halves, halves);
    CHECK(same.purity == 1.0);
    CHECK(same.coverage == 1.0);

    const PurityCoverage under = purity_coverage(halves, whole);
    CHECK(under.purity == doctest::Approx(0.5));
    CHECK(under.coverage == doctest::Approx(1.0));

    const PurityCoverage over = purity_coverage(whole, halves);
    CHECK(over.purity == doctest::Approx(1.0));
    CHECK(over.coverage == doctest::Approx(0.5));

    CHECK_THROWS_AS(purity_coverage(whole, TimedSegmentation({{0, 50}})), ValidationError);
}

TEST_CASE("purity/coverage duality and oracle agreement") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const double extent = rng.uniform(10.0, 500.0);
        const TimedSegmentation a = oracle::random_timed(rng, extent, 10);
        const TimedSegmentation b = oracle::random_timed(rng, extent, 10);
        const PurityCoverage ab = purity_coverage(a, b);
        const PurityCoverage ba = purity_coverage(b, a);
        CHECK(ab.purity == ba.coverage);
        CHECK(ab.coverage == ba.purity);
        const PurityCoverage expected = oracle::purity_coverage(a, b);
        CHECK(std::abs(ab.purity - expected.purity) < 1e-12);
        CHECK(std::abs(ab.coverage - expected.coverage) < 1e-12);
    }
}

TEST_CASE("spcf is the harmonic mean with a zero convention") {
    CHECK(spcf(1.0, 1.0) == 1.0);
    CHECK(spcf(0.5, 1.0) == doctest::Approx(2.0 / 3.0));
    CHECK(spcf(0.0, 0.0) == 0.0);
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        const double p = rng.uniform();
        const double c = rng.uniform();
        const double f = spcf(p, c);
        CHECK(f <= (p + c) / 2.0 + 1e-15);
        CHECK(f <= 2.0 * std::min(p, c) + 1e-15);
    }
}

TEST_CASE("TimedSegmentation validates its spans") {
    CHECK_THROWS_AS(TimedSegmentation(std::vector<TimedSpan>{}), ValidationError);
    CHECK_THROWS_AS(TimedSegmentation({{1, 2}}), ValidationError);
    CHECK_THROWS_AS(TimedSegmentation({{0, 2}, {3, 4}}), ValidationError);
    CHECK_THROWS_AS(TimedSegmentation({{0, 2}, {2, 2}}), ValidationError);
}

TEST_CASE("labels_to_timed merges block spans") {
    const BlockTimeline nine = make_blocks(90.0);
    const TimedSegmentation none = labels_to_timed(Segmentation(9, {}), nine);
    REQUIRE(none.segments().size() == 1);
    CHECK(none.segments()[0] == TimedSpan{0, 90});

    const TimedSegmentation one = labels_to_timed(Segmentation(9, {3}), nine);
    REQUIRE(one.segments().size() == 2);
    CHECK(one.segments()[0] == TimedSpan{0, 30});
    CHECK(one.segments()[1] == TimedSpan{30, 90});

    const TimedSegmentation all = labels_to_timed(Segmentation(9, {1, 2, 3, 4, 5, 6, 7, 8}), nine);
    CHECK(all.segments().size() == 9);

    CHECK_THROWS_AS(labels_to_timed(Segmentation(8, {}), nine), ValidationError);
}

TEST_CASE("evaluate assembles a consistent report") {
    const Segmentation ref(9, {3, 6});
    const Segmentation hyp(9, {3});
    const BlockTimeline timeline = make_blocks(95.0);
    const Segmentation ref10(10, {3, 6});
    const MetricReport r = evaluate(ref10, Segmentation(10, {3}), std::nullopt, &timeline);
    CHECK(r.k_used == compute_k(ref10));
    CHECK(std::abs(r.spcf - spcf(r.purity, r.coverage)) < 1e-12);
    // Tail block is 5 s, so duration weighting differs from unit weighting.
    const MetricReport units = evaluate(ref10, Segmentation(10, {3}));
    CHECK(r.purity == doctest::Approx(65.0 / 95.0));
    CHECK(units.purity == doctest::Approx(0.7));

    const MetricReport forced = evaluate(ref, hyp, 1);
    CHECK(forced.k_used == 1);
    CHECK(forced.pk == pk(ref, hyp, 1));
}
