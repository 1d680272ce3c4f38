#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "segtopics/corpus.hpp"
#include "segtopics/segmentation.hpp"

namespace segtopics {

struct TimedSpan {
    double start_sec = 0.0;
    double end_sec = 0.0;

    double length() const { return end_sec - start_sec; }
    friend bool operator==(const TimedSpan&, const TimedSpan&) = default;
};

// Contiguous spans starting at 0, all of positive length.
class TimedSegmentation {
public:
    TimedSegmentation() = default;
    // Throws ValidationError when the spans are empty, do not start at 0,
    // leave gaps/overlaps, or have non-positive length.
    explicit TimedSegmentation(std::vector<TimedSpan> segments);

    const std::vector<TimedSpan>& segments() const { return segments_; }
    double extent() const { return segments_.empty() ? 0.0 : segments_.back().end_sec; }

    friend bool operator==(const TimedSegmentation&, const TimedSegmentation&) = default;

private:
    std::vector<TimedSpan> segments_;
};

// Window size: half the mean reference segment length, rounded half up,
// at least 1.
int compute_k(const Segmentation& ref);

// Fraction of windows i = 1..N-k whose endpoints i and i+k are judged
// same-segment by one side and different-segment by the other.
double pk(const Segmentation& ref, const Segmentation& hyp, int k);

// Fraction of windows i = 1..N-k where ref and hyp place a different
// number of boundaries among gaps i..i+k-1.
double windiff(const Segmentation& ref, const Segmentation& hyp, int k);

struct PurityCoverage {
    double purity = 0.0;
    double coverage = 0.0;
};

// Duration-weighted: purity sums, for every hyp segment, its largest
// overlap with a single ref segment; coverage swaps the roles. Both are
// normalised by the total extent.
PurityCoverage purity_coverage(const TimedSegmentation& ref, const TimedSegmentation& hyp);

// Harmonic mean of purity and coverage; 0 when both are 0.
double spcf(double purity, double coverage);

TimedSegmentation labels_to_timed(const Segmentation& seg, const BlockTimeline& timeline);

// Unit-length timeline [0,1),[1,2),... used when no block spans are known.
BlockTimeline unit_timeline(int n_units);

struct MetricReport {
    double pk = 0.0;
    double windiff = 0.0;
    double purity = 0.0;
    double coverage = 0.0;
    double spcf = 0.0;
    int k_used = 0;
    int n_units = 0;
};

// All metrics for one recording. k defaults to compute_k(ref); purity and
// coverage are weighted by the given timeline, or by unit counts.
MetricReport evaluate(const Segmentation& ref, const Segmentation& hyp,
                      std::optional<int> k = std::nullopt,
                      const BlockTimeline* timeline = nullptr);

// Unweighted mean of per-recording reports (k_used and n_units summed
// into n_units; k_used left 0).
MetricReport mean_report(std::span<const MetricReport> reports);

} // namespace segtopics
