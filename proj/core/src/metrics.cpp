#include "segtopics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "segtopics/error.hpp"

namespace segtopics {

namespace {

// Tolerance (seconds) for span contiguity and extent comparison.
constexpr double kTimeTolerance = 1e-6;

void check_window_args(const Segmentation& ref, const Segmentation& hyp, int k) {
    if (ref.n_units() != hyp.n_units()) {
        throw ValidationError("reference has " + std::to_string(ref.n_units()) +
                              " units but hypothesis has " + std::to_string(hyp.n_units()));
    }
    if (k < 1 || k >= ref.n_units()) {
        throw ValidationError("window size k=" + std::to_string(k) + " outside 1.." +
                              std::to_string(ref.n_units() - 1));
    }
}

// prefix[g] = number of boundaries among gaps 1..g.
std::vector<int> boundary_prefix(const Segmentation& seg) {
    std::vector<int> prefix(static_cast<std::size_t>(seg.n_units()), 0);
    for (int gap : seg.boundaries()) {
        prefix[static_cast<std::size_t>(gap)] = 1;
    }
    for (std::size_t g = 1; g < prefix.size(); ++g) {
        prefix[g] += prefix[g - 1];
    }
    return prefix;
}

// Sum over segments of `a` of the largest overlap with one segment of `b`,
// by a merge sweep over the two sorted span lists.
double summed_max_overlap(const std::vector<TimedSpan>& a, const std::vector<TimedSpan>& b) {
    double total = 0.0;
    std::size_t j = 0;
    for (const TimedSpan& span : a) {
        while (j < b.size() && b[j].end_sec <= span.start_sec) {
            ++j;
        }
        double best = 0.0;
        for (std::size_t t = j; t < b.size() && b[t].start_sec < span.end_sec; ++t) {
            const double overlap =
                std::min(span.end_sec, b[t].end_sec) - std::max(span.start_sec, b[t].start_sec);
            best = std::max(best, overlap);
        }
        total += best;
    }
    return total;
}

} // namespace

TimedSegmentation::TimedSegmentation(std::vector<TimedSpan> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) {
        throw ValidationError("timed segmentation has no segments");
    }
    if (std::abs(segments_.front().start_sec) > kTimeTolerance) {
        throw ValidationError("timed segmentation must start at 0");
    }
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const TimedSpan& s = segments_[i];
        if (!std::isfinite(s.start_sec) || !std::isfinite(s.end_sec) || !(s.end_sec > s.start_sec)) {
            throw ValidationError("segment " + std::to_string(i) + " has non-positive length");
        }
        if (i > 0 && std::abs(s.start_sec - segments_[i - 1].end_sec) > kTimeTolerance) {
            throw ValidationError("segment " + std::to_string(i) +
                                  " is not contiguous with its predecessor");
        }
    }
}

int compute_k(const Segmentation& ref) {
    if (ref.n_units() < 2) {
        throw ValidationError("compute_k needs at least 2 units");
    }
    // round_half_up(n / (2 s)) == floor((n + s) / (2 s)) in integers.
    const long long n = ref.n_units();
    const long long segments = ref.segment_count();
    const long long k = (n + segments) / (2 * segments);
    return static_cast<int>(std::max(1LL, k));
}

double pk(const Segmentation& ref, const Segmentation& hyp, int k) {
    check_window_args(ref, hyp, k);
    const std::vector<int> r = boundary_prefix(ref);
    const std::vector<int> h = boundary_prefix(hyp);
    const int n = ref.n_units();
    int errors = 0;
    for (int i = 1; i <= n - k; ++i) {
        // Boundaries among gaps i..i+k-1.
        const bool ref_split = r[static_cast<std::size_t>(i + k - 1)] - r[static_cast<std::size_t>(i - 1)] > 0;
        const bool hyp_split = h[static_cast<std::size_t>(i + k - 1)] - h[static_cast<std::size_t>(i - 1)] > 0;
        errors += ref_split != hyp_split ? 1 : 0;
    }
    return static_cast<double>(errors) / static_cast<double>(n - k);
}

double windiff(const Segmentation& ref, const Segmentation& hyp, int k) {
    check_window_args(ref, hyp, k);
    const std::vector<int> r = boundary_prefix(ref);
    const std::vector<int> h = boundary_prefix(hyp);
    const int n = ref.n_units();
    int errors = 0;
    for (int i = 1; i <= n - k; ++i) {
        const int ref_count = r[static_cast<std::size_t>(i + k - 1)] - r[static_cast<std::size_t>(i - 1)];
        const int hyp_count = h[static_cast<std::size_t>(i + k - 1)] - h[static_cast<std::size_t>(i - 1)];
        errors += ref_count != hyp_count ? 1 : 0;
    }
    return static_cast<double>(errors) / static_cast<double>(n - k);
}

PurityCoverage purity_coverage(const TimedSegmentation& ref, const TimedSegmentation& hyp) {
    const double total = ref.extent();
    if (std::abs(total - hyp.extent()) > kTimeTolerance) {
        throw ValidationError("extent mismatch: reference spans " + std::to_string(total) +
                              " s, hypothesis spans " + std::to_string(hyp.extent()) + " s");
    }
    if (!(total > 0.0)) {
        throw ValidationError("timed segmentations have zero extent");
    }
    return {summed_max_overlap(hyp.segments(), ref.segments()) / total,
            summed_max_overlap(ref.segments(), hyp.segments()) / total};
}

double spcf(double purity, double coverage) {
    const double sum = purity + coverage;
    if (sum == 0.0) {
        return 0.0;
    }
    return 2.0 * purity * coverage / sum;
}

TimedSegmentation labels_to_timed(const Segmentation& seg, const BlockTimeline& timeline) {
    if (static_cast<std::size_t>(seg.n_units()) != timeline.size()) {
        throw ValidationError("segmentation has " + std::to_string(seg.n_units()) +
                              " units but the timeline has " + std::to_string(timeline.size()) +
                              " blocks");
    }
    std::vector<TimedSpan> spans;
    spans.reserve(static_cast<std::size_t>(seg.segment_count()));
    std::size_t first = 0;
    auto emit = [&](std::size_t last_exclusive) {
        spans.push_back({timeline.spans[first].start_sec, timeline.spans[last_exclusive - 1].end_sec});
        first = last_exclusive;
    };
    for (int gap : seg.boundaries()) {
        emit(static_cast<std::size_t>(gap));
    }
    emit(timeline.size());
    return TimedSegmentation(std::move(spans));
}

BlockTimeline unit_timeline(int n_units) {
    BlockTimeline timeline;
    timeline.spans.reserve(static_cast<std::size_t>(std::max(n_units, 0)));
    for (int i = 0; i < n_units; ++i) {
        timeline.spans.push_back({static_cast<double>(i), static_cast<double>(i + 1)});
    }
    return timeline;
}

MetricReport evaluate(const Segmentation& ref, const Segmentation& hyp, std::optional<int> k,
                      const BlockTimeline* timeline) {
    MetricReport report;
    report.n_units = ref.n_units();
    report.k_used = k.value_or(compute_k(ref));
    report.pk = pk(ref, hyp, report.k_used);
    report.windiff = windiff(ref, hyp, report.k_used);

    const BlockTimeline units = timeline ? BlockTimeline{} : unit_timeline(ref.n_units());
    const BlockTimeline& spans = timeline ? *timeline : units;
    const PurityCoverage pc = purity_coverage(labels_to_timed(ref, spans), labels_to_timed(hyp, spans));
    report.purity = pc.purity;
    report.coverage = pc.coverage;
    report.spcf = spcf(pc.purity, pc.coverage);
    return report;
}

MetricReport mean_report(std::span<const MetricReport> reports) {
    MetricReport mean;
    if (reports.empty()) {
        return mean;
    }
    for (const MetricReport& r : reports) {
        mean.pk += r.pk;
        mean.windiff += r.windiff;
        mean.purity += r.purity;
        mean.coverage += r.coverage;
        mean.n_units += r.n_units;
    }
    const auto count = static_cast<double>(reports.size());
    mean.pk /= count;
    mean.windiff /= count;
    mean.purity /= count;
    mean.coverage /= count;
    mean.spcf = spcf(mean.purity, mean.coverage);
    return mean;
}

} // namespace segtopics
