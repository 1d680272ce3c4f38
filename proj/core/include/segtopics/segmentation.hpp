#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace segtopics {

// A count of units plus the set of gaps where a new segment starts.
// Gap g (1-based) separates unit g from unit g + 1, so valid gaps are
// 1..n_units-1. Boundaries are kept sorted and unique.
class Segmentation {
public:
    Segmentation() = default;
    // Throws ValidationError on n_units == 0 or an out-of-range gap.
    // Duplicate gaps collapse (set semantics).
    Segmentation(int n_units, std::vector<int> boundaries);

    // y[g-1] == 1 iff gap g is a boundary; length n_units - 1.
    static Segmentation from_gap_flags(std::span<const int> flags);

    int n_units() const { return n_units_; }
    int gap_count() const { return n_units_ - 1; }
    const std::vector<int>& boundaries() const { return boundaries_; }
    int segment_count() const { return static_cast<int>(boundaries_.size()) + 1; }
    bool is_boundary(int gap) const;

    std::vector<int> gap_flags() const;
    // Lengths (in units) of each segment, in order.
    std::vector<int> segment_lengths() const;

    friend bool operator==(const Segmentation&, const Segmentation&) = default;

private:
    int n_units_ = 1;
    std::vector<int> boundaries_;
};

enum class ScoreKind { similarity, depth, probability };

std::string_view to_string(ScoreKind kind);

// One real value per gap, 0-based storage: values[g-1] scores gap g.
struct GapScores {
    std::vector<double> values;
    ScoreKind kind = ScoreKind::similarity;

    std::size_t size() const { return values.size(); }
};

} // namespace segtopics
