#include "segtopics/segmentation.hpp"

#include <algorithm>
#include <string>

#include "segtopics/error.hpp"

namespace segtopics {

Segmentation::Segmentation(int n_units, std::vector<int> boundaries)
    : n_units_(n_units), boundaries_(std::move(boundaries)) {
    if (n_units_ < 1) {
        throw ValidationError("segmentation needs at least one unit, got n_units=" +
                              std::to_string(n_units_));
    }
    std::sort(boundaries_.begin(), boundaries_.end());
    boundaries_.erase(std::unique(boundaries_.begin(), boundaries_.end()), boundaries_.end());
    for (int gap : boundaries_) {
        if (gap < 1 || gap > n_units_ - 1) {
            throw ValidationError("boundary gap " + std::to_string(gap) +
                                  " outside 1.." + std::to_string(n_units_ - 1));
        }
    }
}

Segmentation Segmentation::from_gap_flags(std::span<const int> flags) {
    std::vector<int> gaps;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (flags[i] != 0) {
            gaps.push_back(static_cast<int>(i) + 1);
        }
    }
    return Segmentation(static_cast<int>(flags.size()) + 1, std::move(gaps));
}

bool Segmentation::is_boundary(int gap) const {
    return std::binary_search(boundaries_.begin(), boundaries_.end(), gap);
}

std::vector<int> Segmentation::gap_flags() const {
    std::vector<int> flags(static_cast<std::size_t>(n_units_ - 1), 0);
    for (int gap : boundaries_) {
        flags[static_cast<std::size_t>(gap - 1)] = 1;
    }
    return flags;
}

std::vector<int> Segmentation::segment_lengths() const {
    std::vector<int> lengths;
    lengths.reserve(boundaries_.size() + 1);
    int start = 0;
    for (int gap : boundaries_) {
        lengths.push_back(gap - start);
        start = gap;
    }
    lengths.push_back(n_units_ - start);
    return lengths;
}

std::string_view to_string(ScoreKind kind) {
    switch (kind) {
    case ScoreKind::similarity:
        return "similarity";
    case ScoreKind::depth:
        return "depth";
    case ScoreKind::probability:
        return "probability";
    }
    return "unknown";
}

} // namespace segtopics
