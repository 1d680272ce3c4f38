#pragma once

// Central finite differences against head_backward, for tests only.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "segtopics/model.hpp"
#include "segtopics/random.hpp"

namespace segtopics::oracle {

struct GradientProbe {
    std::string tensor;
    Eigen::Index index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double relative_error = 0.0;
};

// Every tensor including gains and biases gets perturbed weights, so no
// gradient path is trivially zero.
inline HeadModel randomized_model(const HeadConfig& config, std::uint64_t seed) {
    HeadModel model = HeadModel::initialize(config, seed);
    Rng rng(seed + 1);
    for (auto& [name, tensor] : model.params.named_tensors()) {
        for (Eigen::Index i = 0; i < tensor->size(); ++i) {
            tensor->data()[i] += 0.3 * rng.normal();
        }
    }
    return model;
}

// One coordinate of every tensor, then uniformly random ones up to `count`.
// Relative error is |a - n| / max(|a|, |n|, 1e-6).
inline std::vector<GradientProbe> finite_difference_probes(const ContextSequence& ctx, HeadModel model,
                                                           const Segmentation& target, std::size_t count,
                                                           double eps, std::uint64_t seed) {
    const LossAndGradients analytic = head_backward(ctx, model, target);
    auto params = model.params.named_tensors();
    const auto grads = analytic.gradients.named_tensors();
    std::uint64_t total = 0;
    for (const auto& [name, t] : params) {
        total += static_cast<std::uint64_t>(t->size());
    }
    Rng pick(seed);
    std::vector<std::pair<std::size_t, Eigen::Index>> coords;
    for (std::size_t t = 0; t < params.size(); ++t) {
        coords.emplace_back(t, static_cast<Eigen::Index>(pick.below(static_cast<std::uint64_t>(params[t].second->size()))));
    }
    while (coords.size() < std::max(count, params.size())) {
        std::uint64_t flat = pick.below(total);
        std::size_t t = 0;
        while (flat >= static_cast<std::uint64_t>(params[t].second->size())) {
            flat -= static_cast<std::uint64_t>(params[t].second->size());
            ++t;
        }
        coords.emplace_back(t, static_cast<Eigen::Index>(flat));
    }

    std::vector<GradientProbe> probes;
    for (const auto& [t, i] : coords) {
        double& x = params[t].second->data()[i];
        const double saved = x;
        x = saved + eps;
        const double up = bce_loss(head_forward(ctx, model), target);
        x = saved - eps;
        const double down = bce_loss(head_forward(ctx, model), target);
        x = saved;
        GradientProbe p;
        p.tensor = params[t].first;
        p.index = i;
        p.numeric = (up - down) / (2.0 * eps);
        p.analytic = grads[t].second->data()[i];
        p.relative_error =
            std::abs(p.numeric - p.analytic) / std::max({std::abs(p.numeric), std::abs(p.analytic), 1e-6});
        probes.push_back(p);
    }
    return probes;
}

} // namespace segtopics::oracle
