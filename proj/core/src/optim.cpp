#include "segtopics/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "segtopics/error.hpp"

namespace segtopics {

void adam_update(Matrix& param, const Matrix& grad, Matrix& first_moment, Matrix& second_moment,
                 long step, double lr, const AdamHyper& hyper) {
    first_moment = hyper.beta1 * first_moment + (1.0 - hyper.beta1) * grad;
    second_moment = hyper.beta2 * second_moment + (1.0 - hyper.beta2) * grad.cwiseAbs2();
    const double correction1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(step));
    const double correction2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(step));
    param.array() -= lr * (first_moment.array() / correction1) /
                     ((second_moment.array() / correction2).sqrt() + hyper.eps);
}

AdamState AdamState::for_config(const HeadConfig& config) {
    return {HeadParams::zeros(config), HeadParams::zeros(config), 0};
}

void adam_step(HeadParams& params, const HeadParams& gradients, AdamState& state, double lr,
               const AdamHyper& hyper) {
    auto p = params.named_tensors();
    const auto g = gradients.named_tensors();
    auto m = state.first_moment.named_tensors();
    auto v = state.second_moment.named_tensors();
    if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
        throw ValidationError("adam_step: parameter, gradient and state tensor counts differ");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Matrix& param = *p[i].second;
        for (const Matrix* other : {g[i].second, static_cast<const Matrix*>(m[i].second),
                                    static_cast<const Matrix*>(v[i].second)}) {
            if (other->rows() != param.rows() || other->cols() != param.cols()) {
                throw ValidationError("adam_step: shape mismatch at " + p[i].first);
            }
        }
    }
    ++state.step;
    for (std::size_t i = 0; i < p.size(); ++i) {
        adam_update(*p[i].second, *g[i].second, *m[i].second, *v[i].second, state.step, lr, hyper);
    }
}

PlateauScheduler::PlateauScheduler(double initial_lr, const PlateauConfig& config)
    : config_(config), lr_(initial_lr) {
    if (!(config.factor > 0.0 && config.factor < 1.0)) {
        throw ValidationError("plateau factor must be in (0, 1)");
    }
    if (!(initial_lr > config.min_lr)) {
        throw ValidationError("initial learning rate must exceed min_lr");
    }
}

double PlateauScheduler::observe(double loss) {
    if (loss < best_ - config_.min_delta) {
        best_ = loss;
        bad_epochs_ = 0;
    } else {
        ++bad_epochs_;
    }
    if (bad_epochs_ >= config_.patience) {
        lr_ = std::max(lr_ * config_.factor, config_.min_lr);
        bad_epochs_ = 0;
    }
    return lr_;
}

double plateau_lr(std::span<const double> history, double initial_lr, const PlateauConfig& config) {
    PlateauScheduler scheduler(initial_lr, config);
    for (double loss : history) {
        scheduler.observe(loss);
    }
    return scheduler.lr();
}

} // namespace segtopics
