#pragma once

#include <limits>
#include <span>

#include "segtopics/model.hpp"

namespace segtopics {

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam update of one tensor. `step` is the 1-based count
// of updates including this one.
void adam_update(Matrix& param, const Matrix& grad, Matrix& first_moment, Matrix& second_moment,
                 long step, double lr, const AdamHyper& hyper = {});

struct AdamState {
    HeadParams first_moment;
    HeadParams second_moment;
    long step = 0;

    static AdamState for_config(const HeadConfig& config);
};

// One update of every tensor. Throws ValidationError on a shape mismatch
// between params, gradients and state.
void adam_step(HeadParams& params, const HeadParams& gradients, AdamState& state, double lr,
               const AdamHyper& hyper = {});

struct PlateauConfig {
    double factor = 0.5;
    int patience = 2;
    double min_lr = 1e-5;
    double min_delta = 1e-5; // an epoch improves iff loss < best - min_delta
};

// Reduce-on-plateau on a monitored loss, one observe() per epoch.
class PlateauScheduler {
public:
    PlateauScheduler(double initial_lr, const PlateauConfig& config);

    // Records the epoch's loss and returns the learning rate for the next epoch.
    double observe(double loss);

    double lr() const { return lr_; }
    int bad_epochs() const { return bad_epochs_; }
    double best() const { return best_; }

private:
    PlateauConfig config_;
    double lr_;
    double best_ = std::numeric_limits<double>::infinity();
    int bad_epochs_ = 0;
};

// Learning rate after replaying a history of monitored losses.
double plateau_lr(std::span<const double> history, double initial_lr, const PlateauConfig& config = {});

} // namespace segtopics
