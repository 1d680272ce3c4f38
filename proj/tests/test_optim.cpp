#include <doctest.h>

#include <cmath>

#include "segtopics/error.hpp"
#include "segtopics/optim.hpp"

using namespace segtopics;

TEST_CASE("first adam step moves each coordinate by about lr") {
    Matrix p = Matrix::Constant(2, 3, 1.0);
    Matrix g(2, 3);
    g << 0.5, -2.0, 1e-3, 40.0, -1e-2, 3.0;
    Matrix m = Matrix::Zero(2, 3);
    Matrix v = Matrix::Zero(2, 3);
    adam_update(p, g, m, v, 1, 0.001);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double sign = g.data()[i] > 0 ? 1.0 : -1.0;
        CHECK(p.data()[i] - 1.0 == doctest::Approx(-0.001 * sign).epsilon(1e-4));
    }
}

TEST_CASE("zero gradient leaves parameters unchanged") {
    Matrix p = Matrix::Constant(3, 1, 0.25);
    Matrix m = Matrix::Zero(3, 1);
    Matrix v = Matrix::Zero(3, 1);
    for (long step = 1; step <= 5; ++step) {
        adam_update(p, Matrix::Zero(3, 1), m, v, step, 0.01);
    }
    CHECK(p == Matrix::Constant(3, 1, 0.25));
}

TEST_CASE("constant gradient drives parameters monotonically") {
    Matrix p = Matrix::Zero(1, 1);
    Matrix m = Matrix::Zero(1, 1);
    Matrix v = Matrix::Zero(1, 1);
    double previous = 0.0;
    for (long step = 1; step <= 50; ++step) {
        adam_update(p, Matrix::Constant(1, 1, 0.7), m, v, step, 0.01);
        CHECK(p(0, 0) < previous);
        previous = p(0, 0);
    }
    CHECK(previous == doctest::Approx(-0.5).epsilon(1e-3));
}

TEST_CASE("adam_step validates shapes") {
    HeadConfig config;
    config.input_dim = 4;
    config.model_dim = 4;
    config.layers = 1;
    config.heads = 2;
    HeadParams params = HeadModel::initialize(config, 1).params;
    AdamState state = AdamState::for_config(config);
    HeadParams grads = HeadParams::zeros(config);
    adam_step(params, grads, state, 0.001);
    CHECK(state.step == 1);
    grads.output_weight.resize(2, 2);
    CHECK_THROWS_AS(adam_step(params, grads, state, 0.001), ValidationError);
    HeadConfig other = config;
    other.layers = 2;
    CHECK_THROWS_AS(adam_step(params, HeadParams::zeros(other), state, 0.001), ValidationError);
}

TEST_CASE("plateau scheduler") {
    const PlateauConfig cfg;
    const std::vector<double> falling{1.0, 0.9, 0.8, 0.7, 0.6};
    CHECK(plateau_lr(falling, 1e-3, cfg) == 1e-3);
    const std::vector<double> flat{1.0, 1.0, 1.0};
    CHECK(plateau_lr(std::span(flat).first(2), 1e-3, cfg) == 1e-3);
    CHECK(plateau_lr(flat, 1e-3, cfg) == doctest::Approx(5e-4));
    // Counter restarts after a reduction.
    const std::vector<double> flat5{1.0, 1.0, 1.0, 1.0, 1.0};
    CHECK(plateau_lr(std::span(flat5).first(4), 1e-3, cfg) == doctest::Approx(5e-4));
    CHECK(plateau_lr(flat5, 1e-3, cfg) == doctest::Approx(2.5e-4));
    // Improvements smaller than min_delta count as bad epochs.
    const std::vector<double> creeping{1.0, 1.0 - 1e-6, 1.0 - 2e-6, 1.0 - 3e-6};
    CHECK(plateau_lr(creeping, 1e-3, cfg) == doctest::Approx(5e-4));
    const std::vector<double> endless(200, 1.0);
    CHECK(plateau_lr(endless, 1e-3, cfg) == doctest::Approx(1e-5));

    PlateauScheduler s(1e-3, cfg);
    CHECK(s.observe(0.5) == 1e-3);
    CHECK(s.bad_epochs() == 0);
    CHECK(s.observe(0.6) == 1e-3);
    CHECK(s.bad_epochs() == 1);
    CHECK(s.best() == 0.5);
    CHECK_THROWS_AS(PlateauScheduler(0.0, cfg), ValidationError);
}
