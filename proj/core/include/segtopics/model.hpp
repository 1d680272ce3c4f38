#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "segtopics/embedio.hpp"
#include "segtopics/random.hpp"
#include "segtopics/segmentation.hpp"

namespace segtopics {

using Matrix = Eigen::MatrixXd;

struct HeadConfig {
    int input_dim = 1024; // d, width of one block embedding
    int model_dim = 256;  // h
    int layers = 2;
    int heads = 4;
    int ff_mult = 4;
    double dropout = 0.1;
    int max_blocks = 4096; // positional-encoding capacity

    // Throws ValidationError unless all sizes are positive, model_dim is a
    // multiple of heads and dropout is in [0, 1).
    void validate() const;

    friend bool operator==(const HeadConfig&, const HeadConfig&) = default;
};

struct LayerParams {
    Matrix ln1_gain, ln1_bias;
    Matrix q_weight, q_bias, k_weight, k_bias, v_weight, v_bias, o_weight, o_bias;
    Matrix ln2_gain, ln2_bias;
    Matrix ff1_weight, ff1_bias, ff2_weight, ff2_bias;
};

// Every trainable tensor of the head. Gradients and Adam moments reuse the
// same type. Biases and gains are stored as 1 x width row matrices.
struct HeadParams {
    Matrix input_weight, input_bias; // 3d -> h
    std::vector<LayerParams> layers;
    Matrix final_gain, final_bias;   // layer norm before the output projection
    Matrix output_weight, output_bias; // h -> 1

    // All tensors zero, shaped for config.
    static HeadParams zeros(const HeadConfig& config);

    // Stable order; names look like "layers.0.attn.q.weight".
    std::vector<std::pair<std::string, Matrix*>> named_tensors();
    std::vector<std::pair<std::string, const Matrix*>> named_tensors() const;

    std::size_t parameter_count() const;
};

struct HeadModel {
    HeadConfig config;
    HeadParams params;
    double threshold = 0.5; // boundary iff probability >= threshold

    // Xavier-uniform weights, zero biases, unit gains.
    static HeadModel initialize(const HeadConfig& config, std::uint64_t seed);
};

// Row k is (z_{k-1}, z_k, z_{k+1}) with zero vectors past either end.
struct ContextSequence {
    Matrix rows; // n x 3d
    int input_dim = 0;

    int size() const { return static_cast<int>(rows.rows()); }
};

ContextSequence build_context(const BlockEmbeddingSequence& embeddings);
ContextSequence build_context(const Matrix& embeddings);

// Per-block probabilities of a topic change after that block, all in
// (0, 1). Dropout is applied only when dropout_rng is non-null.
std::vector<double> head_forward(const ContextSequence& ctx, const HeadModel& model,
                                 Rng* dropout_rng = nullptr);

inline constexpr double kProbabilityClamp = 1e-7;

// Mean binary cross-entropy over gaps 1..n-1; probability k scores gap k
// and the last block's probability is ignored.
double bce_loss(std::span<const double> probabilities, const Segmentation& target);

struct LossAndGradients {
    double loss = 0.0;
    std::vector<double> probabilities;
    HeadParams gradients;
};

// Analytic gradients of bce_loss with respect to every parameter.
LossAndGradients head_backward(const ContextSequence& ctx, const HeadModel& model,
                               const Segmentation& target, Rng* dropout_rng = nullptr);

} // namespace segtopics
