#include "segtopics/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "segtopics/error.hpp"

namespace segtopics {

namespace {

using Eigen::VectorXd;

constexpr double kLayerNormEps = 1e-5;
const double kGeluScale = std::sqrt(2.0 / std::numbers::pi);
constexpr double kGeluCubic = 0.044715;

struct LayerNormCache {
    Matrix normalized; // xhat
    VectorXd inv_std;
};

Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, LayerNormCache& cache) {
    const VectorXd mean = x.rowwise().mean();
    Matrix centered = x.colwise() - mean;
    const VectorXd var = centered.array().square().rowwise().mean();
    cache.inv_std = (var.array() + kLayerNormEps).rsqrt();
    cache.normalized = centered.array().colwise() * cache.inv_std.array();
    Matrix out = cache.normalized.array().rowwise() * gain.row(0).array();
    out.rowwise() += bias.row(0);
    return out;
}

Matrix layer_norm_backward(const Matrix& grad_out, const LayerNormCache& cache, const Matrix& gain,
                           Matrix& grad_gain, Matrix& grad_bias) {
    grad_gain += (grad_out.array() * cache.normalized.array()).colwise().sum().matrix();
    grad_bias += grad_out.colwise().sum();
    const Matrix grad_norm = grad_out.array().rowwise() * gain.row(0).array();
    const VectorXd mean_grad = grad_norm.rowwise().mean();
    const VectorXd mean_proj = (grad_norm.array() * cache.normalized.array()).rowwise().mean();
    Matrix grad_in = grad_norm.colwise() - mean_grad;
    grad_in.array() -= cache.normalized.array().colwise() * mean_proj.array();
    grad_in.array().colwise() *= cache.inv_std.array();
    return grad_in;
}

Matrix affine(const Matrix& x, const Matrix& weight, const Matrix& bias) {
    Matrix out = x * weight;
    out.rowwise() += bias.row(0);
    return out;
}

// Accumulates weight/bias gradients; returns the gradient w.r.t. x.
Matrix affine_backward(const Matrix& grad_out, const Matrix& x, const Matrix& weight,
                       Matrix& grad_weight, Matrix& grad_bias) {
    grad_weight.noalias() += x.transpose() * grad_out;
    grad_bias += grad_out.colwise().sum();
    return grad_out * weight.transpose();
}

double gelu(double x) {
    return 0.5 * x * (1.0 + std::tanh(kGeluScale * (x + kGeluCubic * x * x * x)));
}

double gelu_derivative(double x) {
    const double t = std::tanh(kGeluScale * (x + kGeluCubic * x * x * x));
    return 0.5 * (1.0 + t) +
           0.5 * x * (1.0 - t * t) * kGeluScale * (1.0 + 3.0 * kGeluCubic * x * x);
}

Matrix positional_encoding(int n, int width) {
    Matrix pe(n, width);
    for (int pos = 0; pos < n; ++pos) {
        for (int i = 0; i < width; i += 2) {
            const double rate = std::pow(10000.0, -static_cast<double>(i) / width);
            pe(pos, i) = std::sin(pos * rate);
            if (i + 1 < width) {
                pe(pos, i + 1) = std::cos(pos * rate);
            }
        }
    }
    return pe;
}

// Inverted dropout mask (entries 0 or 1/(1-p)); empty when inactive.
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng* rng) {
    if (rng == nullptr || p <= 0.0) {
        return {};
    }
    Matrix mask(rows, cols);
    const double keep = 1.0 / (1.0 - p);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            mask(r, c) = rng->uniform() < p ? 0.0 : keep;
        }
    }
    return mask;
}

void apply_mask(Matrix& x, const Matrix& mask) {
    if (mask.size() != 0) {
        x.array() *= mask.array();
    }
}

struct LayerTrace {
    Matrix input;
    LayerNormCache ln1;
    Matrix attn_in;
    Matrix q, k, v;
    std::vector<Matrix> probs; // one n x n matrix per head
    Matrix attn_cat;
    Matrix mask1;
    Matrix mid;
    LayerNormCache ln2;
    Matrix ff_in;
    Matrix pre_act;
    Matrix act;
    Matrix mask2;
};

struct ForwardTrace {
    Matrix mask0;
    std::vector<LayerTrace> layers;
    LayerNormCache final_ln;
    Matrix final_out;
    VectorXd logits;
};

void check_input(const ContextSequence& ctx, const HeadConfig& config) {
    if (ctx.size() < 1) {
        throw ValidationError("context sequence is empty");
    }
    if (ctx.rows.cols() != 3 * static_cast<Eigen::Index>(config.input_dim)) {
        throw ValidationError("context width " + std::to_string(ctx.rows.cols()) +
                              " does not match model input 3*" + std::to_string(config.input_dim));
    }
    if (ctx.size() > config.max_blocks) {
        throw ValidationError("sequence of " + std::to_string(ctx.size()) +
                              " blocks exceeds positional capacity " +
                              std::to_string(config.max_blocks));
    }
}

VectorXd run_forward(const ContextSequence& ctx, const HeadModel& model, Rng* rng, ForwardTrace& trace) {
    const HeadConfig& cfg = model.config;
    const HeadParams& p = model.params;
    check_input(ctx, cfg);
    const Eigen::Index n = ctx.rows.rows();
    const int h = cfg.model_dim;
    const int head_dim = h / cfg.heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

    Matrix x = affine(ctx.rows, p.input_weight, p.input_bias);
    x += positional_encoding(static_cast<int>(n), h);
    trace.mask0 = dropout_mask(n, h, cfg.dropout, rng);
    apply_mask(x, trace.mask0);

    trace.layers.resize(p.layers.size());
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const LayerParams& lp = p.layers[l];
        LayerTrace& t = trace.layers[l];
        t.input = x;
        t.attn_in = layer_norm(x, lp.ln1_gain, lp.ln1_bias, t.ln1);
        t.q = affine(t.attn_in, lp.q_weight, lp.q_bias);
        t.k = affine(t.attn_in, lp.k_weight, lp.k_bias);
        t.v = affine(t.attn_in, lp.v_weight, lp.v_bias);
        t.attn_cat.resize(n, h);
        t.probs.resize(static_cast<std::size_t>(cfg.heads));
        for (int a = 0; a < cfg.heads; ++a) {
            const auto qa = t.q.middleCols(a * head_dim, head_dim);
            const auto ka = t.k.middleCols(a * head_dim, head_dim);
            Matrix scores = (qa * ka.transpose()) * scale;
            const VectorXd row_max = scores.rowwise().maxCoeff();
            scores = (scores.colwise() - row_max).array().exp();
            const VectorXd row_sum = scores.rowwise().sum();
            scores.array().colwise() /= row_sum.array();
            t.attn_cat.middleCols(a * head_dim, head_dim) = scores * t.v.middleCols(a * head_dim, head_dim);
            t.probs[static_cast<std::size_t>(a)] = std::move(scores);
        }
        Matrix attn_out = affine(t.attn_cat, lp.o_weight, lp.o_bias);
        t.mask1 = dropout_mask(n, h, cfg.dropout, rng);
        apply_mask(attn_out, t.mask1);
        t.mid = x + attn_out;

        t.ff_in = layer_norm(t.mid, lp.ln2_gain, lp.ln2_bias, t.ln2);
        t.pre_act = affine(t.ff_in, lp.ff1_weight, lp.ff1_bias);
        t.act = t.pre_act.unaryExpr(&gelu);
        Matrix ff_out = affine(t.act, lp.ff2_weight, lp.ff2_bias);
        t.mask2 = dropout_mask(n, h, cfg.dropout, rng);
        apply_mask(ff_out, t.mask2);
        x = t.mid + ff_out;
    }

    trace.final_out = layer_norm(x, p.final_gain, p.final_bias, trace.final_ln);
    trace.logits = (trace.final_out * p.output_weight).col(0).array() + p.output_bias(0, 0);
    return trace.logits;
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Matrix xavier(int fan_in, int fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Matrix m(fan_in, fan_out);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            m(r, c) = rng.uniform(-limit, limit);
        }
    }
    return m;
}

void check_target(const ContextSequence& ctx, const Segmentation& target) {
    if (target.n_units() != ctx.size()) {
        throw ValidationError("target has " + std::to_string(target.n_units()) +
                              " units but the sequence has " + std::to_string(ctx.size()) + " blocks");
    }
}

} // namespace

void HeadConfig::validate() const {
    if (input_dim < 1 || model_dim < 1 || layers < 1 || heads < 1 || ff_mult < 1 || max_blocks < 1) {
        throw ValidationError("head config sizes must all be positive");
    }
    if (model_dim % heads != 0) {
        throw ValidationError("model_dim " + std::to_string(model_dim) +
                              " is not divisible by heads " + std::to_string(heads));
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) {
        throw ValidationError("dropout must be in [0, 1)");
    }
}

HeadParams HeadParams::zeros(const HeadConfig& cfg) {
    cfg.validate();
    const int d3 = 3 * cfg.input_dim;
    const int h = cfg.model_dim;
    const int ff = cfg.ff_mult * h;
    HeadParams p;
    p.input_weight = Matrix::Zero(d3, h);
    p.input_bias = Matrix::Zero(1, h);
    p.layers.resize(static_cast<std::size_t>(cfg.layers));
    for (LayerParams& lp : p.layers) {
        lp.ln1_gain = Matrix::Zero(1, h);
        lp.ln1_bias = Matrix::Zero(1, h);
        for (Matrix* w : {&lp.q_weight, &lp.k_weight, &lp.v_weight, &lp.o_weight}) {
            *w = Matrix::Zero(h, h);
        }
        for (Matrix* b : {&lp.q_bias, &lp.k_bias, &lp.v_bias, &lp.o_bias}) {
            *b = Matrix::Zero(1, h);
        }
        lp.ln2_gain = Matrix::Zero(1, h);
        lp.ln2_bias = Matrix::Zero(1, h);
        lp.ff1_weight = Matrix::Zero(h, ff);
        lp.ff1_bias = Matrix::Zero(1, ff);
        lp.ff2_weight = Matrix::Zero(ff, h);
        lp.ff2_bias = Matrix::Zero(1, h);
    }
    p.final_gain = Matrix::Zero(1, h);
    p.final_bias = Matrix::Zero(1, h);
    p.output_weight = Matrix::Zero(h, 1);
    p.output_bias = Matrix::Zero(1, 1);
    return p;
}

std::vector<std::pair<std::string, Matrix*>> HeadParams::named_tensors() {
    std::vector<std::pair<std::string, Matrix*>> out;
    out.emplace_back("input.weight", &input_weight);
    out.emplace_back("input.bias", &input_bias);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string prefix = "layers." + std::to_string(l) + ".";
        LayerParams& lp = layers[l];
        out.emplace_back(prefix + "ln1.gain", &lp.ln1_gain);
        out.emplace_back(prefix + "ln1.bias", &lp.ln1_bias);
        out.emplace_back(prefix + "attn.q.weight", &lp.q_weight);
        out.emplace_back(prefix + "attn.q.bias", &lp.q_bias);
        out.emplace_back(prefix + "attn.k.weight", &lp.k_weight);
        out.emplace_back(prefix + "attn.k.bias", &lp.k_bias);
        out.emplace_back(prefix + "attn.v.weight", &lp.v_weight);
        out.emplace_back(prefix + "attn.v.bias", &lp.v_bias);
        out.emplace_back(prefix + "attn.o.weight", &lp.o_weight);
        out.emplace_back(prefix + "attn.o.bias", &lp.o_bias);
        out.emplace_back(prefix + "ln2.gain", &lp.ln2_gain);
        out.emplace_back(prefix + "ln2.bias", &lp.ln2_bias);
        out.emplace_back(prefix + "ff1.weight", &lp.ff1_weight);
        out.emplace_back(prefix + "ff1.bias", &lp.ff1_bias);
        out.emplace_back(prefix + "ff2.weight", &lp.ff2_weight);
        out.emplace_back(prefix + "ff2.bias", &lp.ff2_bias);
    }
    out.emplace_back("final_norm.gain", &final_gain);
    out.emplace_back("final_norm.bias", &final_bias);
    out.emplace_back("output.weight", &output_weight);
    out.emplace_back("output.bias", &output_bias);
    return out;
}

std::vector<std::pair<std::string, const Matrix*>> HeadParams::named_tensors() const {
    auto mutable_view = const_cast<HeadParams*>(this)->named_tensors();
    std::vector<std::pair<std::string, const Matrix*>> out;
    out.reserve(mutable_view.size());
    for (auto& [name, tensor] : mutable_view) {
        out.emplace_back(std::move(name), tensor);
    }
    return out;
}

std::size_t HeadParams::parameter_count() const {
    std::size_t total = 0;
    for (const auto& [name, tensor] : named_tensors()) {
        total += static_cast<std::size_t>(tensor->size());
    }
    return total;
}

HeadModel HeadModel::initialize(const HeadConfig& config, std::uint64_t seed) {
    HeadModel model;
    model.config = config;
    model.params = HeadParams::zeros(config);
    Rng rng(seed);
    HeadParams& p = model.params;
    const int d3 = 3 * config.input_dim;
    const int h = config.model_dim;
    const int ff = config.ff_mult * h;
    p.input_weight = xavier(d3, h, rng);
    for (LayerParams& lp : p.layers) {
        lp.ln1_gain.setOnes();
        lp.ln2_gain.setOnes();
        lp.q_weight = xavier(h, h, rng);
        lp.k_weight = xavier(h, h, rng);
        lp.v_weight = xavier(h, h, rng);
        lp.o_weight = xavier(h, h, rng);
        lp.ff1_weight = xavier(h, ff, rng);
        lp.ff2_weight = xavier(ff, h, rng);
    }
    p.final_gain.setOnes();
    p.output_weight = xavier(h, 1, rng);
    return model;
}

ContextSequence build_context(const Matrix& z) {
    if (z.rows() < 1) {
        throw ValidationError("cannot build context for an empty sequence");
    }
    const Eigen::Index n = z.rows();
    const Eigen::Index d = z.cols();
    ContextSequence ctx;
    ctx.input_dim = static_cast<int>(d);
    ctx.rows = Matrix::Zero(n, 3 * d);
    ctx.rows.middleCols(d, d) = z;
    if (n > 1) {
        ctx.rows.block(1, 0, n - 1, d) = z.topRows(n - 1);
        ctx.rows.block(0, 2 * d, n - 1, d) = z.bottomRows(n - 1);
    }
    return ctx;
}

ContextSequence build_context(const BlockEmbeddingSequence& embeddings) {
    if (embeddings.rows() < 1) {
        throw ValidationError("cannot build context for an empty sequence");
    }
    Matrix z(static_cast<Eigen::Index>(embeddings.rows()), static_cast<Eigen::Index>(embeddings.dim()));
    for (std::size_t r = 0; r < embeddings.rows(); ++r) {
        for (std::size_t c = 0; c < embeddings.dim(); ++c) {
            z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = embeddings.at(r, c);
        }
    }
    return build_context(z);
}

std::vector<double> head_forward(const ContextSequence& ctx, const HeadModel& model, Rng* dropout_rng) {
    ForwardTrace trace;
    const VectorXd logits = run_forward(ctx, model, dropout_rng, trace);
    std::vector<double> probs(static_cast<std::size_t>(logits.size()));
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        probs[static_cast<std::size_t>(i)] = sigmoid(logits(i));
    }
    return probs;
}

double bce_loss(std::span<const double> probabilities, const Segmentation& target) {
    const std::size_t n = probabilities.size();
    if (n < 2) {
        throw ValidationError("bce_loss needs at least 2 blocks (one gap)");
    }
    if (static_cast<std::size_t>(target.n_units()) != n) {
        throw ValidationError("bce_loss: " + std::to_string(n) + " probabilities for " +
                              std::to_string(target.n_units()) + " units");
    }
    const std::vector<int> labels = target.gap_flags();
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double p = std::clamp(probabilities[k], kProbabilityClamp, 1.0 - kProbabilityClamp);
        total -= labels[k] != 0 ? std::log(p) : std::log(1.0 - p);
    }
    return total / static_cast<double>(n - 1);
}

LossAndGradients head_backward(const ContextSequence& ctx, const HeadModel& model,
                               const Segmentation& target, Rng* dropout_rng) {
    check_target(ctx, target);
    const HeadConfig& cfg = model.config;
    const HeadParams& p = model.params;
    ForwardTrace trace;
    const VectorXd logits = run_forward(ctx, model, dropout_rng, trace);
    const Eigen::Index n = logits.size();
    if (n < 2) {
        throw ValidationError("head_backward needs at least 2 blocks (one gap)");
    }

    LossAndGradients result;
    result.probabilities.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        result.probabilities[static_cast<std::size_t>(i)] = sigmoid(logits(i));
    }
    result.loss = bce_loss(result.probabilities, target);
    result.gradients = HeadParams::zeros(cfg);
    HeadParams& g = result.gradients;

    // d loss / d logit: (p - y) / gaps inside the clamp range, 0 where the
    // clamp is active (the loss is flat there). The last block has no gap.
    const std::vector<int> labels = target.gap_flags();
    Matrix grad_logits = Matrix::Zero(n, 1);
    const double inv_gaps = 1.0 / static_cast<double>(n - 1);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double prob = result.probabilities[static_cast<std::size_t>(i)];
        if (prob > kProbabilityClamp && prob < 1.0 - kProbabilityClamp) {
            grad_logits(i, 0) = (prob - labels[static_cast<std::size_t>(i)]) * inv_gaps;
        }
    }

    const Matrix grad_final = affine_backward(grad_logits, trace.final_out, p.output_weight,
                                              g.output_weight, g.output_bias);
    Matrix grad_x = layer_norm_backward(grad_final, trace.final_ln, p.final_gain, g.final_gain, g.final_bias);

    const int h = cfg.model_dim;
    const int head_dim = h / cfg.heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

    for (std::size_t li = p.layers.size(); li-- > 0;) {
        const LayerParams& lp = p.layers[li];
        LayerParams& lg = g.layers[li];
        const LayerTrace& t = trace.layers[li];

        // x = mid + dropout(ff2(gelu(ff1(ln2(mid)))))
        Matrix grad_ff_out = grad_x;
        apply_mask(grad_ff_out, t.mask2);
        Matrix grad_act = affine_backward(grad_ff_out, t.act, lp.ff2_weight, lg.ff2_weight, lg.ff2_bias);
        grad_act.array() *= t.pre_act.unaryExpr(&gelu_derivative).array();
        const Matrix grad_ff_in = affine_backward(grad_act, t.ff_in, lp.ff1_weight, lg.ff1_weight, lg.ff1_bias);
        Matrix grad_mid = grad_x + layer_norm_backward(grad_ff_in, t.ln2, lp.ln2_gain, lg.ln2_gain, lg.ln2_bias);

        // mid = input + dropout(o(attention(ln1(input))))
        Matrix grad_attn_out = grad_mid;
        apply_mask(grad_attn_out, t.mask1);
        const Matrix grad_cat = affine_backward(grad_attn_out, t.attn_cat, lp.o_weight, lg.o_weight, lg.o_bias);

        Matrix grad_q(n, h);
        Matrix grad_k(n, h);
        Matrix grad_v(n, h);
        for (int a = 0; a < cfg.heads; ++a) {
            const Matrix& probs = t.probs[static_cast<std::size_t>(a)];
            const auto grad_head = grad_cat.middleCols(a * head_dim, head_dim);
            const auto va = t.v.middleCols(a * head_dim, head_dim);
            const Matrix grad_probs = grad_head * va.transpose();
            grad_v.middleCols(a * head_dim, head_dim) = probs.transpose() * grad_head;
            const VectorXd row_dot = (grad_probs.array() * probs.array()).rowwise().sum();
            Matrix grad_scores = probs.array() * (grad_probs.colwise() - row_dot).array();
            grad_scores *= scale;
            grad_q.middleCols(a * head_dim, head_dim) = grad_scores * t.k.middleCols(a * head_dim, head_dim);
            grad_k.middleCols(a * head_dim, head_dim) =
                grad_scores.transpose() * t.q.middleCols(a * head_dim, head_dim);
        }
        Matrix grad_attn_in = affine_backward(grad_q, t.attn_in, lp.q_weight, lg.q_weight, lg.q_bias);
        grad_attn_in += affine_backward(grad_k, t.attn_in, lp.k_weight, lg.k_weight, lg.k_bias);
        grad_attn_in += affine_backward(grad_v, t.attn_in, lp.v_weight, lg.v_weight, lg.v_bias);

        grad_x = grad_mid + layer_norm_backward(grad_attn_in, t.ln1, lp.ln1_gain, lg.ln1_gain, lg.ln1_bias);
    }

    apply_mask(grad_x, trace.mask0);
    affine_backward(grad_x, ctx.rows, p.input_weight, g.input_weight, g.input_bias);
    return result;
}

} // namespace segtopics
