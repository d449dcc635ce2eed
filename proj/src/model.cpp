#include "pla/model.hpp"

#include "pla/error.hpp"
#include "pla/sampler.hpp"

#include <cmath>
#include <string>

namespace pla {

void ModelShape::validate() const {
    if (input_dim < 1 || hidden < 1 || embedding < 2 || classes < 1) {
        throw ConfigError("model sizes must be positive");
    }
    if (embedding % 2 != 0) throw ConfigError("embedding width must be even (two equal heads)");
}

ToyModelParams ToyModelParams::zeros(const ModelShape& s) {
    s.validate();
    ToyModelParams m;
    m.trunk_w = Matrix::Zero(s.input_dim, s.hidden);
    m.trunk_b = Matrix::Zero(1, s.hidden);
    m.triplet_w = Matrix::Zero(s.hidden, s.head_dim());
    m.triplet_b = Matrix::Zero(1, s.head_dim());
    m.softmax_w = Matrix::Zero(s.hidden, s.head_dim());
    m.softmax_b = Matrix::Zero(1, s.head_dim());
    m.classifier_w = Matrix::Zero(s.head_dim(), s.classes);
    m.classifier_b = Matrix::Zero(1, s.classes);
    return m;
}

ToyModelParams ToyModelParams::random(const ModelShape& s, std::uint64_t seed) {
    auto m = zeros(s);
    Rng rng(seed);
    for (Matrix* w : {&m.trunk_w, &m.triplet_w, &m.softmax_w, &m.classifier_w}) {
        const double limit = std::sqrt(6.0 / double(w->rows() + w->cols()));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (Eigen::Index j = 0; j < w->cols(); ++j) {
            for (Eigen::Index i = 0; i < w->rows(); ++i) (*w)(i, j) = u(rng);
        }
    }
    return m;
}

ModelShape ToyModelParams::shape() const {
    return {static_cast<int>(trunk_w.rows()), static_cast<int>(trunk_w.cols()),
            static_cast<int>(triplet_w.cols() + softmax_w.cols()), static_cast<int>(classifier_w.cols())};
}

std::array<Matrix*, ToyModelParams::block_count> ToyModelParams::blocks() {
    return {&trunk_w, &trunk_b, &triplet_w, &triplet_b, &softmax_w, &softmax_b, &classifier_w, &classifier_b};
}

std::array<const Matrix*, ToyModelParams::block_count> ToyModelParams::blocks() const {
    return {&trunk_w, &trunk_b, &triplet_w, &triplet_b, &softmax_w, &softmax_b, &classifier_w, &classifier_b};
}

bool ToyModelParams::all_finite() const {
    for (const Matrix* b : blocks()) {
        if (!b->allFinite()) return false;
    }
    return true;
}

std::size_t ToyModelParams::parameter_count() const {
    std::size_t n = 0;
    for (const Matrix* b : blocks()) n += static_cast<std::size_t>(b->size());
    return n;
}

bool ToyModelParams::operator==(const ToyModelParams& other) const {
    const auto a = blocks();
    const auto b = other.blocks();
    for (std::size_t i = 0; i < block_count; ++i) {
        if (a[i]->rows() != b[i]->rows() || a[i]->cols() != b[i]->cols()) return false;
        if ((a[i]->array() != b[i]->array()).any()) return false;
    }
    return true;
}

Matrix ForwardCache::embeddings() const {
    Matrix e(triplet.rows(), triplet.cols() + softmax.cols());
    e << triplet, softmax;
    return e;
}

ForwardCache forward_cached(const ToyModelParams& model, const Matrix& features) {
    if (features.cols() != model.trunk_w.rows()) {
        throw InvalidInput("feature width " + std::to_string(features.cols()) +
                           " does not match model input " + std::to_string(model.trunk_w.rows()));
    }
    ForwardCache c;
    c.input = features;
    c.pre = (features * model.trunk_w).rowwise() + model.trunk_b.row(0);
    c.hidden = c.pre.cwiseMax(0.0);
    c.triplet = (c.hidden * model.triplet_w).rowwise() + model.triplet_b.row(0);
    c.softmax = (c.hidden * model.softmax_w).rowwise() + model.softmax_b.row(0);
    c.logits = (c.softmax * model.classifier_w).rowwise() + model.classifier_b.row(0);
    return c;
}

ForwardOutput forward(const ToyModelParams& model, const Matrix& features) {
    auto c = forward_cached(model, features);
    return {c.embeddings(), std::move(c.logits)};
}

ToyModelParams backward(const ToyModelParams& model, const ForwardCache& cache,
                        const Matrix& grad_embeddings, const Matrix& grad_logits) {
    const auto n = cache.input.rows();
    const auto h = model.triplet_w.cols();
    if (grad_embeddings.rows() != n || grad_embeddings.cols() != h + model.softmax_w.cols() ||
        grad_logits.rows() != n || grad_logits.cols() != model.classifier_w.cols()) {
        throw InvalidInput("gradient shapes do not match the forward pass");
    }
    ToyModelParams g;
    g.classifier_w = cache.softmax.transpose() * grad_logits;
    g.classifier_b = grad_logits.colwise().sum();

    const Matrix d_trip = grad_embeddings.leftCols(h);
    const Matrix d_soft = grad_embeddings.rightCols(model.softmax_w.cols()) +
                          grad_logits * model.classifier_w.transpose();
    g.triplet_w = cache.hidden.transpose() * d_trip;
    g.triplet_b = d_trip.colwise().sum();
    g.softmax_w = cache.hidden.transpose() * d_soft;
    g.softmax_b = d_soft.colwise().sum();

    Matrix d_hidden = d_trip * model.triplet_w.transpose() + d_soft * model.softmax_w.transpose();
    d_hidden.array() *= (cache.pre.array() > 0.0).cast<double>();
    g.trunk_w = cache.input.transpose() * d_hidden;
    g.trunk_b = d_hidden.colwise().sum();
    return g;
}

}  // namespace pla
