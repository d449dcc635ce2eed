#pragma once

// Two-head embedding network: a shared rectified trunk feeding a triplet head
// and a softmax head whose outputs are concatenated into the embedding. The
// classifier reads the softmax head only.

#include "pla/types.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace pla {

struct ModelShape {
    int input_dim = 32;
    int hidden = 64;
    int embedding = 32;  // concatenation of two heads of embedding / 2 each
    int classes = 2;

    int head_dim() const { return embedding / 2; }
    /// Throws ConfigError on non-positive sizes or an odd embedding width.
    void validate() const;
    bool operator==(const ModelShape&) const = default;
};

struct ToyModelParams {
    Matrix trunk_w;  // input_dim x hidden
    Matrix trunk_b;  // 1 x hidden
    Matrix triplet_w;  // hidden x head_dim
    Matrix triplet_b;
    Matrix softmax_w;  // hidden x head_dim
    Matrix softmax_b;
    Matrix classifier_w;  // head_dim x classes
    Matrix classifier_b;

    static constexpr std::size_t block_count = 8;

    static ToyModelParams zeros(const ModelShape& shape);
    /// Uniform Glorot initialization of the weights, zero biases.
    static ToyModelParams random(const ModelShape& shape, std::uint64_t seed);

    ModelShape shape() const;
    std::array<Matrix*, block_count> blocks();
    std::array<const Matrix*, block_count> blocks() const;

    bool all_finite() const;
    std::size_t parameter_count() const;

    bool operator==(const ToyModelParams& other) const;
};

/// Intermediate activations kept for backpropagation.
struct ForwardCache {
    Matrix input;
    Matrix pre;     // trunk pre-activation
    Matrix hidden;  // rectified trunk output
    Matrix triplet;
    Matrix softmax;
    Matrix logits;

    /// [triplet | softmax]
    Matrix embeddings() const;
};

struct ForwardOutput {
    Matrix embeddings;
    Matrix logits;
};

/// Throws InvalidInput when the feature width does not match the trunk.
ForwardCache forward_cached(const ToyModelParams& model, const Matrix& features);
ForwardOutput forward(const ToyModelParams& model, const Matrix& features);

/// Gradients of a scalar loss with respect to every parameter block, given the
/// loss gradients with respect to the embeddings (N x embedding) and logits.
ToyModelParams backward(const ToyModelParams& model, const ForwardCache& cache,
                        const Matrix& grad_embeddings, const Matrix& grad_logits);

}  // namespace pla
