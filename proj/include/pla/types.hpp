#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace pla {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

/// The vector steered by the Bayesian optimizer: triplet weight, margin and
/// the two order-statistic indices that set triplet hardness.
struct HyperParams {
    double lambda = 1.0;
    double margin = 0.2;
    int k = 1;
    int p = 1;

    static constexpr std::size_t dim = 4;

    Eigen::Vector4d to_vector() const { return {lambda, margin, double(k), double(p)}; }

    bool operator==(const HyperParams&) const = default;
};

/// Axis-aligned search box. The default is the initialization range of the
/// progressive schedule; narrower boxes must sit inside it.
struct HyperParamBox {
    double lambda_lo = 0.0, lambda_hi = 2.0;
    double margin_lo = -0.1, margin_hi = 0.3;
    int k_lo = 1, k_hi = 8;
    int p_lo = 1, p_hi = 16;

    Eigen::Vector4d lower() const { return {lambda_lo, margin_lo, double(k_lo), double(p_lo)}; }
    Eigen::Vector4d upper() const { return {lambda_hi, margin_hi, double(k_hi), double(p_hi)}; }
    Eigen::Vector4d width() const { return upper() - lower(); }

    bool contains(const HyperParams& w) const;

    /// Real coordinates to HyperParams; k and p rounded to nearest and clamped.
    HyperParams instantiate(const Eigen::Vector4d& x) const;

    /// Throws ConfigError unless lo <= hi and the box lies inside the default one.
    void validate() const;
};

/// Throws ConfigError when w lies outside the box.
void validate_hyperparams(const HyperParams& w, const HyperParamBox& box = {});

std::string to_string(const HyperParams& w);

/// N embeddings (rows) and their identity labels.
struct EmbeddingBatch {
    Matrix embeddings;
    Labels labels;
};

struct BatchShape {
    int P = 0;
    int K = 0;
};

/// Checks the P x K contract (P distinct labels, each exactly K times, finite rows).
/// Throws InvalidInput on violation.
BatchShape validate_batch(const EmbeddingBatch& batch);

}  // namespace pla
