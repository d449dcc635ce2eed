#pragma once

// Pairwise distances, triplet/softmax losses and their analytic gradients.
// Every function here is a pure function of its arguments.

#include "pla/types.hpp"

#include <vector>

namespace pla {

struct DistanceOptions {
    bool squared = false;    // squared Euclidean instead of Euclidean
    bool normalize = false;  // L2-normalize rows before measuring
};

/// Guard on the Euclidean norm in gradient denominators.
inline constexpr double kNormFloor = 1e-12;

Matrix pairwise_distances(const Matrix& embeddings, const DistanceOptions& opts = {});
Matrix pairwise_distances(const EmbeddingBatch& batch, const DistanceOptions& opts = {});

/// Overflow-safe ln(1 + e^x).
double softplus(double x);
double sigmoid(double x);

/// Large-margin nearest neighbour loss over all (a, b != a, n) triples.
double lmnn_loss(const EmbeddingBatch& batch, double mu, double margin,
                 const DistanceOptions& opts = {});

/// Hinge batch-hard loss: hardest positive and hardest negative per anchor.
/// Requires P >= 2 and K >= 2.
double batch_hard_loss(const EmbeddingBatch& batch, double margin, const DistanceOptions& opts = {});
Matrix batch_hard_loss_grad(const EmbeddingBatch& batch, double margin,
                            const DistanceOptions& opts = {});

/// The order-statistic pair chosen for one anchor.
struct OrderStatSelection {
    double value = 0.0;  // D[a][positive] - D[a][negative]
    int positive = -1;
    int negative = -1;
};

/// Per anchor a: k-th largest distance to a positive (b != a) minus p-th smallest
/// distance to a negative. k and p are clamped to the available counts; ties
/// resolve to the lowest sample index.
std::vector<OrderStatSelection> gbh_select(const Matrix& dist, const Labels& labels, int k, int p);
std::vector<double> gbh_terms(const Matrix& dist, const Labels& labels, int k, int p);

/// Sum over anchors of softplus(m + T_{k,p}(a)).
double gbh_loss(const EmbeddingBatch& batch, const HyperParams& w, const DistanceOptions& opts = {});
Matrix gbh_loss_grad(const EmbeddingBatch& batch, const HyperParams& w,
                     const DistanceOptions& opts = {});

/// Mean negative log-softmax of the true class. Labels are class indices in [0, C).
double cross_entropy_loss(const Matrix& logits, const Labels& labels);
Matrix cross_entropy_grad(const Matrix& logits, const Labels& labels);

struct LossBreakdown {
    double softmax_term = 0.0;
    double gbh_term = 0.0;
    double total = 0.0;
};

/// cross_entropy + lambda * gbh_loss. The batch labels double as class indices
/// for the logits.
LossBreakdown composite_loss(const EmbeddingBatch& batch, const Matrix& logits,
                             const HyperParams& w, const DistanceOptions& opts = {});

struct LossGradient {
    Matrix embeddings;
    Matrix logits;
};

LossGradient composite_loss_grad(const EmbeddingBatch& batch, const Matrix& logits,
                                 const HyperParams& w, const DistanceOptions& opts = {});

}  // namespace pla
