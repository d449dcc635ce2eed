#include "pla/metric.hpp"

#include "pla/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace pla {
namespace {

struct Prepared {
    Matrix points;  // rows actually measured (normalized when requested)
    Vector norms;   // original row norms, only filled when normalizing
};

Prepared prepare(const Matrix& x, const DistanceOptions& opts) {
    if (!x.allFinite()) throw InvalidInput("non-finite embedding entry");
    Prepared out{x, {}};
    if (opts.normalize) {
        out.norms = x.rowwise().norm();
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            out.points.row(i) /= std::max(out.norms[i], kNormFloor);
        }
    }
    return out;
}

Matrix distances_of(const Matrix& pts, bool squared) {
    const auto n = pts.rows();
    Matrix d = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double sq = (pts.row(i) - pts.row(j)).squaredNorm();
            const double v = squared ? sq : std::sqrt(sq);
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

// Adds coef * dD(i,j)/d(points) into grad.
void add_distance_grad(Matrix& grad, const Matrix& pts, const Matrix& dist, int i, int j,
                       double coef, bool squared) {
    if (coef == 0.0 || i == j) return;
    const double scale = squared ? 2.0 : 1.0 / std::max(dist(i, j), kNormFloor);
    const Eigen::RowVectorXd diff = (pts.row(i) - pts.row(j)) * (coef * scale);
    grad.row(i) += diff;
    grad.row(j) -= diff;
}

// Pulls a gradient with respect to measured points back to the raw embeddings.
Matrix finish_grad(Matrix grad, const Prepared& prep, const DistanceOptions& opts) {
    if (!opts.normalize) return grad;
    for (Eigen::Index i = 0; i < grad.rows(); ++i) {
        const auto y = prep.points.row(i);
        const double along = y.dot(grad.row(i));
        grad.row(i) = (grad.row(i) - along * y) / std::max(prep.norms[i], kNormFloor);
    }
    return grad;
}

struct Hardest {
    int positive = -1;
    int negative = -1;
};

// Farthest positive and nearest negative per anchor, lowest index on ties.
std::vector<Hardest> hardest_pairs(const Matrix& dist, const Labels& labels) {
    const int n = static_cast<int>(labels.size());
    std::vector<Hardest> out(n);
    for (int a = 0; a < n; ++a) {
        for (int j = 0; j < n; ++j) {
            if (j == a) continue;
            if (labels[j] == labels[a]) {
                if (out[a].positive < 0 || dist(a, j) > dist(a, out[a].positive)) out[a].positive = j;
            } else {
                if (out[a].negative < 0 || dist(a, j) < dist(a, out[a].negative)) out[a].negative = j;
            }
        }
    }
    return out;
}

void require_triplet_batch(const EmbeddingBatch& batch) {
    const auto shape = validate_batch(batch);
    if (shape.P < 2 || shape.K < 2) {
        throw DegenerateBatch("batch-hard loss needs P >= 2 and K >= 2, got P=" +
                              std::to_string(shape.P) + " K=" + std::to_string(shape.K));
    }
}

}  // namespace

Matrix pairwise_distances(const Matrix& embeddings, const DistanceOptions& opts) {
    return distances_of(prepare(embeddings, opts).points, opts.squared);
}

Matrix pairwise_distances(const EmbeddingBatch& batch, const DistanceOptions& opts) {
    validate_batch(batch);
    return pairwise_distances(batch.embeddings, opts);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double lmnn_loss(const EmbeddingBatch& batch, double mu, double margin, const DistanceOptions& opts) {
    validate_batch(batch);
    if (!(mu >= 0.0 && mu <= 1.0)) throw InvalidInput("lmnn: mu must lie in [0, 1]");
    const Matrix d = pairwise_distances(batch.embeddings, opts);
    const auto& y = batch.labels;
    const int n = static_cast<int>(y.size());
    double pull = 0.0;
    double push = 0.0;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (a == b || y[a] != y[b]) continue;
            pull += d(a, b);
            for (int neg = 0; neg < n; ++neg) {
                if (y[neg] == y[a]) continue;
                push += std::max(0.0, margin + d(a, b) - d(a, neg));
            }
        }
    }
    return (1.0 - mu) * pull + mu * push;
}

double batch_hard_loss(const EmbeddingBatch& batch, double margin, const DistanceOptions& opts) {
    require_triplet_batch(batch);
    const Matrix d = pairwise_distances(batch.embeddings, opts);
    double loss = 0.0;
    const auto picks = hardest_pairs(d, batch.labels);
    for (std::size_t a = 0; a < picks.size(); ++a) {
        loss += std::max(0.0, margin + d(a, picks[a].positive) - d(a, picks[a].negative));
    }
    return loss;
}

Matrix batch_hard_loss_grad(const EmbeddingBatch& batch, double margin, const DistanceOptions& opts) {
    require_triplet_batch(batch);
    const auto prep = prepare(batch.embeddings, opts);
    const Matrix d = distances_of(prep.points, opts.squared);
    Matrix grad = Matrix::Zero(d.rows(), prep.points.cols());
    const auto picks = hardest_pairs(d, batch.labels);
    for (int a = 0; a < static_cast<int>(picks.size()); ++a) {
        const auto [pos, neg] = picks[a];
        if (margin + d(a, pos) - d(a, neg) <= 0.0) continue;
        add_distance_grad(grad, prep.points, d, a, pos, 1.0, opts.squared);
        add_distance_grad(grad, prep.points, d, a, neg, -1.0, opts.squared);
    }
    return finish_grad(std::move(grad), prep, opts);
}

std::vector<OrderStatSelection> gbh_select(const Matrix& dist, const Labels& labels, int k, int p) {
    const int n = static_cast<int>(labels.size());
    if (dist.rows() != n || dist.cols() != n) throw InvalidInput("distance matrix / label size mismatch");
    if (k < 1 || p < 1) throw InvalidInput("k and p must be >= 1");

    std::vector<OrderStatSelection> out(n);
    std::vector<std::pair<double, int>> pos;
    std::vector<std::pair<double, int>> neg;
    for (int a = 0; a < n; ++a) {
        pos.clear();
        neg.clear();
        for (int j = 0; j < n; ++j) {
            if (j == a) continue;
            (labels[j] == labels[a] ? pos : neg).emplace_back(dist(a, j), j);
        }
        if (pos.empty() || neg.empty()) {
            throw DegenerateBatch("anchor " + std::to_string(a) + " has " + std::to_string(pos.size()) +
                                  " positives and " + std::to_string(neg.size()) + " negatives");
        }
        const auto kk = static_cast<std::ptrdiff_t>(std::min<std::size_t>(k, pos.size()) - 1);
        const auto pp = static_cast<std::ptrdiff_t>(std::min<std::size_t>(p, neg.size()) - 1);
        // Largest^k: descending distance, then ascending index.
        std::nth_element(pos.begin(), pos.begin() + kk, pos.end(), [](const auto& l, const auto& r) {
            return l.first != r.first ? l.first > r.first : l.second < r.second;
        });
        // Smallest^p: ascending distance, then ascending index.
        std::nth_element(neg.begin(), neg.begin() + pp, neg.end());
        const auto [dp, ip] = pos[kk];
        const auto [dn, in] = neg[pp];
        out[a] = {dp - dn, ip, in};
    }
    return out;
}

std::vector<double> gbh_terms(const Matrix& dist, const Labels& labels, int k, int p) {
    const auto sel = gbh_select(dist, labels, k, p);
    std::vector<double> out;
    out.reserve(sel.size());
    for (const auto& s : sel) out.push_back(s.value);
    return out;
}

double gbh_loss(const EmbeddingBatch& batch, const HyperParams& w, const DistanceOptions& opts) {
    validate_batch(batch);
    const Matrix d = pairwise_distances(batch.embeddings, opts);
    double loss = 0.0;
    for (double t : gbh_terms(d, batch.labels, w.k, w.p)) loss += softplus(w.margin + t);
    return loss;
}

Matrix gbh_loss_grad(const EmbeddingBatch& batch, const HyperParams& w, const DistanceOptions& opts) {
    validate_batch(batch);
    const auto prep = prepare(batch.embeddings, opts);
    const Matrix d = distances_of(prep.points, opts.squared);
    Matrix grad = Matrix::Zero(d.rows(), prep.points.cols());
    const auto sel = gbh_select(d, batch.labels, w.k, w.p);
    for (int a = 0; a < static_cast<int>(sel.size()); ++a) {
        const double s = sigmoid(w.margin + sel[a].value);
        add_distance_grad(grad, prep.points, d, a, sel[a].positive, s, opts.squared);
        add_distance_grad(grad, prep.points, d, a, sel[a].negative, -s, opts.squared);
    }
    return finish_grad(std::move(grad), prep, opts);
}

namespace {

void check_logits(const Matrix& logits, const Labels& labels) {
    if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
        throw InvalidInput("logits have " + std::to_string(logits.rows()) + " rows but " +
                           std::to_string(labels.size()) + " labels");
    }
    if (logits.rows() == 0) throw InvalidInput("empty logits");
    for (int y : labels) {
        if (y < 0 || y >= logits.cols()) {
            throw InvalidInput("label " + std::to_string(y) + " out of range for " +
                               std::to_string(logits.cols()) + " classes");
        }
    }
}

}  // namespace

double cross_entropy_loss(const Matrix& logits, const Labels& labels) {
    check_logits(logits, labels);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double top = logits.row(i).maxCoeff();
        const double lse = top + std::log((logits.row(i).array() - top).exp().sum());
        sum += lse - logits(i, labels[i]);
    }
    return sum / static_cast<double>(logits.rows());
}

Matrix cross_entropy_grad(const Matrix& logits, const Labels& labels) {
    check_logits(logits, labels);
    const auto n = logits.rows();
    Matrix g(n, logits.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double top = logits.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (logits.row(i).array() - top).exp().matrix();
        g.row(i) = e / e.sum();
        g(i, labels[i]) -= 1.0;
    }
    return g / static_cast<double>(n);
}

LossBreakdown composite_loss(const EmbeddingBatch& batch, const Matrix& logits, const HyperParams& w,
                             const DistanceOptions& opts) {
    LossBreakdown out;
    out.softmax_term = cross_entropy_loss(logits, batch.labels);
    out.gbh_term = gbh_loss(batch, w, opts);
    out.total = out.softmax_term + w.lambda * out.gbh_term;
    return out;
}

LossGradient composite_loss_grad(const EmbeddingBatch& batch, const Matrix& logits,
                                 const HyperParams& w, const DistanceOptions& opts) {
    LossGradient g;
    g.logits = cross_entropy_grad(logits, batch.labels);
    g.embeddings = gbh_loss_grad(batch, w, opts) * w.lambda;
    return g;
}

}  // namespace pla
