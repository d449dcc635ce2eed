#pragma once

// Reference implementations for the tests. Written independently of the
// library: plain loops, full sorts and dense inverses.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;

inline Matrix distances(const Matrix& x, bool squared = false) {
    const auto n = x.rows();
    Matrix d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double s = 0.0;
            for (Eigen::Index c = 0; c < x.cols(); ++c) {
                const double diff = x(i, c) - x(j, c);
                s += diff * diff;
            }
            d(i, j) = squared ? s : std::sqrt(s);
        }
    }
    return d;
}

inline Matrix row_normalized(const Matrix& x) {
    Matrix out = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) /= std::max(x.row(i).norm(), 1e-12);
    return out;
}

/// k-th largest positive minus p-th smallest negative, via full sorts.
inline std::vector<double> gbh_terms(const Matrix& d, const std::vector<int>& labels, int k, int p) {
    const auto n = static_cast<int>(labels.size());
    std::vector<double> out;
    for (int a = 0; a < n; ++a) {
        std::vector<double> pos, neg;
        for (int b = 0; b < n; ++b) {
            if (b == a) continue;
            (labels[b] == labels[a] ? pos : neg).push_back(d(a, b));
        }
        std::sort(pos.begin(), pos.end(), std::greater<>());
        std::sort(neg.begin(), neg.end());
        const int kk = std::min<int>(k, static_cast<int>(pos.size()));
        const int pp = std::min<int>(p, static_cast<int>(neg.size()));
        out.push_back(pos[kk - 1] - neg[pp - 1]);
    }
    return out;
}

/// max positive minus min negative, by linear scans.
inline std::vector<double> hardest_terms(const Matrix& d, const std::vector<int>& labels) {
    const auto n = static_cast<int>(labels.size());
    std::vector<double> out;
    for (int a = 0; a < n; ++a) {
        double hp = -INFINITY, hn = INFINITY;
        for (int b = 0; b < n; ++b) {
            if (b == a) continue;
            if (labels[b] == labels[a]) hp = std::max(hp, d(a, b));
            else hn = std::min(hn, d(a, b));
        }
        out.push_back(hp - hn);
    }
    return out;
}

inline double softplus(double x) { return std::log1p(std::exp(x)); }

inline double gbh_loss(const Matrix& x, const std::vector<int>& labels, double margin, int k, int p,
                       bool squared = false, bool normalize = false) {
    const auto t = gbh_terms(distances(normalize ? row_normalized(x) : x, squared), labels, k, p);
    double s = 0.0;
    for (double v : t) s += softplus(margin + v);
    return s;
}

inline double cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        double z = 0.0;
        for (Eigen::Index c = 0; c < logits.cols(); ++c) z += std::exp(logits(i, c));
        s += std::log(z) - logits(i, labels[static_cast<std::size_t>(i)]);
    }
    return s / static_cast<double>(logits.rows());
}

/// Central differences of f over every entry of x.
inline Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x, double h = 1e-5) {
    Matrix g(x.rows(), x.cols());
    Matrix y = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double keep = y(i, j);
            y(i, j) = keep + h;
            const double up = f(y);
            y(i, j) = keep - h;
            const double down = f(y);
            y(i, j) = keep;
            g(i, j) = (up - down) / (2 * h);
        }
    }
    return g;
}

/// max |a - b| / max(|b|_inf, floor). The floor covers blocks whose exact
/// gradient vanishes, such as a bias feeding only pairwise distances.
inline double relative_error(const Matrix& a, const Matrix& b, double floor = 1e-6) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), floor);
}

/// Gaussian kernel with bandwidth matrix B, on the difference w1 - w2.
inline double kernel(const Eigen::Vector4d& w1, const Eigen::Vector4d& w2, const Eigen::Matrix4d& B) {
    const Eigen::Vector4d d = w1 - w2;
    const double q = d.dot(B.inverse() * d);
    return std::pow(2 * M_PI, -2.0) / std::sqrt(B.determinant()) * std::exp(-0.5 * q);
}

struct GpPrediction {
    double mean;
    double variance;
};

/// Dense-inverse GP prediction with a constant prior mean.
inline GpPrediction gp(const std::vector<Eigen::Vector4d>& pts, const std::vector<double>& vals,
                       const Eigen::Matrix4d& B, double jitter, double mean_level, const Eigen::Vector4d& w) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    Matrix K(n, n);
    Eigen::VectorXd k(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) K(i, j) = kernel(pts[i], pts[j], B);
        K(i, i) += jitter;
        k(i) = kernel(pts[i], w, B);
        y(i) = vals[static_cast<std::size_t>(i)] - mean_level;
    }
    const Matrix Kinv = K.inverse();
    return {mean_level + k.dot(Kinv * y), kernel(w, w, B) - k.dot(Kinv * k)};
}

/// E[max(best - f, 0)] for f ~ N(mean, variance), by sampling.
inline double ei_monte_carlo(double mean, double variance, double best, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    const double sd = std::sqrt(variance);
    double s = 0.0;
    for (int i = 0; i < samples; ++i) s += std::max(best - (mean + sd * z(rng)), 0.0);
    return s / samples;
}

struct Retrieval {
    std::vector<double> cmc;
    double map = 0.0;
    int evaluated = 0;
};

/// Each gallery item's rank counted directly: items strictly closer, or equally
/// close with a smaller index, come first.
inline Retrieval retrieval(const Matrix& q, const std::vector<int>& ql, const Matrix& g, const std::vector<int>& gl) {
    const auto ng = static_cast<int>(gl.size());
    Retrieval r;
    r.cmc.assign(static_cast<std::size_t>(ng), 0.0);
    double ap_sum = 0.0;
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        std::vector<double> d(static_cast<std::size_t>(ng));
        for (int j = 0; j < ng; ++j) d[j] = (q.row(i) - g.row(j)).norm();
        std::vector<int> rank(static_cast<std::size_t>(ng));
        for (int j = 0; j < ng; ++j) {
            int before = 0;
            for (int o = 0; o < ng; ++o) {
                if (d[o] < d[j] || (d[o] == d[j] && o < j)) ++before;
            }
            rank[j] = before + 1;
        }
        const int label = ql[static_cast<std::size_t>(i)];
        std::vector<int> hits;
        for (int j = 0; j < ng; ++j) {
            if (gl[j] == label) hits.push_back(rank[j]);
        }
        if (hits.empty()) continue;
        ++r.evaluated;
        std::sort(hits.begin(), hits.end());
        for (int rr = hits.front(); rr <= ng; ++rr) r.cmc[rr - 1] += 1.0;
        double ap = 0.0;
        for (std::size_t h = 0; h < hits.size(); ++h) ap += double(h + 1) / hits[h];
        ap_sum += ap / static_cast<double>(hits.size());
    }
    if (r.evaluated > 0) {
        for (auto& c : r.cmc) c /= r.evaluated;
        r.map = ap_sum / r.evaluated;
    }
    return r;
}

/// Balanced P x K batch of random Gaussian embeddings.
inline std::pair<Matrix, std::vector<int>> random_batch(int P, int K, int d, std::mt19937_64& rng) {
    std::normal_distribution<double> z(0.0, 1.0);
    Matrix x(P * K, d);
    std::vector<int> labels;
    for (int i = 0; i < P; ++i) {
        for (int j = 0; j < K; ++j) labels.push_back(i);
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = z(rng);
    return {x, labels};
}

}  // namespace oracle
