#include "pla/eval.hpp"

#include "pla/error.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace pla {

RetrievalMetrics evaluate(const QueryGallerySplit& split) {
    const auto nq = split.query.rows();
    const auto ng = split.gallery.rows();
    if (static_cast<std::size_t>(nq) != split.query_labels.size() ||
        static_cast<std::size_t>(ng) != split.gallery_labels.size()) {
        throw InvalidInput("embedding rows and label counts differ");
    }
    if (ng == 0) throw InvalidInput("empty gallery");
    if (nq > 0 && split.query.cols() != split.gallery.cols()) {
        throw InvalidInput("query width " + std::to_string(split.query.cols()) +
                           " differs from gallery width " + std::to_string(split.gallery.cols()));
    }
    if (!split.query.allFinite() || !split.gallery.allFinite()) throw InvalidInput("non-finite embedding");

    RetrievalMetrics out;
    std::vector<double> hits(static_cast<std::size_t>(ng), 0.0);
    std::vector<int> order(static_cast<std::size_t>(ng));
    std::vector<double> dist(static_cast<std::size_t>(ng));
    double ap_sum = 0.0;
    for (Eigen::Index q = 0; q < nq; ++q) {
        const int label = split.query_labels[q];
        const auto relevant = std::count(split.gallery_labels.begin(), split.gallery_labels.end(), label);
        if (relevant == 0) {
            ++out.excluded_queries;
            continue;
        }
        for (Eigen::Index g = 0; g < ng; ++g) dist[g] = (split.query.row(q) - split.gallery.row(g)).norm();
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] < dist[b]; });

        int found = 0;
        double precision_sum = 0.0;
        for (std::size_t r = 0; r < order.size(); ++r) {
            if (split.gallery_labels[order[r]] != label) continue;
            if (found == 0) hits[r] += 1.0;
            ++found;
            precision_sum += double(found) / double(r + 1);
        }
        ap_sum += precision_sum / double(relevant);
        ++out.evaluated_queries;
    }

    out.cmc.assign(static_cast<std::size_t>(ng), 0.0);
    if (out.evaluated_queries > 0) {
        double cum = 0.0;
        for (std::size_t r = 0; r < hits.size(); ++r) {
            cum += hits[r];
            out.cmc[r] = cum / out.evaluated_queries;
        }
        out.rank1 = out.cmc.front();
        out.map = ap_sum / out.evaluated_queries;
    }
    return out;
}

PcaResult pca_reduce(const Matrix& embeddings, int target_dim) {
    const auto n = embeddings.rows();
    const auto e = embeddings.cols();
    if (target_dim < 1 || target_dim > std::min(n, e)) {
        throw InvalidInput("target_dim " + std::to_string(target_dim) + " must lie in [1, " +
                           std::to_string(std::min(n, e)) + "]");
    }
    if (!embeddings.allFinite()) throw InvalidInput("non-finite embedding");

    PcaResult out;
    out.mean = embeddings.colwise().mean();
    const Matrix centered = embeddings.rowwise() - out.mean;
    const Matrix cov = centered.transpose() * centered / double(std::max<Eigen::Index>(n - 1, 1));
    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    if (solver.info() != Eigen::Success) throw NumericalError("PCA eigendecomposition failed");

    // Eigen returns ascending eigenvalues.
    out.eigenvalues = solver.eigenvalues().reverse();
    const Matrix vecs = solver.eigenvectors().rowwise().reverse();
    out.basis = vecs.leftCols(target_dim);
    for (Eigen::Index j = 0; j < out.basis.cols(); ++j) {
        Eigen::Index arg = 0;
        out.basis.col(j).cwiseAbs().maxCoeff(&arg);
        if (out.basis(arg, j) < 0.0) out.basis.col(j) *= -1.0;
    }
    out.projected = centered * out.basis;
    return out;
}

Matrix pca_apply(const PcaResult& pca, const Matrix& embeddings) {
    if (embeddings.cols() != pca.basis.rows()) throw InvalidInput("PCA basis width mismatch");
    return (embeddings.rowwise() - pca.mean) * pca.basis;
}

}  // namespace pla
