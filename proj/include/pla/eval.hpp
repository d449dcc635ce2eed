#pragma once

#include "pla/types.hpp"

#include <vector>

namespace pla {

struct QueryGallerySplit {
    Matrix query;
    Labels query_labels;
    Matrix gallery;
    Labels gallery_labels;
};

struct RetrievalMetrics {
    std::vector<double> cmc;  // cmc[r]: fraction of queries matched within the top r + 1
    double rank1 = 0.0;
    double map = 0.0;
    int evaluated_queries = 0;
    int excluded_queries = 0;  // queries whose identity is absent from the gallery
};

/// Single-query retrieval: gallery ranked by ascending Euclidean distance, ties
/// by gallery index. AP averages precision at every relevant hit.
/// Throws InvalidInput on dimension or label-count mismatch or an empty gallery.
RetrievalMetrics evaluate(const QueryGallerySplit& split);

struct PcaResult {
    Matrix projected;  // N x target_dim
    Matrix basis;      // e x target_dim, columns by descending eigenvalue
    Eigen::RowVectorXd mean;
    Vector eigenvalues;  // all e, descending
};

/// Mean-centred projection onto the top target_dim principal directions. Each
/// basis vector's largest-magnitude component is made positive.
/// Throws InvalidInput unless 1 <= target_dim <= min(N, e).
PcaResult pca_reduce(const Matrix& embeddings, int target_dim);

/// Projects new rows with a previously fitted basis.
Matrix pca_apply(const PcaResult& pca, const Matrix& embeddings);

}  // namespace pla
