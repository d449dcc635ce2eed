#include "pla/types.hpp"

#include "pla/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace pla {

bool HyperParamBox::contains(const HyperParams& w) const {
    return w.lambda >= lambda_lo && w.lambda <= lambda_hi && w.margin >= margin_lo &&
           w.margin <= margin_hi && w.k >= k_lo && w.k <= k_hi && w.p >= p_lo && w.p <= p_hi;
}

HyperParams HyperParamBox::instantiate(const Eigen::Vector4d& x) const {
    HyperParams w;
    w.lambda = std::clamp(x[0], lambda_lo, lambda_hi);
    w.margin = std::clamp(x[1], margin_lo, margin_hi);
    w.k = std::clamp(static_cast<int>(std::lround(x[2])), k_lo, k_hi);
    w.p = std::clamp(static_cast<int>(std::lround(x[3])), p_lo, p_hi);
    return w;
}

void HyperParamBox::validate() const {
    const HyperParamBox outer;
    auto check = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(what);
    };
    check(lambda_lo <= lambda_hi, "bounds: lambda_lo > lambda_hi");
    check(margin_lo <= margin_hi, "bounds: margin_lo > margin_hi");
    check(k_lo <= k_hi, "bounds: k_lo > k_hi");
    check(p_lo <= p_hi, "bounds: p_lo > p_hi");
    check(lambda_lo >= outer.lambda_lo && lambda_hi <= outer.lambda_hi,
          "bounds: lambda range must lie within [0, 2]");
    check(margin_lo >= outer.margin_lo && margin_hi <= outer.margin_hi,
          "bounds: margin range must lie within [-0.1, 0.3]");
    check(k_lo >= outer.k_lo && k_hi <= outer.k_hi, "bounds: k range must lie within [1, 8]");
    check(p_lo >= outer.p_lo && p_hi <= outer.p_hi, "bounds: p range must lie within [1, 16]");
}

void validate_hyperparams(const HyperParams& w, const HyperParamBox& box) {
    if (!std::isfinite(w.lambda) || !std::isfinite(w.margin) || !box.contains(w)) {
        throw ConfigError("hyperparameters " + to_string(w) + " outside the search box");
    }
}

std::string to_string(const HyperParams& w) {
    std::ostringstream os;
    os << "(lambda=" << w.lambda << ", m=" << w.margin << ", k=" << w.k << ", p=" << w.p << ")";
    return os.str();
}

BatchShape validate_batch(const EmbeddingBatch& batch) {
    const auto n = batch.embeddings.rows();
    if (n == 0) throw InvalidInput("empty batch");
    if (static_cast<std::size_t>(n) != batch.labels.size()) {
        throw InvalidInput("batch has " + std::to_string(n) + " rows but " +
                           std::to_string(batch.labels.size()) + " labels");
    }
    if (!batch.embeddings.allFinite()) throw InvalidInput("non-finite embedding entry");

    std::map<int, int> counts;
    for (int y : batch.labels) ++counts[y];
    const int k = counts.begin()->second;
    for (const auto& [label, c] : counts) {
        if (c != k) {
            throw InvalidInput("label " + std::to_string(label) + " appears " + std::to_string(c) +
                               " times, expected " + std::to_string(k));
        }
    }
    return {static_cast<int>(counts.size()), k};
}

}  // namespace pla
