#include "pla/bayes_opt.hpp"

#include <limits>

#include "pla/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace pla {
namespace {

// Precomputed B^-1 and normalization constant.
class KernelEval {
public:
    KernelEval(const Bandwidth& B, KernelForm form) : form_(form) {
        Eigen::LLT<Bandwidth> llt(B);
        if (llt.info() != Eigen::Success || !B.allFinite() || !B.isApprox(B.transpose())) {
            throw ConfigError("bandwidth matrix is not symmetric positive definite");
        }
        inverse_ = llt.solve(Bandwidth::Identity());
        const double det = B.determinant();
        if (!(det > 0.0)) throw ConfigError("bandwidth matrix is singular");
        constexpr double d = HyperParams::dim;
        scale_ = std::pow(2.0 * std::numbers::pi, -d / 2.0) / std::sqrt(det);
    }

    double operator()(const Eigen::Vector4d& a, const Eigen::Vector4d& b) const {
        double q = 0.0;
        if (form_ == KernelForm::difference) {
            const Eigen::Vector4d diff = a - b;
            q = diff.dot(inverse_ * diff);
        } else {
            q = a.dot(inverse_ * b);
        }
        return scale_ * std::exp(-0.5 * q);
    }

    double prior_variance(const Eigen::Vector4d& a) const { return (*this)(a, a); }

private:
    KernelForm form_;
    Bandwidth inverse_;
    double scale_ = 1.0;
};

}  // namespace

GPState GPState::from_observations(std::vector<HyperParams> points, std::vector<double> values,
                                   const Bandwidth& bandwidth, KernelForm kernel) {
    GPState s;
    s.mean_level = values.empty()
                       ? 0.0
                       : std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
    s.observed_points = std::move(points);
    s.observed_values = std::move(values);
    s.bandwidth = bandwidth;
    s.kernel = kernel;
    return s;
}

double kernel(const Eigen::Vector4d& w1, const Eigen::Vector4d& w2, const Bandwidth& B, KernelForm form) {
    return KernelEval(B, form)(w1, w2);
}

double kernel(const HyperParams& w1, const HyperParams& w2, const Bandwidth& B, KernelForm form) {
    return kernel(w1.to_vector(), w2.to_vector(), B, form);
}

Bandwidth estimate_bandwidth(const std::vector<HyperParams>& points, const HyperParamBox& box) {
    Bandwidth B = Bandwidth::Zero();
    const auto n = points.size();
    if (n < 2) {
        const Eigen::Vector4d scale = box.width() / 4.0;
        for (int j = 0; j < 4; ++j) B(j, j) = std::max(scale[j] * scale[j], kBandwidthFloor);
        return B;
    }
    const double factor = 1.06 * std::pow(static_cast<double>(n), -0.2);
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();
    for (const auto& w : points) mean += w.to_vector();
    mean /= static_cast<double>(n);
    Eigen::Vector4d ss = Eigen::Vector4d::Zero();
    for (const auto& w : points) ss += (w.to_vector() - mean).cwiseAbs2();
    for (int j = 0; j < 4; ++j) {
        const double sd = std::sqrt(ss[j] / static_cast<double>(n - 1));
        const double h = factor * sd;
        B(j, j) = std::max(h * h, kBandwidthFloor);
    }
    return B;
}

GaussianProcess::GaussianProcess(GPState state) : state_(std::move(state)) {
    const auto n = state_.observed_points.size();
    if (n == 0) throw InvalidInput("GP state has no observations");
    if (state_.observed_values.size() != n) {
        throw InvalidInput("GP state has " + std::to_string(n) + " points but " +
                           std::to_string(state_.observed_values.size()) + " values");
    }
    if (!(state_.jitter >= 0.0)) throw InvalidInput("GP jitter must be non-negative");

    const KernelEval k(state_.bandwidth, state_.kernel);
    points_.resize(4, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) points_.col(i) = state_.observed_points[i].to_vector();

    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < gram.rows(); ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            gram(i, j) = gram(j, i) = k(points_.col(i), points_.col(j));
        }
    }
    gram.diagonal().array() += state_.jitter;
    gram_.compute(gram);
    if (gram_.info() != Eigen::Success || !(gram_.rcond() > 1e-15)) {
        throw NumericalError("Gram matrix of " + std::to_string(n) +
                             " observations is not positive definite after jitter");
    }
    Eigen::VectorXd resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = state_.observed_values[i] - state_.mean_level;
    weights_ = gram_.solve(resid);
}

Posterior GaussianProcess::posterior(const HyperParams& candidate) const {
    const KernelEval k(state_.bandwidth, state_.kernel);
    const Eigen::Vector4d x = candidate.to_vector();
    Eigen::VectorXd cross(points_.cols());
    for (Eigen::Index i = 0; i < points_.cols(); ++i) cross[i] = k(x, points_.col(i));
    Posterior out;
    out.mean = state_.mean_level + cross.dot(weights_);
    out.raw_variance = k.prior_variance(x) - cross.dot(gram_.solve(cross));
    out.variance = std::max(out.raw_variance, 0.0);
    return out;
}

double GaussianProcess::expected_improvement(const HyperParams& candidate, double best_value) const {
    const auto post = posterior(candidate);
    return pla::expected_improvement(post.mean, post.variance, best_value);
}

double GaussianProcess::best_observed() const {
    return *std::min_element(state_.observed_values.begin(), state_.observed_values.end());
}

Posterior gp_posterior(const GPState& state, const HyperParams& candidate) {
    return GaussianProcess(state).posterior(candidate);
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mean, double variance, double best_value) {
    if (!(variance > 0.0)) return 0.0;
    const double sigma = std::sqrt(variance);
    const double z = (best_value - mean) / sigma;
    return std::max(0.0, sigma * (z * normal_cdf(z) + normal_pdf(z)));
}

double expected_improvement(const GPState& state, const HyperParams& candidate, double best_value) {
    return GaussianProcess(state).expected_improvement(candidate, best_value);
}

HyperParams sample_uniform(const HyperParamBox& box, Rng& rng) {
    std::uniform_real_distribution<double> lam(box.lambda_lo, box.lambda_hi);
    std::uniform_real_distribution<double> mar(box.margin_lo, box.margin_hi);
    std::uniform_int_distribution<int> kd(box.k_lo, box.k_hi);
    std::uniform_int_distribution<int> pd(box.p_lo, box.p_hi);
    HyperParams w;
    w.lambda = lam(rng);
    w.margin = mar(rng);
    w.k = kd(rng);
    w.p = pd(rng);
    return w;
}

std::vector<HyperParams> latin_hypercube(int n, const HyperParamBox& box, Rng& rng) {
    if (n < 1) throw InvalidInput("initial design needs at least one point");
    // Integer coordinates are stratified over [lo - 0.5, hi + 0.5) and rounded.
    const Eigen::Vector4d lo = box.lower() - Eigen::Vector4d(0, 0, 0.5, 0.5);
    const Eigen::Vector4d hi = box.upper() + Eigen::Vector4d(0, 0, 0.5, 0.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Eigen::Vector4d> coords(n);
    for (int j = 0; j < 4; ++j) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        for (int i = n - 1; i > 0; --i) {
            std::uniform_int_distribution<int> pick(0, i);
            std::swap(order[i], order[pick(rng)]);
        }
        for (int i = 0; i < n; ++i) {
            const double u = (order[i] + unit(rng)) / n;
            coords[i][j] = lo[j] + u * (hi[j] - lo[j]);
        }
    }
    std::vector<HyperParams> out;
    out.reserve(n);
    for (const auto& c : coords) out.push_back(box.instantiate(c));
    return out;
}

Proposal best_of(const GaussianProcess& gp, const std::vector<HyperParams>& pool, double best_value) {
    if (pool.empty()) throw InvalidInput("empty candidate pool");
    Proposal best{pool.front(), gp.expected_improvement(pool.front(), best_value)};
    for (std::size_t i = 1; i < pool.size(); ++i) {
        const double ei = gp.expected_improvement(pool[i], best_value);
        if (ei > best.ei) best = {pool[i], ei};
    }
    return best;
}

Proposal propose(const GPState& state, int pool_size, Rng& rng, const HyperParamBox& box) {
    if (pool_size < 1) throw InvalidInput("pool_size must be >= 1");
    const GaussianProcess gp(state);
    std::vector<HyperParams> pool;
    pool.reserve(static_cast<std::size_t>(pool_size));
    for (int i = 0; i < pool_size; ++i) pool.push_back(sample_uniform(box, rng));
    return best_of(gp, pool, gp.best_observed());
}

double drop_rate_objective(double first_half_mean, double second_half_mean, double expected_drop) {
    if (!(first_half_mean > 0.0) || !std::isfinite(first_half_mean) || !std::isfinite(second_half_mean)) {
        throw InvalidMeasurement("first-half mean loss must be positive and finite, got " +
                                 std::to_string(first_half_mean));
    }
    return std::abs((first_half_mean - second_half_mean) / first_half_mean - expected_drop);
}

std::vector<TuneStep> minimize(const std::function<double(const HyperParams&)>& objective,
                               const TuneSettings& settings, Rng& rng) {
    settings.box.validate();
    std::vector<HyperParams> points;
    std::vector<double> values;
    std::vector<TuneStep> trace;
    double best = std::numeric_limits<double>::infinity();

    for (const auto& w : latin_hypercube(settings.initial_design, settings.box, rng)) {
        const double v = objective(w);
        best = std::min(best, v);
        points.push_back(w);
        values.push_back(v);
        trace.push_back({0, w, v, best, 0.0});
    }
    for (int round = 1; round <= settings.rounds; ++round) {
        const auto B = estimate_bandwidth(points, settings.box);
        const auto state = GPState::from_observations(points, values, B, settings.kernel);
        const auto prop = propose(state, settings.pool_size, rng, settings.box);
        const double v = objective(prop.w);
        best = std::min(best, v);
        points.push_back(prop.w);
        values.push_back(v);
        trace.push_back({round, prop.w, v, best, prop.ei});
    }
    return trace;
}

double QuadraticBowl::operator()(const HyperParams& w) const {
    const Eigen::Vector4d c = 0.5 * (box.lower() + box.upper());
    return ((w.to_vector() - c).array() / box.width().array().max(1e-12)).square().sum();
}

double QuadraticBowl::minimum() const {
    const Eigen::Vector4d c = 0.5 * (box.lower() + box.upper());
    return (*this)(box.instantiate(c));
}

}  // namespace pla
