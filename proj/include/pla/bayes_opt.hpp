#pragma once

// Gaussian-process surrogate over the hyperparameter box with Expected
// Improvement acquisition (minimization), plus the drop-rate objective that
// scores a short training run.

#include "pla/sampler.hpp"
#include "pla/types.hpp"

#include <functional>
#include <vector>

namespace pla {

enum class KernelForm {
    difference,  // squared exponential on w1 - w2 (valid covariance)
    literal,     // exp(-1/2 w1' B^-1 w2), not guaranteed positive semidefinite
};

using Bandwidth = Eigen::Matrix4d;

inline constexpr double kDefaultJitter = 1e-8;
inline constexpr double kBandwidthFloor = 1e-6;

struct GPState {
    std::vector<HyperParams> observed_points;
    std::vector<double> observed_values;
    Bandwidth bandwidth = Bandwidth::Identity();
    double mean_level = 0.0;
    double jitter = kDefaultJitter;
    KernelForm kernel = KernelForm::difference;

    /// Builds a state with the constant mean set to the mean of `values`.
    static GPState from_observations(std::vector<HyperParams> points, std::vector<double> values,
                                     const Bandwidth& bandwidth,
                                     KernelForm kernel = KernelForm::difference);
};

/// (2 pi)^(-d/2) |B|^(-1/2) exp(-1/2 q), with q the quadratic form selected by
/// `form`. Throws ConfigError when B is not positive definite.
double kernel(const Eigen::Vector4d& w1, const Eigen::Vector4d& w2, const Bandwidth& B,
              KernelForm form = KernelForm::difference);
double kernel(const HyperParams& w1, const HyperParams& w2, const Bandwidth& B,
              KernelForm form = KernelForm::difference);

/// Diagonal bandwidth by Silverman's rule: (1.06 n^(-1/5) sd_j)^2, floored.
/// With fewer than two points the scale falls back to a quarter of the box width.
Bandwidth estimate_bandwidth(const std::vector<HyperParams>& points, const HyperParamBox& box = {});

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;      // clamped at zero
    double raw_variance = 0.0;  // before clamping
};

/// Factors the Gram matrix once so repeated posterior queries are cheap.
class GaussianProcess {
public:
    /// Throws InvalidInput on an empty or inconsistent state, NumericalError when
    /// the jittered Gram matrix cannot be factored.
    explicit GaussianProcess(GPState state);

    Posterior posterior(const HyperParams& candidate) const;
    double expected_improvement(const HyperParams& candidate, double best_value) const;

    const GPState& state() const { return state_; }
    double best_observed() const;

private:
    GPState state_;
    Eigen::MatrixXd points_;  // 4 x n
    Eigen::LLT<Eigen::MatrixXd> gram_;
    Eigen::VectorXd weights_;  // K(W)^-1 (f(W) - mu)
};

Posterior gp_posterior(const GPState& state, const HyperParams& candidate);

double normal_pdf(double z);
double normal_cdf(double z);

/// sigma * (Z Phi(Z) + phi(Z)) with Z = (best - mean) / sigma; zero when sigma is zero.
double expected_improvement(double mean, double variance, double best_value);
double expected_improvement(const GPState& state, const HyperParams& candidate, double best_value);

/// Uniform draw from the box; k and p drawn as integers.
HyperParams sample_uniform(const HyperParamBox& box, Rng& rng);

/// n stratified draws: each coordinate's range is cut into n strata, visited in
/// an independent random order per coordinate.
std::vector<HyperParams> latin_hypercube(int n, const HyperParamBox& box, Rng& rng);

struct Proposal {
    HyperParams w;
    double ei = 0.0;
};

/// Scores `pool` by EI and returns the argmax (first occurrence on ties).
Proposal best_of(const GaussianProcess& gp, const std::vector<HyperParams>& pool, double best_value);

/// Samples pool_size candidates uniformly from the box and returns the EI argmax.
Proposal propose(const GPState& state, int pool_size, Rng& rng, const HyperParamBox& box = {});

/// |(first - second) / first - expected_drop|. Throws InvalidMeasurement if first <= 0.
double drop_rate_objective(double first_half_mean, double second_half_mean,
                           double expected_drop = 0.15);

struct TuneSettings {
    int initial_design = 8;
    int rounds = 30;
    int pool_size = 256;
    KernelForm kernel = KernelForm::difference;
    HyperParamBox box;
};

struct TuneStep {
    int round = 0;  // 0 for the initial design
    HyperParams w;
    double value = 0.0;
    double best_so_far = 0.0;
    double ei = 0.0;
};

/// Plain GP/EI minimization loop over the box: initial design, then one
/// proposal per round, with the bandwidth re-estimated every round.
std::vector<TuneStep> minimize(const std::function<double(const HyperParams&)>& objective,
                               const TuneSettings& settings, Rng& rng);

/// Shifted quadratic centred on the box midpoint, each axis scaled by the box
/// width. The built-in objective of the tune-demo command.
struct QuadraticBowl {
    HyperParamBox box;

    double operator()(const HyperParams& w) const;
    /// Smallest value over the feasible set (k and p integral).
    double minimum() const;
};

}  // namespace pla
