#include "oracles.hpp"

#include "pla/bayes_opt.hpp"
#include "pla/error.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace pla;

namespace {

std::vector<HyperParams> random_points(int n, Rng& rng) {
    std::vector<HyperParams> pts;
    for (int i = 0; i < n; ++i) pts.push_back(sample_uniform({}, rng));
    return pts;
}

}  // namespace

TEST_CASE("kernel values") {
    const Bandwidth I = Bandwidth::Identity();
    const Eigen::Vector4d w(0.3, 0.1, 2, 5);
    CHECK(kernel(w, w, I) == doctest::Approx(std::pow(2 * M_PI, -2.0)).epsilon(1e-15));
    const Bandwidth B = Eigen::Vector4d(4, 1, 9, 0.25).asDiagonal();
    CHECK(kernel(w, w, B) == doctest::Approx(std::pow(2 * M_PI, -2.0) / std::sqrt(9.0)).epsilon(1e-14));
    CHECK(kernel(w, w + Eigen::Vector4d(1e3, 0, 0, 0), I) == 0.0);

    // one unit step along a single axis leaves exp(-1/2) relative to the peak
    const double ratio = kernel(w, w + Eigen::Vector4d(0, 0, 1, 0), I) / kernel(w, w, I);
    CHECK(ratio == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK(std::pow(2 * M_PI, -0.5) * ratio == doctest::Approx(0.24197).epsilon(1e-4));

    const Eigen::Vector4d v(1.0, -0.05, 7, 3);
    CHECK(kernel(w, v, B) == doctest::Approx(oracle::kernel(w, v, B)).epsilon(1e-13));
    CHECK(kernel(w, v, B) == kernel(v, w, B));

    Bandwidth bad = I;
    bad(0, 0) = -1;
    CHECK_THROWS_AS(kernel(w, v, bad), ConfigError);
}

TEST_CASE("literal kernel form") {
    const Bandwidth I = Bandwidth::Identity();
    const Eigen::Vector4d a(1, 0, 2, 1), b(0.5, 0.1, 1, 3);
    const double q = a.dot(b);
    CHECK(kernel(a, b, I, KernelForm::literal) ==
          doctest::Approx(std::pow(2 * M_PI, -2.0) * std::exp(-0.5 * q)).epsilon(1e-14));
}

TEST_CASE("bandwidth estimate") {
    std::vector<HyperParams> same(5, HyperParams{1.0, 0.1, 3, 4});
    const Bandwidth f = estimate_bandwidth(same);
    for (int j = 0; j < 4; ++j) CHECK(f(j, j) == kBandwidthFloor);

    // lambda coordinates with unit sample standard deviation
    std::vector<HyperParams> pts;
    const double xs[] = {0.0, 1.0, 2.0};  // sample sd = 1
    for (double x : xs) pts.push_back({x, 0.1, 3, 4});
    const double n = 3.0;
    const Bandwidth B = estimate_bandwidth(pts);
    CHECK(B(0, 0) == doctest::Approx(std::pow(1.06 * std::pow(n, -0.2), 2)).epsilon(1e-14));
    CHECK(B(0, 1) == 0.0);

    // homogeneity: scaling the lambda spread by c scales the entry by c^2
    std::vector<HyperParams> half;
    for (double x : xs) half.push_back({0.5 * x, 0.1, 3, 4});
    CHECK(estimate_bandwidth(half)(0, 0) == doctest::Approx(0.25 * B(0, 0)).epsilon(1e-14));

    const Bandwidth one = estimate_bandwidth({HyperParams{}});
    CHECK(one(0, 0) == doctest::Approx(0.25).epsilon(1e-15));  // (width / 4)^2 with width 2
}

TEST_CASE("posterior matches the dense-inverse oracle") {
    Rng rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + trial % 5;
        const auto pts = random_points(n, rng);
        std::vector<double> vals;
        std::vector<Eigen::Vector4d> vecs;
        for (const auto& p : pts) {
            vals.push_back(std::uniform_real_distribution<double>(0, 1)(rng));
            vecs.push_back(p.to_vector());
        }
        const Bandwidth B = estimate_bandwidth(pts);
        const auto state = GPState::from_observations(pts, vals, B);
        const auto cand = sample_uniform({}, rng);
        const auto post = gp_posterior(state, cand);
        const auto ref = oracle::gp(vecs, vals, B, state.jitter, state.mean_level, cand.to_vector());
        CHECK(std::abs(post.mean - ref.mean) < 1e-8);
        CHECK(std::abs(post.raw_variance - ref.variance) < 1e-8);
    }
}

TEST_CASE("posterior at and far from the data") {
    const std::vector<HyperParams> pts{{0.5, 0.0, 2, 3}, {1.5, 0.2, 6, 12}};
    const std::vector<double> vals{0.3, 0.8};
    const Bandwidth B = 0.01 * Bandwidth::Identity();
    auto state = GPState::from_observations(pts, vals, B);
    state.jitter = 1e-14;
    const auto at = gp_posterior(state, pts[0]);
    CHECK(at.mean == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(at.variance < 1e-10);

    const auto far = gp_posterior(state, {0.0, -0.1, 1, 16});
    const double prior = kernel(Eigen::Vector4d::Zero(), Eigen::Vector4d::Zero(), B);
    CHECK(far.mean == doctest::Approx(0.55).epsilon(1e-6));
    CHECK(far.variance == doctest::Approx(prior).epsilon(1e-6));
}

TEST_CASE("expected improvement closed form") {
    CHECK(expected_improvement(0.3, 0.0, 1.0) == 0.0);
    CHECK(expected_improvement(0.3, 0.0, 0.1) == 0.0);
    CHECK(expected_improvement(0.5, 1.0, 0.5) == doctest::Approx(0.39894).epsilon(1e-5));
    CHECK(normal_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2 * M_PI)).epsilon(1e-15));
    CHECK(normal_cdf(0.0) == 0.5);

    Rng rng(8);
    std::uniform_real_distribution<double> u(-1, 1), v(0.01, 2);
    for (int trial = 0; trial < 5; ++trial) {
        const double mean = u(rng), var = v(rng), best = u(rng);
        const double mc = oracle::ei_monte_carlo(mean, var, best, 1000000, 100 + trial);
        CHECK(std::abs(expected_improvement(mean, var, best) - mc) / mc < 0.01);
    }
}

TEST_CASE("expected improvement is monotone") {
    // lower predicted mean, more improvement
    CHECK(expected_improvement(0.1, 0.04, 0.5) > expected_improvement(0.2, 0.04, 0.5));
    // more uncertainty, more improvement
    CHECK(expected_improvement(0.6, 0.09, 0.5) > expected_improvement(0.6, 0.04, 0.5));
    CHECK(expected_improvement(0.6, 0.04, 0.5) >= 0.0);
}

TEST_CASE("proposal") {
    const std::vector<HyperParams> pts{{0.5, 0.0, 2, 3}, {1.5, 0.2, 6, 12}, {1.0, 0.1, 4, 8}};
    const auto state = GPState::from_observations(pts, {0.3, 0.8, 0.5}, estimate_bandwidth(pts));
    const GaussianProcess gp(state);

    Rng rng(9);
    const std::vector<HyperParams> pool{sample_uniform({}, rng), sample_uniform({}, rng), sample_uniform({}, rng)};
    const auto best = best_of(gp, pool, 0.3);
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
        if (expected_improvement(state, pool[i], 0.3) > expected_improvement(state, pool[argmax], 0.3)) argmax = i;
    }
    CHECK(best.w == pool[argmax]);

    const std::vector<HyperParams> same(4, HyperParams{0.9, 0.05, 3, 3});
    CHECK(best_of(gp, same, 0.3).w == same[0]);

    Rng a(10), b(10);
    const auto single = propose(state, 1, a);
    CHECK(single.w == sample_uniform({}, b));
    const HyperParamBox box;
    CHECK(box.contains(propose(state, 64, a).w));
}

TEST_CASE("latin hypercube stratifies each coordinate") {
    Rng rng(11);
    const HyperParamBox box;
    const auto pts = latin_hypercube(8, box, rng);
    CHECK(pts.size() == 8);
    std::vector<int> strata(8, 0);
    for (const auto& w : pts) {
        CHECK(box.contains(w));
        const int s = std::min(7, static_cast<int>((w.lambda - box.lambda_lo) / (box.lambda_hi - box.lambda_lo) * 8));
        ++strata[s];
    }
    for (int c : strata) CHECK(c == 1);
    std::set<int> ks;
    for (const auto& w : pts) ks.insert(w.k);
    CHECK(ks.size() == 8);  // eight strata over eight integer values
}

TEST_CASE("drop-rate objective") {
    CHECK(drop_rate_objective(1.0, 0.85) < 1e-15);
    CHECK(drop_rate_objective(1.0, 1.0) == 0.15);
    CHECK(drop_rate_objective(2.0, 1.5) == doctest::Approx(0.10).epsilon(1e-14));
    CHECK(drop_rate_objective(1.0, 1.2) == doctest::Approx(0.35).epsilon(1e-14));
    CHECK_THROWS_AS(drop_rate_objective(0.0, 1.0), InvalidMeasurement);
    CHECK_THROWS_AS(drop_rate_objective(-1.0, 1.0), InvalidMeasurement);
}

TEST_CASE("minimize finds the quadratic bowl minimum") {
    const QuadraticBowl bowl;
    CHECK(bowl.minimum() == doctest::Approx(std::pow(0.5 / 7, 2) + std::pow(0.5 / 15, 2)).epsilon(1e-14));
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        Rng rng(seed);
        const auto trace = minimize(bowl, {}, rng);
        CHECK(trace.size() == 38);
        CHECK(trace.back().best_so_far - bowl.minimum() <= 0.05);
        for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i].best_so_far <= trace[i - 1].best_so_far);
    }
    TuneSettings one;
    one.rounds = 1;
    one.pool_size = 1;
    Rng rng(3);
    CHECK(minimize(bowl, one, rng).size() == 9);
}
