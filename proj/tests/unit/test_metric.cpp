#include "oracles.hpp"

#include "pla/error.hpp"
#include "pla/metric.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pla;

namespace {

Matrix column(std::initializer_list<double> v) {
    Matrix x(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double e : v) x(i++, 0) = e;
    return x;
}

}  // namespace

TEST_CASE("pairwise distances") {
    Matrix x(2, 2);
    x << 0, 0, 3, 4;
    const Matrix d = pairwise_distances(x);
    CHECK(d(0, 0) == 0.0);
    CHECK(d(0, 1) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(d(1, 0) == d(0, 1));

    CHECK(pairwise_distances(Matrix::Ones(5, 3)).isZero(0.0));

    std::mt19937_64 rng(1);
    auto [y, labels] = oracle::random_batch(4, 3, 6, rng);
    const Matrix dy = pairwise_distances(y);
    CHECK(dy == dy.transpose());
    CHECK(oracle::relative_error(dy, oracle::distances(y)) < 1e-12);
    CHECK(oracle::relative_error(pairwise_distances(y, {true, false}), oracle::distances(y, true)) < 1e-12);
    CHECK(dy.diagonal().isZero(0.0));
}

TEST_CASE("pairwise distances reject non-finite rows") {
    Matrix x = Matrix::Zero(2, 2);
    x(1, 1) = NAN;
    CHECK_THROWS_AS(pairwise_distances(x), InvalidInput);
}

TEST_CASE("lmnn loss") {
    // mu = 0 with coincident positives
    Matrix x = column({0, 0, 5, 5});
    CHECK(lmnn_loss({x, {0, 0, 1, 1}}, 0.0, 0.2) == 0.0);
    // every negative farther than every positive, zero margin
    Matrix far = column({0, 1, 10, 11});
    CHECK(lmnn_loss({far, {0, 0, 1, 1}}, 1.0, 0.0) == 0.0);

    // brute force over all triples
    const Matrix a = column({0, 1, 1.5, 2.5});
    const Labels y{0, 0, 1, 1};
    const double mu = 0.5, m = 0.2;
    const Matrix d = oracle::distances(a);
    double pull = 0.0, push = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            if (i == j || y[i] != y[j]) continue;
            pull += d(i, j);
            for (int l = 0; l < 4; ++l) {
                if (y[l] != y[i]) push += std::max(0.0, m + d(i, j) - d(i, l));
            }
        }
    }
    CHECK(lmnn_loss({a, y}, mu, m) == doctest::Approx((1 - mu) * pull + mu * push).epsilon(1e-12));
}

TEST_CASE("batch hard loss hand case") {
    const Matrix x = column({0, 1, 1.5, 2.5});
    const Labels y{0, 0, 1, 1};
    CHECK(batch_hard_loss({x, y}, 0.2) == doctest::Approx(1.4).epsilon(1e-12));

    // separated classes, negative margin
    const Matrix far = column({0, 0.01, 100, 100.01});
    CHECK(batch_hard_loss({far, y}, -0.1) == 0.0);
}

TEST_CASE("batch hard equals the hinge of the k = p = 1 terms") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto [x, y] = oracle::random_batch(3, 4, 5, rng);
        double expected = 0.0;
        for (double t : oracle::hardest_terms(oracle::distances(x), y)) expected += std::max(0.0, 0.3 + t);
        CHECK(batch_hard_loss({x, y}, 0.3) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("batch hard rejects degenerate batches") {
    CHECK_THROWS_AS(batch_hard_loss({column({0, 1}), {0, 1}}, 0.2), DegenerateBatch);
    CHECK_THROWS_AS(batch_hard_loss({column({0, 1, 2}), {0, 0, 0}}, 0.2), DegenerateBatch);
}

TEST_CASE("gbh terms hand sorts") {
    const Matrix x = column({0, 1, 4, 6});
    const Labels y{0, 0, 1, 1};
    const Matrix d = pairwise_distances(x);
    CHECK(gbh_terms(d, y, 1, 1)[0] == -3.0);
    CHECK(gbh_terms(d, y, 1, 2)[0] == -5.0);

    const auto sel = gbh_select(d, y, 1, 2);
    CHECK(sel[0].positive == 1);
    CHECK(sel[0].negative == 3);
}

TEST_CASE("gbh terms match the full-sort oracle") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> pk(2, 6), dim(1, 8), kp(1, 10);
    for (int trial = 0; trial < 200; ++trial) {
        auto [x, y] = oracle::random_batch(pk(rng), pk(rng), dim(rng), rng);
        const int k = kp(rng), p = kp(rng);
        const Matrix d = pairwise_distances(x);
        CHECK(gbh_terms(d, y, k, p) == oracle::gbh_terms(d, y, k, p));
        CHECK(gbh_terms(d, y, 1, 1) == oracle::hardest_terms(d, y));
    }
}

TEST_CASE("gbh terms are monotone in k and p") {
    std::mt19937_64 rng(12);
    auto [x, y] = oracle::random_batch(4, 5, 3, rng);
    const Matrix d = pairwise_distances(x);
    for (int k = 1; k < 4; ++k) {
        const auto a = gbh_terms(d, y, k, 1), b = gbh_terms(d, y, k + 1, 1);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] <= a[i]);
    }
    for (int p = 1; p < 15; ++p) {
        const auto a = gbh_terms(d, y, 1, p), b = gbh_terms(d, y, 1, p + 1);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] <= a[i]);
    }
}

TEST_CASE("gbh ties resolve to the lowest index") {
    const Matrix x = column({0, 1, 1, -1, -1, 5});
    const Labels y{0, 1, 1, 0, 0, 1};
    const auto sel = gbh_select(pairwise_distances(x), y, 1, 1);
    CHECK(sel[0].positive == 3);
    CHECK(sel[0].negative == 1);
}

TEST_CASE("softplus") {
    CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(softplus(1000.0) == 1000.0);
    CHECK(softplus(-1000.0) == 0.0);
    CHECK(std::isfinite(softplus(1e300)));
    for (double v : {-5.0, -0.3, 0.7, 3.0}) CHECK(softplus(v) == doctest::Approx(oracle::softplus(v)).epsilon(1e-14));
}

TEST_CASE("gbh loss hand case") {
    const Matrix x = column({0, 1, 1.5, 2.5});
    const Labels y{0, 0, 1, 1};
    const HyperParams w{1.0, 0.2, 1, 1};
    const double expected = 2 * oracle::softplus(-0.3) + 2 * oracle::softplus(0.7);
    CHECK(gbh_loss({x, y}, w) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(gbh_loss({x, y}, w) == doctest::Approx(3.3154).epsilon(1e-4));
}

TEST_CASE("gbh loss matches the oracle") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        auto [x, y] = oracle::random_batch(3, 3, 4, rng);
        const HyperParams w{1.0, 0.1 * (trial % 3), 1 + trial % 3, 1 + trial % 5};
        CHECK(gbh_loss({x, y}, w) ==
              doctest::Approx(oracle::gbh_loss(x, y, w.margin, w.k, w.p)).epsilon(1e-12));
        CHECK(gbh_loss({x, y}, w, {true, true}) ==
              doctest::Approx(oracle::gbh_loss(x, y, w.margin, w.k, w.p, true, true)).epsilon(1e-12));
    }
}

TEST_CASE("cross entropy") {
    CHECK(cross_entropy_loss(Matrix::Zero(3, 5), {0, 2, 4}) == doctest::Approx(std::log(5.0)).epsilon(1e-15));
    Matrix sat = Matrix::Zero(1, 3);
    sat(0, 1) = 800.0;
    CHECK(cross_entropy_loss(sat, {1}) == 0.0);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    Matrix logits(3, 4);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = z(rng);
    const Labels y{0, 3, 1};
    CHECK(cross_entropy_loss(logits, y) == doctest::Approx(oracle::cross_entropy(logits, y)).epsilon(1e-14));
    CHECK_THROWS_AS(cross_entropy_loss(logits, {0, 4, 1}), InvalidInput);
}

TEST_CASE("composite loss") {
    const Matrix x = column({0, 1, 1.5, 2.5});
    const Labels y{0, 0, 1, 1};
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z;
    Matrix logits(4, 2);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = z(rng);
    const double ce = oracle::cross_entropy(logits, y);
    const double g = oracle::gbh_loss(x, y, 0.2, 1, 1);

    const auto zero = composite_loss({x, y}, logits, {0.0, 0.2, 1, 1});
    CHECK(zero.total == cross_entropy_loss(logits, y));
    CHECK(composite_loss({x, y}, logits, {1.0, 0.2, 1, 1}).total == doctest::Approx(ce + g).epsilon(1e-14));
    const auto two = composite_loss({x, y}, logits, {2.0, 0.2, 1, 1});
    CHECK(two.total == doctest::Approx(two.softmax_term + 2 * two.gbh_term).epsilon(1e-15));
}

TEST_CASE("composite gradient matches finite differences") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 10; ++trial) {
        auto [x, y] = oracle::random_batch(3, 3, 4, rng);
        Matrix logits(x.rows(), 3);
        for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = z(rng);
        const HyperParams w{0.7, 0.1, 1 + trial % 2, 1 + trial % 3};
        const DistanceOptions opts{trial % 3 == 1, trial % 3 == 2};
        const auto g = composite_loss_grad({x, y}, logits, w, opts);
        const Matrix ge = oracle::numeric_gradient(
            [&](const Matrix& e) { return composite_loss({e, y}, logits, w, opts).total; }, x);
        const Matrix gl = oracle::numeric_gradient(
            [&](const Matrix& l) { return composite_loss({x, y}, l, w, opts).total; }, logits);
        CHECK(oracle::relative_error(g.embeddings, ge) < 1e-4);
        CHECK(oracle::relative_error(g.logits, gl) < 1e-4);
    }
}

TEST_CASE("composite gradient with lambda zero leaves the embeddings alone") {
    std::mt19937_64 rng(22);
    auto [x, y] = oracle::random_batch(2, 2, 3, rng);
    const auto g = composite_loss_grad({x, y}, Matrix::Zero(4, 2), {0.0, 0.2, 1, 1});
    CHECK(g.embeddings.isZero(0.0));
}

TEST_CASE("gradient stays finite for coincident positives") {
    const Matrix x = column({0, 0, 3, 3});
    const auto g = gbh_loss_grad({x, {0, 0, 1, 1}}, {1.0, 0.2, 1, 1});
    CHECK(g.allFinite());
    const auto h = batch_hard_loss_grad({x, {0, 0, 1, 1}}, 5.0);
    CHECK(h.allFinite());
}

TEST_CASE("batch hard gradient matches finite differences") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        auto [x, y] = oracle::random_batch(3, 3, 3, rng);
        const Matrix g = batch_hard_loss_grad({x, y}, 1.5);
        const Matrix n = oracle::numeric_gradient([&](const Matrix& e) { return batch_hard_loss({e, y}, 1.5); }, x);
        CHECK(oracle::relative_error(g, n) < 1e-4);
    }
}
