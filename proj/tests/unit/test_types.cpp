#include "pla/error.hpp"
#include "pla/types.hpp"

#include <doctest.h>

using namespace pla;

TEST_CASE("box instantiation clamps and rounds") {
    const HyperParamBox box;
    const auto w = box.instantiate({-1.0, 0.5, 3.49, 16.6});
    CHECK(w.lambda == 0.0);
    CHECK(w.margin == 0.3);
    CHECK(w.k == 3);
    CHECK(w.p == 16);
    CHECK(box.contains(w));
    CHECK_FALSE(box.contains({1.0, 0.2, 9, 1}));
}

TEST_CASE("hyperparameter validation") {
    CHECK_NOTHROW(validate_hyperparams({1.0, 0.2, 1, 1}));
    CHECK_THROWS_AS(validate_hyperparams({2.5, 0.2, 1, 1}), ConfigError);
    CHECK_THROWS_AS(validate_hyperparams({1.0, 0.2, 0, 1}), ConfigError);
    HyperParamBox wide;
    wide.k_hi = 9;
    CHECK_THROWS_AS(wide.validate(), ConfigError);
    HyperParamBox inverted;
    inverted.lambda_lo = 1.5;
    inverted.lambda_hi = 0.5;
    CHECK_THROWS_AS(inverted.validate(), ConfigError);
}

TEST_CASE("batch validation") {
    Matrix x = Matrix::Zero(4, 2);
    CHECK(validate_batch({x, {0, 0, 1, 1}}).P == 2);
    CHECK_THROWS_AS(validate_batch({x, {0, 0, 0, 1}}), InvalidInput);
    CHECK_THROWS_AS(validate_batch({x, {0, 0, 1}}), InvalidInput);
    x(2, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate_batch({x, {0, 0, 1, 1}}), InvalidInput);
}
