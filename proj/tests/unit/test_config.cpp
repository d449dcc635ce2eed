#include "pla/config.hpp"
#include "pla/error.hpp"

#include <doctest.h>

#include <string>

using namespace pla;

namespace {

std::string message_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("empty config gives the desk defaults") {
    const auto c = parse_config("{}");
    CHECK(c.data.n_identities == 64);
    CHECK(c.data.samples_per_identity == 16);
    CHECK(c.data.dim == 32);
    CHECK(c.data.hard_negative_fraction == 0.1);
    CHECK(c.data.outlier_fraction == 0.1);
    CHECK(c.data.overhard_fraction == 0.05);
    CHECK(c.pla.batch.P == 16);
    CHECK(c.pla.batch.K == 8);
}

TEST_CASE("fields are read") {
    const auto c = parse_config(R"({
        "seed": 9,
        "data": {"n_identities": 20, "seed": 4, "train_identities": 10},
        "batch": {"P": 4, "K": 4},
        "bounds": {"k": [1, 4], "lambda": [0.5, 1.5]},
        "hyperparams": {"lambda": 0.7, "margin": 0.1, "k": 2, "p": 3},
        "model": {"hidden": 32, "embedding": 16, "normalize": true},
        "optimizer": {"alpha0": 0.001, "e0": 10, "e1": 20, "beta1_switch_epoch": 10},
        "pla": {"max_epochs": 50, "re_explore_policy": "stale", "kernel": "literal"},
        "train": {"epochs": 25},
        "paths": {"dataset": "d.csv", "out_dir": "o"}
    })");
    CHECK(c.seed == 9);
    CHECK(c.synth_spec().seed == 4);
    CHECK(c.pla.batch.P == 4);
    CHECK(c.pla.box.k_hi == 4);
    CHECK(c.pla.box.lambda_lo == 0.5);
    CHECK(c.hyperparams == HyperParams{0.7, 0.1, 2, 3});
    CHECK(c.model.embedding == 16);
    CHECK(c.distance.normalize);
    CHECK(c.optimizer.alpha0 == 0.001);
    CHECK(c.pla.re_explore_policy == ReExplorePolicy::stale);
    CHECK(c.pla.kernel == KernelForm::literal);
    CHECK(c.fixed_epochs() == 25);
    CHECK(c.dataset_path == "d.csv");
    CHECK(c.out_dir == "o");
    CHECK(parse_config("{\"seed\": 2}").synth_spec().seed == 2);
}

TEST_CASE("dump and parse round trip") {
    auto c = default_config();
    c.seed = 31;
    c.hyperparams = {1.5, -0.05, 3, 7};
    const auto back = parse_config(dump_config(c));
    CHECK(dump_config(back) == dump_config(c));
}

TEST_CASE("config errors name the offending field") {
    CHECK(message_of(R"({"batch": {"P": 4, "Q": 1}})").find("batch.Q") != std::string::npos);
    CHECK(message_of(R"({"colour": 1})").find("config.colour") != std::string::npos);
    CHECK(message_of(R"({"bounds": {"k": [1, 9]}})").find("k") != std::string::npos);
    CHECK(message_of(R"({"bounds": {"lambda": [0, 3]}})") != "");
    CHECK(message_of(R"({"hyperparams": {"k": 12}})") != "");
    CHECK(message_of(R"({"pla": {"explore_epochs": 7}})").find("explore_epochs") != std::string::npos);
    CHECK(message_of(R"({"batch": {"P": 40}})").find("batch.P") != std::string::npos);
    CHECK(message_of(R"({"seed": "x"})").find("seed") != std::string::npos);
    CHECK(message_of(R"({"model": {"embedding": 15}})") != "");
    CHECK(message_of("{not json").find("JSON") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
