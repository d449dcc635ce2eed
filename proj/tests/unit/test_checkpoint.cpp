#include "pla/checkpoint.hpp"
#include "pla/error.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <sstream>

using namespace pla;

namespace {

Checkpoint sample() {
    const ModelShape s{3, 5, 4, 2};
    Checkpoint cp{ToyModelParams::random(s, 1), AdamState::zeros(s), 17};
    cp.optimizer.first = ToyModelParams::random(s, 2);
    cp.optimizer.second = ToyModelParams::random(s, 3);
    cp.optimizer.step = 42;
    return cp;
}

}  // namespace

TEST_CASE("checkpoint round trip is exact") {
    const auto cp = sample();
    std::stringstream ss;
    write_checkpoint(ss, cp);
    CHECK(read_checkpoint(ss) == cp);

    const auto path = std::filesystem::temp_directory_path() / "pla_ckpt_test.bin";
    save_checkpoint(cp, path);
    CHECK(load_checkpoint(path) == cp);
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint layout") {
    const auto cp = sample();
    std::stringstream ss;
    write_checkpoint(ss, cp);
    const std::string bytes = ss.str();
    const std::size_t n = cp.model.parameter_count();
    CHECK(bytes.size() == 56 + 3 * 8 * n);
    CHECK(bytes.substr(0, 8) == "PLACKPT1");
    std::uint64_t hidden = 0;
    std::memcpy(&hidden, bytes.data() + 16, 8);
    CHECK(hidden == 5);
    std::int64_t epoch = 0, step = 0;
    std::memcpy(&epoch, bytes.data() + 40, 8);
    std::memcpy(&step, bytes.data() + 48, 8);
    CHECK(epoch == 17);
    CHECK(step == 42);
    double first = 0;
    std::memcpy(&first, bytes.data() + 56, 8);
    CHECK(first == cp.model.trunk_w(0, 0));
    double second = 0;
    std::memcpy(&second, bytes.data() + 64, 8);
    CHECK(second == cp.model.trunk_w(0, 1));  // row-major
}

TEST_CASE("malformed checkpoints are rejected") {
    const auto cp = sample();
    std::stringstream ss;
    write_checkpoint(ss, cp);
    const std::string bytes = ss.str();

    std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_checkpoint(truncated), ParseError);
    std::stringstream trailing(bytes + "x");
    CHECK_THROWS_AS(read_checkpoint(trailing), ParseError);
    std::string bad = bytes;
    bad[0] = 'X';
    std::stringstream magic(bad);
    CHECK_THROWS_AS(read_checkpoint(magic), ParseError);
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.bin"), Error);
}
