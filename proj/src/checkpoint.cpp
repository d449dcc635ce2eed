#include "pla/checkpoint.hpp"

#include "pla/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace pla {
namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> bytes{};
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out.write(bytes.data(), bytes.size());
}

std::uint64_t get_u64(std::istream& in) {
    std::array<unsigned char, 8> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
        throw ParseError(0, "checkpoint truncated");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(bytes[i]) << (8 * i);
    return v;
}

void put_blocks(std::ostream& out, const ToyModelParams& p) {
    for (const Matrix* b : p.blocks()) {
        for (Eigen::Index i = 0; i < b->rows(); ++i) {
            for (Eigen::Index j = 0; j < b->cols(); ++j) put_u64(out, std::bit_cast<std::uint64_t>((*b)(i, j)));
        }
    }
}

void get_blocks(std::istream& in, ToyModelParams& p) {
    for (Matrix* b : p.blocks()) {
        for (Eigen::Index i = 0; i < b->rows(); ++i) {
            for (Eigen::Index j = 0; j < b->cols(); ++j) (*b)(i, j) = std::bit_cast<double>(get_u64(in));
        }
    }
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& cp) {
    const auto s = cp.model.shape();
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    put_u64(out, static_cast<std::uint64_t>(s.input_dim));
    put_u64(out, static_cast<std::uint64_t>(s.hidden));
    put_u64(out, static_cast<std::uint64_t>(s.embedding));
    put_u64(out, static_cast<std::uint64_t>(s.classes));
    put_u64(out, static_cast<std::uint64_t>(cp.epoch));
    put_u64(out, static_cast<std::uint64_t>(cp.optimizer.step));
    put_blocks(out, cp.model);
    put_blocks(out, cp.optimizer.first);
    put_blocks(out, cp.optimizer.second);
}

Checkpoint read_checkpoint(std::istream& in) {
    char magic[sizeof kCheckpointMagic];
    if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kCheckpointMagic)) {
        throw ParseError(0, "not a checkpoint (bad magic bytes)");
    }
    constexpr std::uint64_t kMaxDim = 1u << 20;
    ModelShape s;
    std::uint64_t dims[4];
    for (auto& d : dims) {
        d = get_u64(in);
        if (d == 0 || d > kMaxDim) throw ParseError(0, "checkpoint dimension out of range");
    }
    s.input_dim = static_cast<int>(dims[0]);
    s.hidden = static_cast<int>(dims[1]);
    s.embedding = static_cast<int>(dims[2]);
    s.classes = static_cast<int>(dims[3]);
    try {
        s.validate();
    } catch (const ConfigError& e) {
        throw ParseError(0, std::string("checkpoint shape invalid: ") + e.what());
    }
    Checkpoint cp{ToyModelParams::zeros(s), AdamState::zeros(s), 0};
    cp.epoch = static_cast<std::int64_t>(get_u64(in));
    cp.optimizer.step = static_cast<std::int64_t>(get_u64(in));
    get_blocks(in, cp.model);
    get_blocks(in, cp.optimizer.first);
    get_blocks(in, cp.optimizer.second);
    if (in.peek() != std::char_traits<char>::eof()) throw ParseError(0, "trailing bytes after checkpoint");
    return cp;
}

void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_checkpoint(out, cp);
    if (!out) throw Error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint " + path.string());
    return read_checkpoint(in);
}

}  // namespace pla
