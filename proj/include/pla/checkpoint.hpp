#pragma once

// Flat binary checkpoint, all integers and reals 64-bit little-endian:
//
//   offset  size  field
//   0       8     magic "PLACKPT1"
//   8       8     input_dim   (u64)
//   16      8     hidden      (u64)
//   24      8     embedding   (u64)
//   32      8     classes     (u64)
//   40      8     epoch       (i64)
//   48      8     adam step   (i64)
//   56      ...   weights, then first moments, then second moments; each as the
//                 eight blocks trunk_w, trunk_b, triplet_w, triplet_b, softmax_w,
//                 softmax_b, classifier_w, classifier_b in row-major f64.

#include "pla/optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>

namespace pla {

inline constexpr char kCheckpointMagic[8] = {'P', 'L', 'A', 'C', 'K', 'P', 'T', '1'};

struct Checkpoint {
    ToyModelParams model;
    AdamState optimizer;
    std::int64_t epoch = 0;

    bool operator==(const Checkpoint&) const = default;
};

void write_checkpoint(std::ostream& out, const Checkpoint& cp);
Checkpoint read_checkpoint(std::istream& in);

/// Throws Error when the file cannot be written or read, ParseError on a
/// malformed file.
void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pla
