#pragma once

// Synthetic identity clusters with tunable hardness, split into train / query /
// gallery partitions, and the CSV dataset format.

#include "pla/eval.hpp"
#include "pla/sampler.hpp"
#include "pla/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace pla {

struct SynthSpec {
    int n_identities = 64;
    int samples_per_identity = 16;
    int dim = 32;
    double center_scale = 1.0;
    double intra_spread = 0.1;
    double hard_negative_fraction = 0.0;  // centres placed 2 * intra_spread from a partner
    double outlier_fraction = 0.0;        // samples drawn at 4x spread
    double overhard_fraction = 0.0;       // samples drawn from another identity's cluster
    std::uint64_t seed = 0;

    void validate() const;
};

enum class SplitTag { train, query, gallery };

std::string to_string(SplitTag tag);
SplitTag split_tag_from_string(const std::string& s);

struct LabeledDataset {
    Matrix features;
    Labels labels;
    std::vector<SplitTag> tags;

    std::size_t size() const { return labels.size(); }
    int dim() const { return static_cast<int>(features.cols()); }
    bool operator==(const LabeledDataset& other) const;
};

/// Deterministic in spec (seed included). Every sample is tagged train.
LabeledDataset generate(const SynthSpec& spec);

/// Identity centres of the last generate() call are not kept; this returns the
/// centres a given spec produces, for tests and diagnostics.
Matrix generate_centers(const SynthSpec& spec);

struct SplitSpec {
    int query_per_identity = 2;
    /// Identities reserved for training (open-set). 0 selects closed-set mode,
    /// where every identity is split into query and gallery and training reads
    /// the gallery.
    int train_identities = 0;
};

/// Retags samples. Throws InvalidInput when an identity has too few samples or
/// the identity counts do not allow the requested partition.
LabeledDataset split(LabeledDataset dataset, const SplitSpec& spec, Rng& rng);

QueryGallerySplit query_gallery(const LabeledDataset& dataset);

struct Partition {
    Matrix features;
    Labels labels;
};

/// Train-tagged samples; the gallery when nothing is tagged train (closed set).
Partition training_partition(const LabeledDataset& dataset);

void write_dataset(std::ostream& out, const LabeledDataset& dataset);
LabeledDataset read_dataset(std::istream& in);
void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& path);
LabeledDataset load_dataset(const std::filesystem::path& path);

}  // namespace pla
