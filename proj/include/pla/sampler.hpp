#pragma once

#include "pla/types.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace pla {

/// P identities per batch, K samples per identity.
struct BatchSpec {
    int P = 16;
    int K = 8;

    int size() const { return P * K; }
    /// Throws ConfigError unless P >= 2 and K >= 2.
    void validate() const;
};

using Rng = std::mt19937_64;

/// Draws one identity-balanced batch of P * K sample indices, grouped by
/// identity. Identities are chosen without replacement; samples within an
/// identity without replacement when it has at least K of them, otherwise
/// with replacement.
std::vector<std::size_t> pk_sample(const Labels& labels, const BatchSpec& spec, Rng& rng);

/// Owns the random state of one training run. Copying a sampler forks its
/// stream: both copies then produce the same sequence.
class PkSampler {
public:
    PkSampler(Labels labels, BatchSpec spec, std::uint64_t seed);

    std::vector<std::size_t> next();

    /// ceil(|dataset| / (P * K)).
    int batches_per_epoch() const;

    const BatchSpec& spec() const { return spec_; }
    const Labels& labels() const { return labels_; }

private:
    Labels labels_;
    BatchSpec spec_;
    Rng rng_;
    std::vector<int> identities_;
    std::vector<std::vector<std::size_t>> members_;
};

}  // namespace pla
