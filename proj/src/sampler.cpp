#include "pla/sampler.hpp"

#include "pla/error.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace pla {
namespace {

struct Grouped {
    std::vector<int> identities;
    std::vector<std::vector<std::size_t>> members;
};

Grouped group_by_identity(const Labels& labels) {
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
    Grouped g;
    for (auto& [id, idx] : groups) {
        g.identities.push_back(id);
        g.members.push_back(std::move(idx));
    }
    return g;
}

// First `count` entries of a partial Fisher-Yates shuffle of [0, n).
std::vector<std::size_t> choose_without_replacement(std::size_t n, std::size_t count, Rng& rng) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
    return pool;
}

std::vector<std::size_t> draw(const std::vector<std::vector<std::size_t>>& members,
                              const BatchSpec& spec, Rng& rng) {
    if (members.size() < static_cast<std::size_t>(spec.P)) {
        throw InsufficientData("dataset has " + std::to_string(members.size()) +
                               " identities, batch needs P=" + std::to_string(spec.P));
    }
    const auto K = static_cast<std::size_t>(spec.K);
    std::vector<std::size_t> out;
    out.reserve(static_cast<std::size_t>(spec.size()));
    for (std::size_t g : choose_without_replacement(members.size(), spec.P, rng)) {
        const auto& idx = members[g];
        if (idx.size() >= K) {
            for (std::size_t j : choose_without_replacement(idx.size(), K, rng)) out.push_back(idx[j]);
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
            for (std::size_t j = 0; j < K; ++j) out.push_back(idx[pick(rng)]);
        }
    }
    return out;
}

}  // namespace

void BatchSpec::validate() const {
    if (P < 2 || K < 2) {
        throw ConfigError("batch spec needs P >= 2 and K >= 2, got P=" + std::to_string(P) +
                          " K=" + std::to_string(K));
    }
}

std::vector<std::size_t> pk_sample(const Labels& labels, const BatchSpec& spec, Rng& rng) {
    spec.validate();
    return draw(group_by_identity(labels).members, spec, rng);
}

PkSampler::PkSampler(Labels labels, BatchSpec spec, std::uint64_t seed)
    : labels_(std::move(labels)), spec_(spec), rng_(seed) {
    spec_.validate();
    auto g = group_by_identity(labels_);
    identities_ = std::move(g.identities);
    members_ = std::move(g.members);
    if (members_.size() < static_cast<std::size_t>(spec_.P)) {
        throw InsufficientData("dataset has " + std::to_string(members_.size()) +
                               " identities, batch needs P=" + std::to_string(spec_.P));
    }
}

std::vector<std::size_t> PkSampler::next() { return draw(members_, spec_, rng_); }

int PkSampler::batches_per_epoch() const {
    const auto n = labels_.size();
    const auto b = static_cast<std::size_t>(spec_.size());
    return static_cast<int>((n + b - 1) / b);
}

}  // namespace pla
