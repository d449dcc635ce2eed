#pragma once

// Run configuration, read from JSON. Every section and key is optional; keys
// that are not part of the schema are rejected. See docs/config.md.

#include "pla/data_synth.hpp"
#include "pla/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace pla {

struct RunConfig {
    std::uint64_t seed = 0;
    SynthSpec data;
    std::optional<std::uint64_t> data_seed;  // falls back to seed
    SplitSpec split{2, 32};
    HyperParams hyperparams;  // fixed w for the non-progressive modes
    ModelSettings model;
    DistanceOptions distance;
    OptimizerConfig optimizer;
    PlaConfig pla;  // pla.batch and pla.box hold the batch spec and search bounds
    int train_epochs = 0;  // fixed-mode budget; 0 means pla.max_epochs
    std::string dataset_path = "dataset.csv";
    std::string out_dir = "out";

    SynthSpec synth_spec() const;
    int fixed_epochs() const { return train_epochs > 0 ? train_epochs : pla.max_epochs; }

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Desk-scale defaults used when a key is absent.
RunConfig default_config();

/// Throws ConfigError on malformed JSON, unknown keys, wrong types or values
/// that violate a component invariant.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// The fully resolved configuration as JSON text.
std::string dump_config(const RunConfig& cfg);

}  // namespace pla
