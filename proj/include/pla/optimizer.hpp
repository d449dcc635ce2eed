#pragma once

#include "pla/model.hpp"

#include <cstdint>

namespace pla {

/// Adam with an epoch-indexed learning rate and a one-time beta1 switch.
/// Defaults are the full-scale settings (alpha0 = 3e-4, decay from epoch 150
/// to 300, beta1 0.9 -> 0.5 after epoch 150).
struct OptimizerConfig {
    double alpha0 = 3e-4;
    int e0 = 150;
    int e1 = 300;
    double beta1_early = 0.9;
    double beta1_late = 0.5;
    int beta1_switch_epoch = 150;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    /// Throws ConfigError on alpha0 <= 0, e0 >= e1 or betas outside (0, 1).
    void validate() const;
};

/// alpha0 up to e0, exponential decay to alpha0 * 0.001 at e1, held beyond.
double lr_schedule(int epoch, const OptimizerConfig& cfg);

/// beta1_early while epoch <= beta1_switch_epoch, beta1_late after.
double beta1_at(int epoch, const OptimizerConfig& cfg);

/// First and second moment accumulators plus the step counter used for bias
/// correction.
struct AdamState {
    ToyModelParams first;
    ToyModelParams second;
    std::int64_t step = 0;

    static AdamState zeros(const ModelShape& shape);
    bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam update of `model` in place. Throws NumericalError
/// when a gradient entry is not finite; the model is left untouched then.
void adam_step(ToyModelParams& model, const ToyModelParams& grads, AdamState& state,
               const OptimizerConfig& cfg, int epoch, double lr);

}  // namespace pla
