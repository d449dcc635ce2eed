#include "pla/optimizer.hpp"

#include "pla/error.hpp"

#include <cmath>
#include <string>

namespace pla {

void OptimizerConfig::validate() const {
    if (!(alpha0 > 0.0)) throw ConfigError("optimizer: alpha0 must be positive");
    if (!(e0 >= 0 && e0 < e1)) throw ConfigError("optimizer: need 0 <= e0 < e1");
    auto in_unit = [](double b) { return b > 0.0 && b < 1.0; };
    if (!in_unit(beta1_early) || !in_unit(beta1_late) || !in_unit(beta2)) {
        throw ConfigError("optimizer: betas must lie in (0, 1)");
    }
    if (beta1_switch_epoch < 0) throw ConfigError("optimizer: beta1_switch_epoch must be >= 0");
    if (!(epsilon > 0.0)) throw ConfigError("optimizer: epsilon must be positive");
}

double lr_schedule(int epoch, const OptimizerConfig& cfg) {
    if (epoch <= cfg.e0) return cfg.alpha0;
    if (epoch >= cfg.e1) return cfg.alpha0 * 0.001;
    const double frac = double(epoch - cfg.e0) / double(cfg.e1 - cfg.e0);
    return cfg.alpha0 * std::pow(0.001, frac);
}

double beta1_at(int epoch, const OptimizerConfig& cfg) {
    return epoch <= cfg.beta1_switch_epoch ? cfg.beta1_early : cfg.beta1_late;
}

AdamState AdamState::zeros(const ModelShape& shape) {
    return {ToyModelParams::zeros(shape), ToyModelParams::zeros(shape), 0};
}

void adam_step(ToyModelParams& model, const ToyModelParams& grads, AdamState& state,
               const OptimizerConfig& cfg, int epoch, double lr) {
    if (!grads.all_finite()) {
        throw NumericalError("non-finite gradient at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(state.step + 1));
    }
    const double b1 = beta1_at(epoch, cfg);
    const double b2 = cfg.beta2;
    ++state.step;
    const double c1 = 1.0 - std::pow(b1, double(state.step));
    const double c2 = 1.0 - std::pow(b2, double(state.step));

    auto params = model.blocks();
    const auto g = grads.blocks();
    auto m = state.first.blocks();
    auto v = state.second.blocks();
    for (std::size_t i = 0; i < ToyModelParams::block_count; ++i) {
        m[i]->array() = b1 * m[i]->array() + (1.0 - b1) * g[i]->array();
        v[i]->array() = b2 * v[i]->array() + (1.0 - b2) * g[i]->array().square();
        params[i]->array() -=
            lr * (m[i]->array() / c1) / ((v[i]->array() / c2).sqrt() + cfg.epsilon);
    }
}

}  // namespace pla
