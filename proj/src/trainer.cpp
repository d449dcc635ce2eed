#include "pla/trainer.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace pla {

TrainSet make_train_set(const Matrix& features, const Labels& identity_labels) {
    if (static_cast<std::size_t>(features.rows()) != identity_labels.size()) {
        throw InvalidInput("feature rows and labels differ in length");
    }
    std::map<int, int> index;
    for (int id : identity_labels) index.emplace(id, 0);
    TrainSet t;
    for (auto& [id, cls] : index) {
        cls = static_cast<int>(t.identities.size());
        t.identities.push_back(id);
    }
    t.features = features;
    t.num_classes = static_cast<int>(index.size());
    t.classes.reserve(identity_labels.size());
    for (int id : identity_labels) t.classes.push_back(index.at(id));
    return t;
}

PlaConfig PlaConfig::full_scale() {
    PlaConfig c;
    c.max_epochs = 3000;
    c.initial_design = 8;
    c.explore_epochs = 20;
    c.objective_split = 10;
    c.exploit_epochs = 300;
    return c;
}

void PlaConfig::validate() const {
    if (max_epochs < 1 || initial_design < 1 || explore_epochs < 1 || exploit_epochs < 1 ||
        objective_split < 1 || pool_size < 1) {
        throw ConfigError("pla: epoch counts, initial_design and pool_size must be >= 1");
    }
    if (explore_epochs != 2 * objective_split) {
        throw ConfigError("pla: explore_epochs must equal 2 * objective_split");
    }
    if (!std::isfinite(expected_drop)) throw ConfigError("pla: expected_drop must be finite");
    batch.validate();
    box.validate();
}

Checkpoint TrainerState::checkpoint() const { return {model, adam, epoch}; }

void TrainerState::restore(const Checkpoint& cp) {
    model = cp.model;
    adam = cp.optimizer;
    epoch = static_cast<int>(cp.epoch);
}

BatchStep batch_gradients(const ToyModelParams& model, const Matrix& features, const Labels& classes,
                          const HyperParams& w, const TrainOptions& options) {
    const auto cache = forward_cached(model, features);
    const auto n = features.rows();
    const auto head = model.triplet_w.cols();
    Matrix grad_emb = Matrix::Zero(n, head + model.softmax_w.cols());
    Matrix grad_logits = Matrix::Zero(n, model.classifier_w.cols());
    const EmbeddingBatch batch{cache.triplet, classes};

    BatchStep step;
    auto& loss = step.loss;
    switch (options.mode) {
        case LossMode::composite: {
            loss = composite_loss(batch, cache.logits, w, options.distance);
            auto g = composite_loss_grad(batch, cache.logits, w, options.distance);
            grad_emb.leftCols(head) = g.embeddings;
            grad_logits = std::move(g.logits);
            break;
        }
        case LossMode::batch_hard:
            loss.softmax_term = cross_entropy_loss(cache.logits, classes);
            loss.gbh_term = batch_hard_loss(batch, w.margin, options.distance);
            loss.total = loss.softmax_term + w.lambda * loss.gbh_term;
            grad_emb.leftCols(head) = batch_hard_loss_grad(batch, w.margin, options.distance) * w.lambda;
            grad_logits = cross_entropy_grad(cache.logits, classes);
            break;
        case LossMode::ce_only:
            loss.softmax_term = cross_entropy_loss(cache.logits, classes);
            loss.total = loss.softmax_term;
            grad_logits = cross_entropy_grad(cache.logits, classes);
            break;
        case LossMode::triplet_only:
            loss.gbh_term = gbh_loss(batch, w, options.distance);
            loss.total = loss.gbh_term;
            grad_emb.leftCols(head) = gbh_loss_grad(batch, w, options.distance);
            break;
    }
    step.grads = backward(model, cache, grad_emb, grad_logits);
    return step;
}

std::vector<LossBreakdown> train_epochs(TrainerState& state, const TrainSet& data, const HyperParams& w,
                                        int n_epochs, PkSampler& sampler, const OptimizerConfig& opt,
                                        const TrainOptions& options, const EpochCallback& on_epoch) {
    std::vector<LossBreakdown> out;
    out.reserve(static_cast<std::size_t>(std::max(n_epochs, 0)));
    const int batches = sampler.batches_per_epoch();
    const auto width = data.features.cols();
    for (int e = 0; e < n_epochs; ++e) {
        const double lr = options.fixed_lr.value_or(lr_schedule(state.epoch, opt));
        LossBreakdown sum;
        for (int b = 0; b < batches; ++b) {
            const auto idx = sampler.next();
            Matrix x(static_cast<Eigen::Index>(idx.size()), width);
            Labels y(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                x.row(static_cast<Eigen::Index>(i)) = data.features.row(static_cast<Eigen::Index>(idx[i]));
                y[i] = data.classes[idx[i]];
            }
            const auto step = batch_gradients(state.model, x, y, w, options);
            adam_step(state.model, step.grads, state.adam, opt, state.epoch, lr);
            sum.softmax_term += step.loss.softmax_term;
            sum.gbh_term += step.loss.gbh_term;
            sum.total += step.loss.total;
        }
        if (!state.model.all_finite()) {
            throw NumericalError("model weights became non-finite at epoch " + std::to_string(state.epoch));
        }
        const LossBreakdown mean{sum.softmax_term / batches, sum.gbh_term / batches, sum.total / batches};
        out.push_back(mean);
        const int trained = state.epoch++;
        if (on_epoch) on_epoch(trained, mean, lr);
    }
    return out;
}

ExplorationRecord explore(TrainerState& state, const TrainSet& data, const HyperParams& w,
                          const PlaConfig& cfg, PkSampler sampler, const OptimizerConfig& opt,
                          const TrainOptions& options) {
    const Checkpoint saved = state.checkpoint();
    ExplorationRecord rec;
    rec.hyperparams = w;
    try {
        rec.epoch_losses = train_epochs(state, data, w, cfg.explore_epochs, sampler, opt, options);
    } catch (...) {
        state.restore(saved);
        throw;
    }
    state.restore(saved);

    const auto split = static_cast<std::size_t>(cfg.objective_split);
    auto mean_total = [&](std::size_t from, std::size_t to) {
        double s = 0.0;
        for (std::size_t i = from; i < to; ++i) s += rec.epoch_losses[i].total;
        return s / double(to - from);
    };
    rec.mean_loss_first_half = mean_total(0, split);
    rec.mean_loss_second_half = mean_total(split, rec.epoch_losses.size());
    rec.objective_value =
        drop_rate_objective(rec.mean_loss_first_half, rec.mean_loss_second_half, cfg.expected_drop);
    return rec;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over (seed, stream)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace {

TrainerState initial_state(const TrainSet& data, const ModelSettings& settings, std::uint64_t seed) {
    ModelShape shape{static_cast<int>(data.features.cols()), settings.hidden, settings.embedding,
                     data.num_classes};
    shape.validate();
    return {ToyModelParams::random(shape, derive_seed(seed, 1)), AdamState::zeros(shape), 0};
}

}  // namespace

RunResult run_pla(const TrainSet& data, const PlaConfig& cfg, const OptimizerConfig& opt,
                  std::uint64_t seed, const ModelSettings& model, const TrainOptions& options) {
    cfg.validate();
    opt.validate();
    RunResult result{{}, initial_state(data, model, seed), {}};
    auto& state = result.final_state;
    auto& report = result.report;
    report.mode = "pla";
    result.best = state.checkpoint();

    PkSampler sampler(data.classes, cfg.batch, derive_seed(seed, 2));
    Rng rng(derive_seed(seed, 3));

    std::vector<HyperParams> candidates = latin_hypercube(cfg.initial_design, cfg.box, rng);
    std::vector<std::optional<double>> objective(candidates.size());

    try {
        for (int round = 1; report.total_epochs < cfg.max_epochs; ++round) {
            const int start_epoch = state.epoch;
            int explored = 0;
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                if (cfg.re_explore_policy == ReExplorePolicy::stale && objective[i]) continue;
                auto rec = explore(state, data, candidates[i], cfg, sampler, opt, options);
                objective[i] = rec.objective_value;
                for (std::size_t e = 0; e < rec.epoch_losses.size(); ++e) {
                    const int ep = start_epoch + static_cast<int>(e);
                    const double lr = options.fixed_lr.value_or(lr_schedule(ep, opt));
                    report.epochs.push_back({"explore", round, static_cast<int>(i), ep, candidates[i], lr,
                                             rec.epoch_losses[e]});
                }
                report.explorations.push_back({round, static_cast<int>(i), candidates[i],
                                               rec.mean_loss_first_half, rec.mean_loss_second_half,
                                               rec.objective_value});
                report.total_epochs += cfg.explore_epochs;
                ++explored;
            }
            // Exploration time still advances the schedule clock.
            state.epoch = start_epoch + explored * cfg.explore_epochs;
            if (report.total_epochs >= cfg.max_epochs) break;

            std::vector<HyperParams> points;
            std::vector<double> values;
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                if (!objective[i]) continue;
                points.push_back(candidates[i]);
                values.push_back(*objective[i]);
            }
            const Bandwidth B = estimate_bandwidth(points, cfg.box);
            const auto gp_state = GPState::from_observations(points, values, B, cfg.kernel);
            const auto prop = propose(gp_state, cfg.pool_size, rng, cfg.box);
            const int chosen = static_cast<int>(candidates.size());
            candidates.push_back(prop.w);
            objective.emplace_back();

            const int n = std::min(cfg.exploit_epochs, cfg.max_epochs - report.total_epochs);
            report.choices.push_back({round, chosen, prop.w, prop.ei,
                                      *std::min_element(values.begin(), values.end()), B.diagonal(), n});
            train_epochs(state, data, prop.w, n, sampler, opt, options,
                         [&](int ep, const LossBreakdown& mean, double lr) {
                             report.epochs.push_back({"exploit", round, chosen, ep, prop.w, lr, mean});
                             ++report.total_epochs;
                             ++report.committed_epochs;
                             report.final_loss = mean.total;
                             if (mean.total < report.best_loss) {
                                 report.best_loss = mean.total;
                                 report.best_epoch = ep;
                                 result.best = state.checkpoint();
                             }
                         });
        }
    } catch (const std::exception& e) {
        throw RunAborted(e.what(), report);
    }
    return result;
}

RunResult run_fixed(const TrainSet& data, const HyperParams& w, int epochs, const BatchSpec& batch,
                    const OptimizerConfig& opt, std::uint64_t seed, const ModelSettings& model,
                    const TrainOptions& options) {
    if (epochs < 1) throw ConfigError("training needs at least one epoch");
    opt.validate();
    batch.validate();
    validate_hyperparams(w);
    RunResult result{{}, initial_state(data, model, seed), {}};
    auto& state = result.final_state;
    auto& report = result.report;
    report.mode = to_string(options.mode);
    result.best = state.checkpoint();
    PkSampler sampler(data.classes, batch, derive_seed(seed, 2));
    try {
        train_epochs(state, data, w, epochs, sampler, opt, options,
                     [&](int ep, const LossBreakdown& mean, double lr) {
                         report.epochs.push_back({"train", 0, 0, ep, w, lr, mean});
                         ++report.total_epochs;
                         ++report.committed_epochs;
                         report.final_loss = mean.total;
                         if (mean.total < report.best_loss) {
                             report.best_loss = mean.total;
                             report.best_epoch = ep;
                             result.best = state.checkpoint();
                         }
                     });
    } catch (const std::exception& e) {
        throw RunAborted(e.what(), report);
    }
    return result;
}

std::string to_string(LossMode mode) {
    switch (mode) {
        case LossMode::composite: return "composite";
        case LossMode::batch_hard: return "batch_hard";
        case LossMode::ce_only: return "ce_only";
        case LossMode::triplet_only: return "triplet_only";
    }
    return "unknown";
}

LossMode loss_mode_from_string(const std::string& name) {
    if (name == "composite" || name == "composite_fixed") return LossMode::composite;
    if (name == "batch_hard") return LossMode::batch_hard;
    if (name == "ce_only") return LossMode::ce_only;
    if (name == "triplet_only") return LossMode::triplet_only;
    throw ConfigError("unknown loss mode '" + name + "'");
}

}  // namespace pla
