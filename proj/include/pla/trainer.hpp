#pragma once

// Training loops: plain fixed-hyperparameter training and the progressive
// explore / restore / exploit schedule driven by the Bayesian optimizer.

#include "pla/bayes_opt.hpp"
#include "pla/checkpoint.hpp"
#include "pla/error.hpp"
#include "pla/metric.hpp"
#include "pla/model.hpp"
#include "pla/optimizer.hpp"
#include "pla/sampler.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace pla {

/// Features with contiguous class indices 0..C-1.
struct TrainSet {
    Matrix features;
    Labels classes;
    int num_classes = 0;
    Labels identities;  // original identity of each class index
};

/// Maps arbitrary identity ids to contiguous class indices (ascending id order).
TrainSet make_train_set(const Matrix& features, const Labels& identity_labels);

enum class LossMode {
    composite,     // cross-entropy + lambda * generalized batch-hard
    batch_hard,    // cross-entropy + lambda * hinge batch-hard (k, p ignored)
    ce_only,       // cross-entropy alone; triplet column reported as zero
    triplet_only,  // generalized batch-hard alone; softmax column reported as zero
};

enum class ReExplorePolicy { all, stale };

struct TrainOptions {
    LossMode mode = LossMode::composite;
    DistanceOptions distance;
    std::optional<double> fixed_lr;  // overrides the schedule when set
};

struct PlaConfig {
    int max_epochs = 120;
    int initial_design = 4;
    int explore_epochs = 6;
    int exploit_epochs = 30;
    int objective_split = 3;
    double expected_drop = 0.15;
    BatchSpec batch;
    int pool_size = 256;
    ReExplorePolicy re_explore_policy = ReExplorePolicy::all;
    KernelForm kernel = KernelForm::difference;
    HyperParamBox box;

    /// M = 3000, N = 8, 20-epoch exploration split 10/10, 300-epoch exploitation.
    static PlaConfig full_scale();
    /// Throws ConfigError when explore_epochs != 2 * objective_split or a count is < 1.
    void validate() const;
};

/// Mutable state of one run. `epoch` is the global schedule clock.
struct TrainerState {
    ToyModelParams model;
    AdamState adam;
    int epoch = 0;

    Checkpoint checkpoint() const;
    void restore(const Checkpoint& cp);
};

using EpochCallback = std::function<void(int epoch, const LossBreakdown& mean, double lr)>;

/// Runs n_epochs epochs of batches_per_epoch() P x K batches each and returns
/// the per-epoch mean losses. Advances state.epoch by n_epochs. The callback,
/// if any, fires after each epoch with the state already updated.
std::vector<LossBreakdown> train_epochs(TrainerState& state, const TrainSet& data,
                                        const HyperParams& w, int n_epochs, PkSampler& sampler,
                                        const OptimizerConfig& opt, const TrainOptions& options = {},
                                        const EpochCallback& on_epoch = {});

/// Loss and gradients for one batch under the selected mode.
struct BatchStep {
    LossBreakdown loss;
    ToyModelParams grads;
};
BatchStep batch_gradients(const ToyModelParams& model, const Matrix& features, const Labels& classes,
                          const HyperParams& w, const TrainOptions& options = {});

struct ExplorationRecord {
    HyperParams hyperparams;
    double mean_loss_first_half = 0.0;
    double mean_loss_second_half = 0.0;
    double objective_value = 0.0;
    std::vector<LossBreakdown> epoch_losses;
};

/// Trains explore_epochs epochs under w on a copy of the sampler, scores the
/// run with the drop-rate objective and restores the model, optimizer state
/// and epoch counter afterwards.
ExplorationRecord explore(TrainerState& state, const TrainSet& data, const HyperParams& w,
                          const PlaConfig& cfg, PkSampler sampler, const OptimizerConfig& opt,
                          const TrainOptions& options = {});

struct EpochRow {
    std::string phase;  // explore, exploit or train
    int round = 0;
    int candidate = -1;
    int epoch = 0;  // global schedule epoch
    HyperParams w;
    double lr = 0.0;
    LossBreakdown loss;
};

struct ExplorationRow {
    int round = 0;
    int candidate = 0;
    HyperParams w;
    double first_half = 0.0;
    double second_half = 0.0;
    double objective = 0.0;
};

struct ChoiceRow {
    int round = 0;
    int candidate = 0;
    HyperParams w;
    double ei = 0.0;
    double best_objective = 0.0;
    Eigen::Vector4d bandwidth = Eigen::Vector4d::Zero();
    int epochs = 0;
};

struct RunReport {
    std::string mode;
    std::vector<EpochRow> epochs;
    std::vector<ExplorationRow> explorations;
    std::vector<ChoiceRow> choices;
    int total_epochs = 0;      // every epoch trained, explorations included
    int committed_epochs = 0;  // epochs whose weight updates were kept
    double best_loss = std::numeric_limits<double>::infinity();
    int best_epoch = -1;  // global epoch of the saved model, -1 = initialization
    double final_loss = std::numeric_limits<double>::quiet_NaN();
};

struct RunResult {
    Checkpoint best;  // state at the lowest-loss epoch, or the initialization
    TrainerState final_state;
    RunReport report;
};

/// Thrown when a run stops early; carries everything recorded up to that point.
class RunAborted : public Error {
public:
    RunAborted(const std::string& what, RunReport partial)
        : Error(what), partial_(std::move(partial)) {}
    const RunReport& partial() const { return partial_; }

private:
    RunReport partial_;
};

struct ModelSettings {
    int hidden = 64;
    int embedding = 32;
};

/// Deterministic sub-seed for an independent random stream of one run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// The progressive schedule: explore candidates, restore, fit the GP, pick w'
/// by EI, exploit, and keep the lowest-loss model, until max_epochs epochs have
/// been trained.
RunResult run_pla(const TrainSet& data, const PlaConfig& cfg, const OptimizerConfig& opt,
                  std::uint64_t seed, const ModelSettings& model = {},
                  const TrainOptions& options = {});

/// Fixed-hyperparameter training for `epochs` epochs (baselines and ablations).
/// Keeps the lowest epoch-loss model, like run_pla.
RunResult run_fixed(const TrainSet& data, const HyperParams& w, int epochs, const BatchSpec& batch,
                    const OptimizerConfig& opt, std::uint64_t seed, const ModelSettings& model = {},
                    const TrainOptions& options = {});

std::string to_string(LossMode mode);
LossMode loss_mode_from_string(const std::string& name);

}  // namespace pla
