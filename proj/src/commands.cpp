#include "pla/commands.hpp"

#include "pla/config.hpp"
#include "pla/data_synth.hpp"
#include "pla/eval.hpp"
#include "pla/report.hpp"
#include "pla/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace pla::cli {
namespace {

namespace fs = std::filesystem;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool with_seed = true) {
    cmd->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
    if (with_seed) cmd->add_option("--seed", c.seed, "overrides the config seed");
    cmd->add_option("--out", c.out, "output directory (default: config paths.out_dir)");
}

RunConfig resolve(const Common& c) {
    RunConfig cfg = c.config.empty() ? default_config() : load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (!c.out.empty()) cfg.out_dir = c.out;
    cfg.validate();
    return cfg;
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::ofstream open_file(const fs::path& p) {
    std::ofstream f(p, std::ios::trunc);
    if (!f) throw Error("cannot open " + p.string() + " for writing");
    return f;
}

// A relative paths.dataset is looked up inside the output directory, where gen-data writes.
std::string dataset_path_for(const std::string& flag, const RunConfig& cfg) {
    if (!flag.empty()) return flag;
    const fs::path p(cfg.dataset_path);
    return p.is_absolute() ? p.string() : (fs::path(cfg.out_dir) / p).string();
}

// gen-data ---------------------------------------------------------------

int gen_data(const Common& common, std::ostream& out) {
    const RunConfig cfg = resolve(common);
    const SynthSpec spec = cfg.synth_spec();
    Rng rng(derive_seed(spec.seed, 4));
    const auto ds = split(generate(spec), cfg.split, rng);
    fs::create_directories(cfg.out_dir);
    const fs::path path = fs::path(cfg.out_dir) / "dataset.csv";
    save_dataset(ds, path);

    std::map<SplitTag, int> counts;
    for (auto t : ds.tags) ++counts[t];
    out << "wrote " << path.string() << ": " << ds.size() << " samples, " << spec.n_identities
        << " identities, dim " << ds.dim() << " (train " << counts[SplitTag::train] << ", query "
        << counts[SplitTag::query] << ", gallery " << counts[SplitTag::gallery] << ")\n";
    return 0;
}

// train ------------------------------------------------------------------

struct TrainArgs {
    Common common;
    std::string mode = "pla";
    std::string dataset;
    int epochs = 0;
};

void write_summary_json(const fs::path& path, const RunConfig& cfg, const std::string& mode,
                        const RunReport& report, bool completed, const std::string& error) {
    nlohmann::json j;
    j["mode"] = mode;
    j["seed"] = cfg.seed;
    j["completed"] = completed;
    if (!completed) j["error"] = error;
    j["total_epochs"] = report.total_epochs;
    j["committed_epochs"] = report.committed_epochs;
    j["best_epoch"] = report.best_epoch;
    j["best_loss"] = std::isfinite(report.best_loss) ? nlohmann::json(report.best_loss) : nlohmann::json();
    j["final_loss"] = std::isfinite(report.final_loss) ? nlohmann::json(report.final_loss) : nlohmann::json();
    j["config"] = nlohmann::json::parse(dump_config(cfg));
    const auto full = PlaConfig::full_scale();
    j["full_scale_reference"] = {{"max_epochs", full.max_epochs},
                                 {"initial_design", full.initial_design},
                                 {"explore_epochs", full.explore_epochs},
                                 {"exploit_epochs", full.exploit_epochs}};
    auto f = open_file(path);
    f << j.dump(2) << '\n';
}

int train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg = resolve(args.common);
    if (args.epochs < 0) throw ConfigError("--epochs must be >= 1");
    if (args.epochs > 0) {
        if (args.mode == "pla") cfg.pla.max_epochs = args.epochs;
        else cfg.train_epochs = args.epochs;
    }
    const std::string dataset_path = dataset_path_for(args.dataset, cfg);
    const LossMode loss = args.mode == "pla" ? LossMode::composite : loss_mode_from_string(args.mode);

    const auto ds = load_dataset(dataset_path);
    const auto part = training_partition(ds);
    const TrainSet data = make_train_set(part.features, part.labels);
    if (data.num_classes < cfg.pla.batch.P) {
        throw ConfigError("batch.P=" + std::to_string(cfg.pla.batch.P) + " exceeds the " +
                          std::to_string(data.num_classes) + " training identities in " + dataset_path);
    }

    const TrainOptions options{loss, cfg.distance, std::nullopt};
    HyperParams w = cfg.hyperparams;
    if (loss == LossMode::ce_only) w.lambda = 0.0;
    if (loss == LossMode::batch_hard) w.k = w.p = 1;

    const fs::path dir = cfg.out_dir;
    fs::create_directories(dir);
    RunResult result;
    try {
        result = args.mode == "pla"
                     ? run_pla(data, cfg.pla, cfg.optimizer, cfg.seed, cfg.model, options)
                     : run_fixed(data, w, cfg.fixed_epochs(), cfg.pla.batch, cfg.optimizer, cfg.seed,
                                 cfg.model, options);
    } catch (const RunAborted& e) {
        write_run_report(dir, e.partial());
        write_summary_json(dir / "summary.json", cfg, args.mode, e.partial(), false, e.what());
        err << "error: training aborted after " << e.partial().total_epochs << " epochs: " << e.what()
            << "\npartial report written to " << dir.string() << '\n';
        return 1;
    }
    const auto& report = result.report;
    write_run_report(dir, report);
    save_checkpoint(result.best, dir / "checkpoint.bin");
    write_summary_json(dir / "summary.json", cfg, args.mode, report, true, "");

    out << "mode " << args.mode << ", seed " << cfg.seed << ": " << report.total_epochs << " epochs ("
        << report.committed_epochs << " committed)\n";
    if (!report.choices.empty()) {
        out << "chosen hyperparameters by round:\n";
        for (const auto& c : report.choices) {
            out << "  round " << c.round << ": " << to_string(c.w) << " for " << c.epochs << " epochs\n";
        }
    }
    out << "best loss " << fmt(report.best_loss) << " at epoch " << report.best_epoch << ", final loss "
        << fmt(report.final_loss) << "\nwrote " << (dir / "checkpoint.bin").string() << '\n';
    return 0;
}

// eval -------------------------------------------------------------------

struct EvalArgs {
    Common common;
    std::string checkpoint;
    std::string dataset;
    int target_dim = 0;
    std::string head = "full";
};

Matrix select_head(const Matrix& emb, const std::string& head) {
    const auto half = emb.cols() / 2;
    if (head == "full") return emb;
    if (head == "triplet") return emb.leftCols(half);
    if (head == "softmax") return emb.rightCols(half);
    throw ConfigError("--head must be full, triplet or softmax");
}

int eval(const EvalArgs& args, std::ostream& out) {
    const RunConfig cfg = resolve(args.common);
    const fs::path dir = cfg.out_dir;
    const fs::path ckpt = args.checkpoint.empty() ? dir / "checkpoint.bin" : fs::path(args.checkpoint);
    const std::string dataset_path = dataset_path_for(args.dataset, cfg);

    const Checkpoint cp = load_checkpoint(ckpt);
    const auto ds = load_dataset(dataset_path);
    const auto shape = cp.model.shape();
    if (ds.dim() != shape.input_dim) {
        throw InvalidInput("dataset dimension " + std::to_string(ds.dim()) + " does not match the model input " +
                           std::to_string(shape.input_dim));
    }
    auto qg = query_gallery(ds);
    if (qg.query.rows() == 0 || qg.gallery.rows() == 0) {
        throw InvalidInput(dataset_path + " has no query or no gallery samples");
    }
    qg.query = select_head(forward(cp.model, qg.query).embeddings, args.head);
    qg.gallery = select_head(forward(cp.model, qg.gallery).embeddings, args.head);

    if (args.target_dim < 0) throw ConfigError("--target-dim must be >= 0");
    if (args.target_dim > 0) {
        if (args.target_dim > qg.query.cols()) {
            throw ConfigError("--target-dim " + std::to_string(args.target_dim) + " exceeds the embedding width " +
                              std::to_string(qg.query.cols()));
        }
        Matrix all(qg.query.rows() + qg.gallery.rows(), qg.query.cols());
        all << qg.query, qg.gallery;
        const auto pca = pca_reduce(all, args.target_dim);
        qg.query = pca.projected.topRows(qg.query.rows());
        qg.gallery = pca.projected.bottomRows(qg.gallery.rows());
    }
    const auto m = evaluate(qg);

    fs::create_directories(dir);
    {
        auto f = open_file(dir / "metrics.csv");
        write_cmc_csv(f, m);
    }
    auto f = open_file(dir / "metrics_summary.csv");
    write_metrics_summary_csv(f, m);

    out << "rank-1 " << fmt(m.rank1, "%.4f") << ", mAP " << fmt(m.map, "%.4f") << " over " << m.evaluated_queries
        << " queries";
    if (m.excluded_queries > 0) out << " (" << m.excluded_queries << " without a gallery match excluded)";
    out << ", head " << args.head << ", dim " << qg.query.cols() << "\nwrote " << (dir / "metrics.csv").string()
        << '\n';
    return 0;
}

// tune-demo --------------------------------------------------------------

struct TuneArgs {
    Common common;
    TuneSettings settings;
};

int tune_demo(const TuneArgs& args, std::ostream& out) {
    const RunConfig cfg = resolve(args.common);
    TuneSettings s = args.settings;
    s.box = cfg.pla.box;
    s.kernel = cfg.pla.kernel;
    if (s.initial_design < 1 || s.rounds < 0 || s.pool_size < 1) {
        throw ConfigError("--initial and --pool must be >= 1, --rounds >= 0");
    }
    const QuadraticBowl bowl{s.box};
    Rng rng(derive_seed(cfg.seed, 3));
    const auto trace = minimize(bowl, s, rng);

    const fs::path dir = cfg.out_dir;
    fs::create_directories(dir);
    auto f = open_file(dir / "trace.csv");
    write_trace_csv(f, trace);

    const double best = trace.back().best_so_far;
    out << trace.size() << " evaluations (" << s.initial_design << " initial, " << s.rounds
        << " proposals), best " << fmt(best) << ", analytic minimum " << fmt(bowl.minimum()) << ", gap "
        << fmt(best - bowl.minimum()) << "\nwrote " << (dir / "trace.csv").string() << '\n';
    return 0;
}

// report -----------------------------------------------------------------

int report(const Common& common, std::ostream& out) {
    const fs::path dir = common.out.empty() ? fs::path(resolve(common).out_dir) : fs::path(common.out);
    std::ifstream in(dir / "report.csv");
    if (!in) throw Error("no report.csv in " + dir.string());
    const auto rows = read_epoch_csv(in);

    std::map<std::string, int> phases;
    std::vector<const EpochRow*> chosen;
    const EpochRow* best = nullptr;
    const EpochRow* last = nullptr;
    for (const auto& r : rows) {
        ++phases[r.phase];
        if (r.phase == "explore") continue;
        if (chosen.empty() || chosen.back()->round != r.round) chosen.push_back(&r);
        if (!best || r.loss.total < best->loss.total) best = &r;
        last = &r;
    }
    out << "run in " << dir.string() << ": " << rows.size() << " epochs";
    for (const auto& [phase, n] : phases) out << ", " << n << ' ' << phase;
    out << '\n';
    if (phases.count("exploit")) {
        out << "hyperparameter sequence:\n";
        for (const auto* r : chosen) out << "  round " << r->round << ": " << to_string(r->w) << '\n';
    }
    if (best) {
        out << "best committed loss " << fmt(best->loss.total) << " at epoch " << best->epoch
            << "; last committed epoch " << last->epoch << " loss " << fmt(last->loss.total) << '\n';
    }
    std::ifstream metrics(dir / "metrics_summary.csv");
    std::string header, values;
    if (metrics && std::getline(metrics, header) && std::getline(metrics, values)) {
        std::istringstream is(values);
        std::string rank1, map, excluded;
        std::getline(is, rank1, ',');
        std::getline(is, map, ',');
        std::getline(is, excluded, ',');
        out << "retrieval: rank-1 " << fmt(std::stod(rank1), "%.4f") << ", mAP " << fmt(std::stod(map), "%.4f")
            << '\n';
    }
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Progressive triplet-loss training toolkit", "pla"};
    app.require_subcommand(1);

    Common gen_common;
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset into OUT/dataset.csv");
    add_common(gen, gen_common);

    TrainArgs train_args;
    auto* tr = app.add_subcommand("train", "train a model and write its run report and checkpoint");
    add_common(tr, train_args.common);
    tr->add_option("--mode", train_args.mode, "pla, batch_hard, ce_only, triplet_only or composite_fixed")
        ->check(CLI::IsMember({"pla", "batch_hard", "ce_only", "triplet_only", "composite_fixed"}));
    tr->add_option("--dataset", train_args.dataset, "dataset CSV (default: paths.dataset inside --out)");
    tr->add_option("--epochs", train_args.epochs, "overrides the epoch budget");

    EvalArgs eval_args;
    auto* ev = app.add_subcommand("eval", "retrieval metrics of a checkpoint on the query/gallery split");
    add_common(ev, eval_args.common, false);
    ev->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file (default: OUT/checkpoint.bin)");
    ev->add_option("--dataset", eval_args.dataset, "dataset CSV (default: paths.dataset inside --out)");
    ev->add_option("--target-dim", eval_args.target_dim, "PCA output width; 0 keeps the embedding");
    ev->add_option("--head", eval_args.head, "full, triplet or softmax")
        ->check(CLI::IsMember({"full", "triplet", "softmax"}));

    TuneArgs tune_args;
    auto* tu = app.add_subcommand("tune-demo", "run the Bayesian optimizer on a known quadratic");
    add_common(tu, tune_args.common);
    tu->add_option("--rounds", tune_args.settings.rounds, "number of proposals");
    tu->add_option("--pool", tune_args.settings.pool_size, "candidate pool per proposal");
    tu->add_option("--initial", tune_args.settings.initial_design, "initial design size");

    Common report_common;
    auto* rep = app.add_subcommand("report", "summarize the run in OUT");
    add_common(rep, report_common, false);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return gen_data(gen_common, out);
        if (tr->parsed()) return train(train_args, out, err);
        if (ev->parsed()) return eval(eval_args, out);
        if (tu->parsed()) return tune_demo(tune_args, out);
        if (rep->parsed()) return report(report_common, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace pla::cli
