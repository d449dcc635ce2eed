#include "pla/config.hpp"

#include "pla/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace pla {
namespace {

using json = nlohmann::json;

class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    Section child(const char* key) {
        seen_.insert(key);
        return Section(j_.at(key), path_ + "." + key);
    }

    void get(const char* key, int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) fail(key, "an integer");
            out = v->get<int>();
        }
    }
    void get(const char* key, std::uint64_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
                fail(key, "a non-negative integer");
            }
            out = v->get<std::uint64_t>();
        }
    }
    void get(const char* key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) fail(key, "a number");
            out = v->get<double>();
        }
    }
    void get(const char* key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) fail(key, "true or false");
            out = v->get<bool>();
        }
    }
    void get(const char* key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) fail(key, "a string");
            out = v->get<std::string>();
        }
    }
    template <class T>
    void get_range(const char* key, T& lo, T& hi) {
        if (const json* v = find(key)) {
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
                fail(key, "a [low, high] pair");
            }
            if constexpr (std::is_integral_v<T>) {
                if (!(*v)[0].is_number_integer() || !(*v)[1].is_number_integer()) fail(key, "an integer pair");
            }
            lo = (*v)[0].get<T>();
            hi = (*v)[1].get<T>();
        }
    }

    /// Rejects keys that were never read.
    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError("unknown key '" + path_ + "." + key + "'");
        }
    }

private:
    const json* find(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    [[noreturn]] void fail(const char* key, const char* expected) const {
        throw ConfigError(path_ + "." + key + " must be " + expected);
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

ReExplorePolicy policy_from_string(const std::string& s) {
    if (s == "all") return ReExplorePolicy::all;
    if (s == "stale") return ReExplorePolicy::stale;
    throw ConfigError("pla.re_explore_policy must be 'all' or 'stale', got '" + s + "'");
}

KernelForm kernel_from_string(const std::string& s) {
    if (s == "difference") return KernelForm::difference;
    if (s == "literal") return KernelForm::literal;
    throw ConfigError("pla.kernel must be 'difference' or 'literal', got '" + s + "'");
}

}  // namespace

SynthSpec RunConfig::synth_spec() const {
    SynthSpec s = data;
    s.seed = data_seed.value_or(seed);
    return s;
}

void RunConfig::validate() const {
    synth_spec().validate();
    if (split.query_per_identity < 1) throw ConfigError("data.query_per_identity must be >= 1");
    if (split.train_identities < 0 || split.train_identities >= data.n_identities) {
        throw ConfigError("data.train_identities must lie in [0, n_identities)");
    }
    if (split.query_per_identity >= data.samples_per_identity) {
        throw ConfigError("data.query_per_identity must be smaller than samples_per_identity");
    }
    pla.validate();
    validate_hyperparams(hyperparams, pla.box);
    ModelShape{data.dim, model.hidden, model.embedding, 2}.validate();
    optimizer.validate();
    if (train_epochs < 0) throw ConfigError("train.epochs must be >= 0");
    const int train_ids = split.train_identities > 0 ? split.train_identities : data.n_identities;
    if (train_ids < pla.batch.P) {
        throw ConfigError("batch.P=" + std::to_string(pla.batch.P) + " exceeds the " +
                          std::to_string(train_ids) + " training identities");
    }
}

RunConfig default_config() {
    RunConfig c;
    c.data.n_identities = 64;
    c.data.samples_per_identity = 16;
    c.data.dim = 32;
    c.data.center_scale = 1.0;
    c.data.intra_spread = 0.1;
    c.data.hard_negative_fraction = 0.1;
    c.data.outlier_fraction = 0.1;
    c.data.overhard_fraction = 0.05;
    c.split = {2, 32};
    c.pla.batch = {16, 8};
    return c;
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c = default_config();
    Section root(j, "config");
    root.get("seed", c.seed);
    if (root.has("data")) {
        auto s = root.child("data");
        s.get("n_identities", c.data.n_identities);
        s.get("samples_per_identity", c.data.samples_per_identity);
        s.get("dim", c.data.dim);
        s.get("center_scale", c.data.center_scale);
        s.get("intra_spread", c.data.intra_spread);
        s.get("hard_negative_fraction", c.data.hard_negative_fraction);
        s.get("outlier_fraction", c.data.outlier_fraction);
        s.get("overhard_fraction", c.data.overhard_fraction);
        if (s.has("seed")) {
            std::uint64_t v = 0;
            s.get("seed", v);
            c.data_seed = v;
        }
        s.get("query_per_identity", c.split.query_per_identity);
        s.get("train_identities", c.split.train_identities);
        s.finish();
    }
    if (root.has("batch")) {
        auto s = root.child("batch");
        s.get("P", c.pla.batch.P);
        s.get("K", c.pla.batch.K);
        s.finish();
    }
    if (root.has("bounds")) {
        auto s = root.child("bounds");
        s.get_range("lambda", c.pla.box.lambda_lo, c.pla.box.lambda_hi);
        s.get_range("margin", c.pla.box.margin_lo, c.pla.box.margin_hi);
        s.get_range("k", c.pla.box.k_lo, c.pla.box.k_hi);
        s.get_range("p", c.pla.box.p_lo, c.pla.box.p_hi);
        s.finish();
    }
    if (root.has("hyperparams")) {
        auto s = root.child("hyperparams");
        s.get("lambda", c.hyperparams.lambda);
        s.get("margin", c.hyperparams.margin);
        s.get("k", c.hyperparams.k);
        s.get("p", c.hyperparams.p);
        s.finish();
    }
    if (root.has("model")) {
        auto s = root.child("model");
        s.get("hidden", c.model.hidden);
        s.get("embedding", c.model.embedding);
        s.get("squared_distance", c.distance.squared);
        s.get("normalize", c.distance.normalize);
        s.finish();
    }
    if (root.has("optimizer")) {
        auto s = root.child("optimizer");
        s.get("alpha0", c.optimizer.alpha0);
        s.get("e0", c.optimizer.e0);
        s.get("e1", c.optimizer.e1);
        s.get("beta1_early", c.optimizer.beta1_early);
        s.get("beta1_late", c.optimizer.beta1_late);
        s.get("beta1_switch_epoch", c.optimizer.beta1_switch_epoch);
        s.get("beta2", c.optimizer.beta2);
        s.get("epsilon", c.optimizer.epsilon);
        s.finish();
    }
    if (root.has("pla")) {
        auto s = root.child("pla");
        s.get("max_epochs", c.pla.max_epochs);
        s.get("initial_design", c.pla.initial_design);
        s.get("explore_epochs", c.pla.explore_epochs);
        s.get("exploit_epochs", c.pla.exploit_epochs);
        s.get("objective_split", c.pla.objective_split);
        s.get("expected_drop", c.pla.expected_drop);
        s.get("pool_size", c.pla.pool_size);
        std::string policy = "all";
        std::string kernel = "difference";
        s.get("re_explore_policy", policy);
        s.get("kernel", kernel);
        c.pla.re_explore_policy = policy_from_string(policy);
        c.pla.kernel = kernel_from_string(kernel);
        s.finish();
    }
    if (root.has("train")) {
        auto s = root.child("train");
        s.get("epochs", c.train_epochs);
        s.finish();
    }
    if (root.has("paths")) {
        auto s = root.child("paths");
        s.get("dataset", c.dataset_path);
        s.get("out_dir", c.out_dir);
        s.finish();
    }
    root.finish();
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const RunConfig& c) {
    const auto& b = c.pla.box;
    json j;
    j["seed"] = c.seed;
    j["data"] = {{"n_identities", c.data.n_identities},
                 {"samples_per_identity", c.data.samples_per_identity},
                 {"dim", c.data.dim},
                 {"center_scale", c.data.center_scale},
                 {"intra_spread", c.data.intra_spread},
                 {"hard_negative_fraction", c.data.hard_negative_fraction},
                 {"outlier_fraction", c.data.outlier_fraction},
                 {"overhard_fraction", c.data.overhard_fraction},
                 {"seed", c.synth_spec().seed},
                 {"query_per_identity", c.split.query_per_identity},
                 {"train_identities", c.split.train_identities}};
    j["batch"] = {{"P", c.pla.batch.P}, {"K", c.pla.batch.K}};
    j["bounds"] = {{"lambda", {b.lambda_lo, b.lambda_hi}},
                   {"margin", {b.margin_lo, b.margin_hi}},
                   {"k", {b.k_lo, b.k_hi}},
                   {"p", {b.p_lo, b.p_hi}}};
    j["hyperparams"] = {{"lambda", c.hyperparams.lambda},
                        {"margin", c.hyperparams.margin},
                        {"k", c.hyperparams.k},
                        {"p", c.hyperparams.p}};
    j["model"] = {{"hidden", c.model.hidden},
                  {"embedding", c.model.embedding},
                  {"squared_distance", c.distance.squared},
                  {"normalize", c.distance.normalize}};
    j["optimizer"] = {{"alpha0", c.optimizer.alpha0},
                      {"e0", c.optimizer.e0},
                      {"e1", c.optimizer.e1},
                      {"beta1_early", c.optimizer.beta1_early},
                      {"beta1_late", c.optimizer.beta1_late},
                      {"beta1_switch_epoch", c.optimizer.beta1_switch_epoch},
                      {"beta2", c.optimizer.beta2},
                      {"epsilon", c.optimizer.epsilon}};
    j["pla"] = {{"max_epochs", c.pla.max_epochs},
                {"initial_design", c.pla.initial_design},
                {"explore_epochs", c.pla.explore_epochs},
                {"exploit_epochs", c.pla.exploit_epochs},
                {"objective_split", c.pla.objective_split},
                {"expected_drop", c.pla.expected_drop},
                {"pool_size", c.pla.pool_size},
                {"re_explore_policy", c.pla.re_explore_policy == ReExplorePolicy::all ? "all" : "stale"},
                {"kernel", c.pla.kernel == KernelForm::difference ? "difference" : "literal"}};
    j["train"] = {{"epochs", c.train_epochs}};
    j["paths"] = {{"dataset", c.dataset_path}, {"out_dir", c.out_dir}};
    return j.dump(2);
}

}  // namespace pla
