#include "pla/bayes_opt.hpp"
#include "pla/checkpoint.hpp"
#include "pla/commands.hpp"
#include "pla/data_synth.hpp"
#include "pla/eval.hpp"
#include "pla/metric.hpp"
#include "pla/optimizer.hpp"
#include "pla/trainer.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace pla;

PYBIND11_MODULE(_pla, m) {
    m.doc() = "Generalized batch-hard triplet loss, GP/EI tuning and progressive training";

    py::register_exception<Error>(m, "PlaError", PyExc_ValueError);

    py::class_<HyperParams>(m, "HyperParams")
        .def(py::init<>())
        .def(py::init([](double lambda, double margin, int k, int p) { return HyperParams{lambda, margin, k, p}; }),
             py::arg("lambda_"), py::arg("margin"), py::arg("k"), py::arg("p"))
        .def_readwrite("lambda_", &HyperParams::lambda)
        .def_readwrite("margin", &HyperParams::margin)
        .def_readwrite("k", &HyperParams::k)
        .def_readwrite("p", &HyperParams::p)
        .def("__eq__", [](const HyperParams& a, const HyperParams& b) { return a == b; })
        .def("__repr__", [](const HyperParams& w) { return to_string(w); });

    py::class_<DistanceOptions>(m, "DistanceOptions")
        .def(py::init([](bool squared, bool normalize) { return DistanceOptions{squared, normalize}; }),
             py::arg("squared") = false, py::arg("normalize") = false)
        .def_readwrite("squared", &DistanceOptions::squared)
        .def_readwrite("normalize", &DistanceOptions::normalize);

    py::class_<LossBreakdown>(m, "LossBreakdown")
        .def_readonly("softmax_term", &LossBreakdown::softmax_term)
        .def_readonly("gbh_term", &LossBreakdown::gbh_term)
        .def_readonly("total", &LossBreakdown::total);

    m.def("pairwise_distances",
          [](const Matrix& x, const DistanceOptions& o) { return pairwise_distances(x, o); },
          py::arg("embeddings"), py::arg("options") = DistanceOptions{});
    m.def("gbh_terms", &gbh_terms, py::arg("dist"), py::arg("labels"), py::arg("k"), py::arg("p"));
    m.def("batch_hard_loss",
          [](const Matrix& x, const Labels& y, double margin, const DistanceOptions& o) {
              return batch_hard_loss({x, y}, margin, o);
          },
          py::arg("embeddings"), py::arg("labels"), py::arg("margin"), py::arg("options") = DistanceOptions{});
    m.def("gbh_loss",
          [](const Matrix& x, const Labels& y, const HyperParams& w, const DistanceOptions& o) {
              return gbh_loss({x, y}, w, o);
          },
          py::arg("embeddings"), py::arg("labels"), py::arg("w"), py::arg("options") = DistanceOptions{});
    m.def("gbh_loss_grad",
          [](const Matrix& x, const Labels& y, const HyperParams& w, const DistanceOptions& o) {
              return gbh_loss_grad({x, y}, w, o);
          },
          py::arg("embeddings"), py::arg("labels"), py::arg("w"), py::arg("options") = DistanceOptions{});
    m.def("cross_entropy_loss", &cross_entropy_loss, py::arg("logits"), py::arg("labels"));
    m.def("composite_loss",
          [](const Matrix& x, const Labels& y, const Matrix& logits, const HyperParams& w,
             const DistanceOptions& o) { return composite_loss({x, y}, logits, w, o); },
          py::arg("embeddings"), py::arg("labels"), py::arg("logits"), py::arg("w"),
          py::arg("options") = DistanceOptions{});

    m.def("expected_improvement", py::overload_cast<double, double, double>(&expected_improvement),
          py::arg("mean"), py::arg("variance"), py::arg("best_value"));
    m.def("drop_rate_objective", &drop_rate_objective, py::arg("first_half_mean"), py::arg("second_half_mean"),
          py::arg("expected_drop") = 0.15);
    m.def("gp_posterior",
          [](const std::vector<HyperParams>& points, const std::vector<double>& values, const HyperParams& w) {
              const auto state = GPState::from_observations(points, values, estimate_bandwidth(points));
              const auto post = gp_posterior(state, w);
              return py::make_tuple(post.mean, post.variance);
          },
          py::arg("points"), py::arg("values"), py::arg("candidate"));
    m.def("tune_quadratic",
          [](std::uint64_t seed, int rounds, int pool_size, int initial_design) {
              TuneSettings s;
              s.rounds = rounds;
              s.pool_size = pool_size;
              s.initial_design = initial_design;
              Rng rng(derive_seed(seed, 3));
              const QuadraticBowl bowl{s.box};
              const auto trace = minimize(bowl, s, rng);
              std::vector<double> best;
              for (const auto& t : trace) best.push_back(t.best_so_far);
              return py::make_tuple(best, bowl.minimum());
          },
          py::arg("seed") = 0, py::arg("rounds") = 30, py::arg("pool_size") = 256, py::arg("initial_design") = 8);

    py::class_<OptimizerConfig>(m, "OptimizerConfig").def(py::init<>());
    m.def("lr_schedule", &lr_schedule, py::arg("epoch"), py::arg("config") = OptimizerConfig{});
    m.def("beta1_at", &beta1_at, py::arg("epoch"), py::arg("config") = OptimizerConfig{});

    m.def("evaluate",
          [](const Matrix& q, const Labels& ql, const Matrix& g, const Labels& gl) {
              const auto r = evaluate({q, ql, g, gl});
              py::dict d;
              d["cmc"] = r.cmc;
              d["rank1"] = r.rank1;
              d["map"] = r.map;
              d["evaluated_queries"] = r.evaluated_queries;
              d["excluded_queries"] = r.excluded_queries;
              return d;
          },
          py::arg("query"), py::arg("query_labels"), py::arg("gallery"), py::arg("gallery_labels"));
    m.def("pca_reduce", [](const Matrix& x, int d) { return pca_reduce(x, d).projected; }, py::arg("embeddings"),
          py::arg("target_dim"));

    m.def("generate_dataset",
          [](int n_identities, int samples_per_identity, int dim, double spread, std::uint64_t seed) {
              SynthSpec s;
              s.n_identities = n_identities;
              s.samples_per_identity = samples_per_identity;
              s.dim = dim;
              s.intra_spread = spread;
              s.seed = seed;
              const auto ds = generate(s);
              return py::make_tuple(ds.features, ds.labels);
          },
          py::arg("n_identities") = 16, py::arg("samples_per_identity") = 8, py::arg("dim") = 8,
          py::arg("intra_spread") = 0.1, py::arg("seed") = 0);

    m.def("cli",
          [](const std::vector<std::string>& args) {
              std::ostringstream out, err;
              const int code = cli::run(args, out, err);
              return py::make_tuple(code, out.str(), err.str());
          },
          py::arg("args"), "Runs a pla subcommand; returns (exit_status, stdout, stderr).");
}
