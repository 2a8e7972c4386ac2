#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wavekit/bench.hpp"
#include "wavekit/datagen.hpp"
#include "wavekit/protocol.hpp"
#include "wavekit/runtime.hpp"

namespace py = pybind11;
using namespace wavekit;

namespace {

LossModel model_from_name(const std::string& name, double huber_a) {
  if (name == "least_squares" || name == "lsq" || name == "linear") {
    return LossModel::least_squares();
  }
  if (name == "huber") return LossModel::huber(huber_a);
  if (name == "logistic") return LossModel::logistic();
  if (name == "poisson") return LossModel::poisson();
  throw ConfigError("unknown family '" + name +
                    "' (least_squares|huber|logistic|poisson)");
}

Example example_from_name(const std::string& name) {
  if (name == "linear") return Example::Linear;
  if (name == "logistic") return Example::Logistic;
  if (name == "poisson") return Example::Poisson;
  if (name == "huber") return Example::HuberLinear;
  throw ConfigError("unknown example '" + name + "'");
}

Setting setting_from_name(const std::string& name) {
  if (name == "homogeneous") return Setting::Homogeneous;
  if (name == "heterogeneous") return Setting::Heterogeneous;
  throw ConfigError("unknown setting '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Distributed sparse regression: local adaptive-lasso fits, two-vector "
            "summaries, inverse-variance weighted aggregation with adaptive-L1 "
            "sparsification.";

  py::register_exception<Error>(m, "WavekitError");

  py::class_<LossModel>(m, "LossModel")
      .def(py::init([](const std::string& family, double huber_a) {
             return model_from_name(family, huber_a);
           }),
           py::arg("family"), py::arg("huber_a") = 1.345)
      .def_property_readonly("family",
                             [](const LossModel& mdl) { return family_name(mdl.family); })
      .def_readonly("huber_a", &LossModel::huber_a);

  py::class_<DataShard>(m, "DataShard")
      .def(py::init([](int worker_id, MatrixXd x, VectorXd y) {
             DataShard s;
             s.worker_id = worker_id;
             s.x = std::move(x);
             s.y = std::move(y);
             return s;
           }),
           py::arg("worker_id"), py::arg("x"), py::arg("y"))
      .def_readonly("worker_id", &DataShard::worker_id)
      .def_readonly("x", &DataShard::x)
      .def_readonly("y", &DataShard::y);

  py::class_<LocalSummary>(m, "LocalSummary")
      .def(py::init([](int worker_id, long n, VectorXd beta, VectorXd lambda_diag) {
             return LocalSummary{worker_id, n, std::move(beta), std::move(lambda_diag)};
           }),
           py::arg("worker_id"), py::arg("n"), py::arg("beta_hat"),
           py::arg("lambda_diag"))
      .def_readonly("worker_id", &LocalSummary::worker_id)
      .def_readonly("n", &LocalSummary::n_j)
      .def_readonly("beta_hat", &LocalSummary::beta_hat)
      .def_readonly("lambda_diag", &LocalSummary::lambda_diag);

  py::class_<AggregateResult>(m, "AggregateResult")
      .def_readonly("beta_wave", &AggregateResult::beta_wave)
      .def_readonly("beta_sparse", &AggregateResult::beta_sparse)
      .def_readonly("nu_hat", &AggregateResult::nu_hat)
      .def_readonly("support", &AggregateResult::support)
      .def_readonly("ci_halfwidth", &AggregateResult::ci_halfwidth)
      .def_readonly("alpha", &AggregateResult::alpha);

  m.def(
      "loss_eval",
      [](const LossModel& model, double y, double z) {
        const LossEval e = loss_eval(model, y, z);
        return py::make_tuple(e.value, e.d1, e.d2);
      },
      py::arg("model"), py::arg("y"), py::arg("z"),
      "Loss value with first and second derivatives in the linear predictor.");

  m.def("soft_threshold", &soft_threshold, py::arg("x"), py::arg("t"));

  m.def(
      "solve_weighted_l1",
      [](const DataShard& shard, const LossModel& model, double lambda,
         const VectorXd& weights, const VectorXd& init, double primal_tol,
         int max_outer_iter) {
        AdmmConfig cfg;
        cfg.primal_tol = primal_tol;
        cfg.max_outer_iter = max_outer_iter;
        if (init.size() == 0) return solve_weighted_l1(shard, model, lambda, weights, cfg);
        return solve_weighted_l1(shard, model, lambda, weights, cfg, init);
      },
      py::arg("shard"), py::arg("model"), py::arg("lam"), py::arg("weights"),
      py::arg("init") = VectorXd(), py::arg("primal_tol") = 1e-6,
      py::arg("max_outer_iter") = 5000,
      "ADMM solve of (1/n) sum L + lam * sum w_k |beta_k|.");

  m.def(
      "fit_local",
      [](const DataShard& shard, const LossModel& model, double xi, int grid_count,
         double grid_min_ratio, const std::string& tuning, int cv_folds) {
        WorkerOptions opt;
        opt.xi = xi;
        opt.lambda_grid = {grid_count, grid_min_ratio};
        opt.tuning = tuning == "cv" ? Tuning::cv(cv_folds) : Tuning::bic();
        LocalFit fit = fit_local(shard, model, xi, VectorXd(), opt.admm, opt.tuning,
                                 VectorXd(), opt.lambda_grid);
        return py::make_tuple(fit.beta, fit.lambda, fit.all_excluded);
      },
      py::arg("shard"), py::arg("model"), py::arg("xi") = 1.0,
      py::arg("grid_count") = 50, py::arg("grid_min_ratio") = 1e-3,
      py::arg("tuning") = "bic", py::arg("cv_folds") = 10,
      "Local adaptive-lasso fit; returns (beta, lambda, all_excluded).");

  m.def(
      "local_summary",
      [](const DataShard& shard, const LossModel& model, double xi,
         const std::string& tuning, int cv_folds) {
        WorkerOptions opt;
        opt.xi = xi;
        opt.tuning = tuning == "cv" ? Tuning::cv(cv_folds) : Tuning::bic();
        return compute_local_summary(shard, model, opt);
      },
      py::arg("shard"), py::arg("model"), py::arg("xi") = 1.0,
      py::arg("tuning") = "bic", py::arg("cv_folds") = 10,
      "One worker's full pipeline: local fit plus precision diagonal.");

  m.def("estimate_lambda_diag", &estimate_lambda_diag, py::arg("shard"),
        py::arg("model"), py::arg("beta_hat"), py::arg("ridge") = 0.0,
        py::arg("clamped") = nullptr);

  m.def("simple_average", &simple_average, py::arg("summaries"));

  m.def(
      "wave_point",
      [](const std::vector<LocalSummary>& summaries) {
        auto [beta, var] = wave_point(summaries);
        return py::make_tuple(beta, var.v_diag, var.var_wave);
      },
      py::arg("summaries"),
      "Inverse-variance weighted combination; returns (beta, v_diag, var_wave).");

  m.def(
      "wave_sparse",
      [](const VectorXd& beta_wave, const VectorXd& v_diag, const VectorXd& pilot,
         double xi, double nu) {
        return wave_sparse(beta_wave, v_diag, delta_weights(pilot, xi), nu);
      },
      py::arg("beta_wave"), py::arg("v_diag"), py::arg("pilot"), py::arg("xi"),
      py::arg("nu"));

  m.def(
      "aggregate",
      [](const std::vector<LocalSummary>& summaries, const LossModel& model, double xi,
         double ci_level) {
        RunConfig cfg;
        cfg.model = model;
        cfg.worker.xi = xi;
        cfg.ci_level = ci_level;
        return aggregate_summaries(summaries, cfg);
      },
      py::arg("summaries"), py::arg("model"), py::arg("xi") = 1.0,
      py::arg("ci_level") = 0.95,
      "Master-side ensembling of collected summaries.");

  m.def(
      "run_pipeline",
      [](const std::vector<DataShard>& shards, const LossModel& model, double xi,
         const std::string& tuning, int cv_folds, const std::string& mode,
         int worker_parallelism, double ci_level) {
        RunConfig cfg;
        cfg.model = model;
        cfg.worker.xi = xi;
        cfg.worker.tuning = tuning == "cv" ? Tuning::cv(cv_folds) : Tuning::bic();
        cfg.mode = mode == "stream" ? RunMode::Stream : RunMode::InProcess;
        cfg.worker_parallelism = worker_parallelism;
        cfg.ci_level = ci_level;
        PipelineResult out = run_pipeline(shards, cfg);
        return py::make_tuple(out.result, out.summaries, out.stats.messages_sent);
      },
      py::arg("shards"), py::arg("model"), py::arg("xi") = 1.0,
      py::arg("tuning") = "bic", py::arg("cv_folds") = 10,
      py::arg("mode") = "in_process", py::arg("worker_parallelism") = 1,
      py::arg("ci_level") = 0.95,
      "Single-round distributed fit; returns (result, summaries, messages_sent).");

  m.def(
      "shard_dataset",
      [](const MatrixXd& x, const VectorXd& y, int k) { return shard_dataset(x, y, k); },
      py::arg("x"), py::arg("y"), py::arg("k"));

  m.def("encode_summary", &encode_summary, py::arg("summary"));
  m.def(
      "decode_summary", [](const std::string& line) { return decode_summary(line); },
      py::arg("line"));

  m.def(
      "generate",
      [](const std::string& example, const std::string& setting, int k, long n_per_worker,
         int p, std::uint64_t seed) {
        GenConfig cfg;
        cfg.example = example_from_name(example);
        cfg.setting = setting_from_name(setting);
        cfg.k = k;
        cfg.n_per_worker = n_per_worker;
        cfg.p = p;
        cfg.seed = seed;
        GeneratedData data = generate(cfg);
        return py::make_tuple(data.shards, data.truth.beta_star);
      },
      py::arg("example"), py::arg("setting") = "homogeneous", py::arg("k") = 1,
      py::arg("n_per_worker") = 100, py::arg("p") = 5, py::arg("seed") = 0,
      "Seeded synthetic shards; returns (shards, beta_star).");

  m.def("true_beta",
        [](const std::string& example, int p) {
          return true_beta(example_from_name(example), p).beta_star;
        },
        py::arg("example"), py::arg("p"));

  m.def("squared_error", &squared_error, py::arg("beta_hat"), py::arg("beta_star"));

  m.def(
      "selection_metrics",
      [](const VectorXd& beta_hat, const VectorXd& beta_star) {
        const SelectionMetrics s =
            selection_metrics(beta_hat, TrueModel::from_beta(beta_star));
        return py::make_tuple(s.exact, s.tpr, s.fpr);
      },
      py::arg("beta_hat"), py::arg("beta_star"),
      "Support comparison; returns (exact, tpr, fpr).");

  m.def("normal_quantile", &normal_quantile, py::arg("prob"));

  m.attr("WIRE_VERSION") = kWireVersion;
  m.attr("__version__") = "0.1.0";
}
