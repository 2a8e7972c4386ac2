#include "wavekit/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "wavekit/parallel.hpp"

namespace wavekit {

using nlohmann::json;

double squared_error(const VectorXd& beta_hat, const VectorXd& beta_star) {
  if (beta_hat.size() != beta_star.size()) {
    throw DimensionError("squared_error: vector lengths differ");
  }
  return (beta_hat - beta_star).squaredNorm();
}

SelectionMetrics selection_metrics(const VectorXd& beta_hat, const TrueModel& truth) {
  if (beta_hat.size() != truth.beta_star.size()) {
    throw DimensionError("selection_metrics: vector lengths differ");
  }
  SelectionMetrics m;
  long tp = 0, fp = 0;
  const long active = static_cast<long>(truth.active_set.size());
  const long inactive = static_cast<long>(beta_hat.size()) - active;
  std::size_t a = 0;
  bool exact = true;
  for (Eigen::Index l = 0; l < beta_hat.size(); ++l) {
    const bool is_active =
        a < truth.active_set.size() && truth.active_set[a] == static_cast<int>(l);
    if (is_active) ++a;
    const bool nonzero = beta_hat[l] != 0.0;
    if (nonzero && is_active) ++tp;
    if (nonzero && !is_active) ++fp;
    if (nonzero != is_active) exact = false;
  }
  m.exact = exact;
  m.tpr = active > 0 ? static_cast<double>(tp) / static_cast<double>(active) : 1.0;
  m.fpr = inactive > 0 ? static_cast<double>(fp) / static_cast<double>(inactive) : 0.0;
  return m;
}

namespace {

std::string fmt_double(double v) {
  char tmp[32];
  const auto res = std::to_chars(tmp, tmp + sizeof(tmp), v);
  return std::string(tmp, res.ptr);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

int line_of_offset(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

[[noreturn]] void field_error(const std::string& where, const std::string& field,
                              const std::string& what) {
  throw ConfigError("config field '" + field + "' (" + where + "): " + what);
}

template <typename T>
T get_field(const json& j, const char* field, const std::string& where) {
  const auto it = j.find(field);
  if (it == j.end()) field_error(where, field, "missing");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    field_error(where, field, e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* field, const std::string& where, T fallback) {
  const auto it = j.find(field);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    field_error(where, field, e.what());
  }
}

Example parse_example(const std::string& s, const std::string& where) {
  if (s == "linear") return Example::Linear;
  if (s == "logistic") return Example::Logistic;
  if (s == "poisson") return Example::Poisson;
  if (s == "huber") return Example::HuberLinear;
  field_error(where, "example", "expected linear|logistic|poisson|huber, got '" + s + "'");
}

Setting parse_setting(const std::string& s, const std::string& where) {
  if (s == "homogeneous") return Setting::Homogeneous;
  if (s == "heterogeneous") return Setting::Heterogeneous;
  field_error(where, "setting", "expected homogeneous|heterogeneous, got '" + s + "'");
}

CellConfig parse_cell(const json& j, std::size_t index) {
  CellConfig cell;
  const std::string where0 = "cell " + std::to_string(index);
  cell.name = get_or<std::string>(j, "name", where0, "cell" + std::to_string(index));
  const std::string& where = cell.name;

  cell.gen.example = parse_example(get_field<std::string>(j, "example", where), where);
  cell.gen.setting =
      parse_setting(get_or<std::string>(j, "setting", where, "homogeneous"), where);
  cell.gen.k = get_field<int>(j, "k", where);
  cell.gen.n_per_worker = get_field<long>(j, "n_per_worker", where);
  cell.gen.p = get_field<int>(j, "p", where);
  cell.gen.seed = get_or<std::uint64_t>(j, "seed", where, 0);
  cell.repetitions = get_or<int>(j, "repetitions", where, 1);
  if (cell.repetitions < 1) field_error(where, "repetitions", "must be >= 1");
  cell.methods = get_or<std::vector<std::string>>(j, "methods", where, {"wave", "ave"});
  for (const auto& m : cell.methods) {
    if (m != "wave" && m != "ave" && m != "ls") {
      field_error(where, "methods", "unknown method '" + m + "'");
    }
    if (m == "ls" && cell.gen.p > 200) {
      field_error(where, "methods", "the ls reference is guarded to p <= 200");
    }
  }

  cell.run.model = example_loss(cell.gen.example);
  if (j.contains("huber_a")) {
    cell.run.model = LossModel::huber(get_field<double>(j, "huber_a", where));
  }
  cell.run.worker.xi = get_or<double>(j, "xi", where, 1.0);
  const std::string tuning = get_or<std::string>(j, "tuning", where, "bic");
  if (tuning == "bic") {
    cell.run.worker.tuning = Tuning::bic();
  } else if (tuning == "cv") {
    cell.run.worker.tuning = Tuning::cv(get_or<int>(j, "cv_folds", where, 10));
  } else {
    field_error(where, "tuning", "expected bic|cv, got '" + tuning + "'");
  }
  if (j.contains("lambda_grid")) {
    const json& g = j.at("lambda_grid");
    cell.run.worker.lambda_grid.count = get_or<int>(g, "count", where, 50);
    cell.run.worker.lambda_grid.min_ratio = get_or<double>(g, "min_ratio", where, 1e-3);
  }
  if (j.contains("nu_grid")) {
    const json& g = j.at("nu_grid");
    cell.run.nu_grid.count = get_or<int>(g, "count", where, 100);
    cell.run.nu_grid.min_nu = get_or<double>(g, "min_nu", where, 1e-6);
  }
  if (j.contains("admm")) {
    const json& g = j.at("admm");
    AdmmConfig& a = cell.run.worker.admm;
    a.eta = get_or<double>(g, "eta", where, a.eta);
    a.primal_tol = get_or<double>(g, "primal_tol", where, a.primal_tol);
    a.max_outer_iter = get_or<int>(g, "max_outer_iter", where, a.max_outer_iter);
    a.newton_tol = get_or<double>(g, "newton_tol", where, a.newton_tol);
    a.max_newton_iter = get_or<int>(g, "max_newton_iter", where, a.max_newton_iter);
    a.curvature_floor = get_or<double>(g, "curvature_floor", where, a.curvature_floor);
  }
  cell.run.worker.ridge = get_or<double>(j, "ridge", where, -1.0);
  cell.run.ci_level = get_or<double>(j, "ci_level", where, 0.95);
  const std::string mode = get_or<std::string>(j, "mode", where, "in_process");
  if (mode == "in_process") {
    cell.run.mode = RunMode::InProcess;
  } else if (mode == "stream") {
    cell.run.mode = RunMode::Stream;
  } else {
    field_error(where, "mode", "expected in_process|stream, got '" + mode + "'");
  }
  cell.run.worker_parallelism = get_or<int>(j, "worker_parallelism", where, 1);
  cell.run.delta_from_wave = get_or<bool>(j, "delta_from_wave", where, false);
  return cell;
}

}  // namespace

BenchConfig parse_bench_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at line " +
                      std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  BenchConfig cfg;
  cfg.threads = get_or<int>(j, "threads", "root", 1);
  cfg.seed_offset = get_or<std::uint64_t>(j, "seed_offset", "root", 0);
  const auto it = j.find("cells");
  if (it == j.end() || !it->is_array() || it->empty()) {
    throw ConfigError("config field 'cells' (root): need a nonempty array");
  }
  std::size_t index = 0;
  for (const auto& c : *it) cfg.cells.push_back(parse_cell(c, index++));
  return cfg;
}

BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_bench_config(ss.str());
}

namespace {

struct RepOutcome {
  bool failed = false;
  std::string message;
  std::map<std::string, double> errors;
  std::map<std::string, SelectionMetrics> selection;
  std::map<std::string, double> wall;
};

RepOutcome run_repetition(const CellConfig& cell, std::uint64_t seed_offset, int rep) {
  using clock = std::chrono::steady_clock;
  RepOutcome out;
  GenConfig gen = cell.gen;
  gen.seed = gen.seed + seed_offset + static_cast<std::uint64_t>(rep);
  const GeneratedData data = generate(gen);

  const auto t0 = clock::now();
  const PipelineResult pipe = run_pipeline(data.shards, cell.run);
  const double pipeline_seconds = std::chrono::duration<double>(clock::now() - t0).count();

  for (const auto& method : cell.methods) {
    const auto m0 = clock::now();
    VectorXd estimate;
    if (method == "wave") {
      estimate = pipe.result.beta_sparse;
    } else if (method == "ave") {
      estimate = simple_average(pipe.summaries);
    } else {  // ls
      std::vector<std::pair<VectorXd, MatrixXd>> full;
      full.reserve(data.shards.size());
      for (std::size_t s = 0; s < data.shards.size(); ++s) {
        const VectorXd& beta_s = pipe.summaries[s].beta_hat;
        double ridge = cell.run.worker.ridge;
        if (ridge < 0.0) {
          ridge = default_sandwich_ridge(data.shards[s], cell.run.model, beta_s);
        }
        full.emplace_back(beta_s, sandwich_inverse_covariance(data.shards[s],
                                                              cell.run.model, beta_s,
                                                              ridge));
      }
      estimate = full_ls_reference(full, pipe.result.alpha);
    }
    out.errors[method] = squared_error(estimate, data.truth.beta_star);
    out.selection[method] = selection_metrics(estimate, data.truth);
    out.wall[method] = std::chrono::duration<double>(clock::now() - m0).count();
    if (method == "wave") out.wall[method] += pipeline_seconds;
  }
  return out;
}

}  // namespace

std::vector<CellReport> run_bench(const BenchConfig& cfg, std::ostream* progress) {
  std::vector<CellReport> reports;
  reports.reserve(cfg.cells.size());
  std::mutex progress_mutex;
  for (const auto& cell : cfg.cells) {
    CellReport report;
    report.config = cell;
    report.total_n = static_cast<long>(cell.gen.k) * cell.gen.n_per_worker;
    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(cell.repetitions));
    parallel_for(cell.repetitions, cfg.threads, [&](long rep) {
      auto& slot = outcomes[static_cast<std::size_t>(rep)];
      try {
        slot = run_repetition(cell, cfg.seed_offset, static_cast<int>(rep));
      } catch (const std::exception& e) {
        slot.failed = true;
        slot.message = e.what();
      }
      if (progress) {
        const std::scoped_lock lock(progress_mutex);
        (*progress) << cell.name << " rep " << rep << (slot.failed ? " FAILED" : " ok")
                    << "\n";
      }
    });

    for (const auto& method : cell.methods) {
      MethodStats stats;
      stats.method = method;
      double sum = 0.0;
      long exact = 0;
      double tpr = 0.0, fpr = 0.0;
      for (int r = 0; r < cell.repetitions; ++r) {
        const auto& o = outcomes[static_cast<std::size_t>(r)];
        if (o.failed) continue;
        const double err = o.errors.at(method);
        stats.errors.push_back(err);
        sum += err;
        const auto& sel = o.selection.at(method);
        exact += sel.exact ? 1 : 0;
        tpr += sel.tpr;
        fpr += sel.fpr;
        stats.wall_seconds += o.wall.at(method);
      }
      stats.completed = static_cast<int>(stats.errors.size());
      if (stats.completed > 0) {
        const double n = static_cast<double>(stats.completed);
        stats.error_mean = sum / n;
        double ss = 0.0;
        for (double e : stats.errors) {
          const double d = e - stats.error_mean;
          ss += d * d;
        }
        stats.error_std = stats.completed > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        stats.exact_rate = static_cast<double>(exact) / n;
        stats.tpr = tpr / n;
        stats.fpr = fpr / n;
      }
      report.methods.push_back(std::move(stats));
    }
    for (int r = 0; r < cell.repetitions; ++r) {
      const auto& o = outcomes[static_cast<std::size_t>(r)];
      if (o.failed) report.failures.push_back({r, o.message});
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

void write_report_csv(std::ostream& os, const std::vector<CellReport>& reports) {
  os << "cell,method,example,setting,k,p,n_per_worker,total_n,repetitions,completed,"
        "error_mean,error_std,exact_rate,tpr,fpr,wall_seconds\n";
  for (const auto& r : reports) {
    for (const auto& m : r.methods) {
      os << csv_escape(r.config.name) << ',' << m.method << ','
         << example_name(r.config.gen.example) << ',' << setting_name(r.config.gen.setting)
         << ',' << r.config.gen.k << ',' << r.config.gen.p << ','
         << r.config.gen.n_per_worker << ',' << r.total_n << ',' << r.config.repetitions
         << ',' << m.completed << ',' << fmt_double(m.error_mean) << ','
         << fmt_double(m.error_std) << ',' << fmt_double(m.exact_rate) << ','
         << fmt_double(m.tpr) << ',' << fmt_double(m.fpr) << ','
         << fmt_double(m.wall_seconds) << '\n';
    }
  }
}

std::string report_json(const BenchConfig& cfg, const std::vector<CellReport>& reports) {
  json root;
  root["threads"] = cfg.threads;
  root["seed_offset"] = cfg.seed_offset;
  json cells = json::array();
  for (const auto& r : reports) {
    json c;
    c["name"] = r.config.name;
    c["example"] = example_name(r.config.gen.example);
    c["setting"] = setting_name(r.config.gen.setting);
    c["k"] = r.config.gen.k;
    c["p"] = r.config.gen.p;
    c["n_per_worker"] = r.config.gen.n_per_worker;
    c["total_n"] = r.total_n;
    c["seed"] = r.config.gen.seed;
    c["repetitions"] = r.config.repetitions;
    json methods = json::array();
    for (const auto& m : r.methods) {
      json jm;
      jm["method"] = m.method;
      jm["completed"] = m.completed;
      jm["error_mean"] = m.error_mean;
      jm["error_std"] = m.error_std;
      jm["exact_rate"] = m.exact_rate;
      jm["tpr"] = m.tpr;
      jm["fpr"] = m.fpr;
      jm["wall_seconds"] = m.wall_seconds;
      jm["errors"] = m.errors;
      methods.push_back(std::move(jm));
    }
    c["methods"] = std::move(methods);
    json failures = json::array();
    for (const auto& f : r.failures) {
      failures.push_back({{"repetition", f.repetition}, {"message", f.message}});
    }
    c["failures"] = std::move(failures);
    cells.push_back(std::move(c));
  }
  root["cells"] = std::move(cells);
  return root.dump(2);
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

void emit_plot_data(const std::vector<CellReport>& reports, const std::string& out_dir) {
  if (reports.empty()) throw ConfigError("emit_plot_data needs at least one report");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);

  const std::string raw_path = (fs::path(out_dir) / "raw_errors.csv").string();
  std::ofstream raw(raw_path);
  if (!raw) throw IoError("cannot write " + raw_path);
  raw << "cell,method,repetition,error\n";
  // Rows sorted by (cell, method, repetition): reports keep cell order, and we
  // order methods lexicographically for stability.
  for (const auto& r : reports) {
    std::vector<const MethodStats*> methods;
    for (const auto& m : r.methods) methods.push_back(&m);
    std::sort(methods.begin(), methods.end(),
              [](const MethodStats* a, const MethodStats* b) {
                return a->method < b->method;
              });
    for (const auto* m : methods) {
      for (std::size_t rep = 0; rep < m->errors.size(); ++rep) {
        raw << csv_escape(r.config.name) << ',' << m->method << ',' << rep << ','
            << fmt_double(m->errors[rep]) << '\n';
      }
    }
  }
  raw.close();
  if (!raw) throw IoError("failed while writing " + raw_path);

  const std::string summary_path = (fs::path(out_dir) / "summary.dat").string();
  std::ofstream summary(summary_path);
  if (!summary) throw IoError("cannot write " + summary_path);
  summary << "# cell method min q1 median q3 max mean\n";
  for (const auto& r : reports) {
    std::vector<const MethodStats*> methods;
    for (const auto& m : r.methods) methods.push_back(&m);
    std::sort(methods.begin(), methods.end(),
              [](const MethodStats* a, const MethodStats* b) {
                return a->method < b->method;
              });
    for (const auto* m : methods) {
      std::vector<double> sorted = m->errors;
      std::sort(sorted.begin(), sorted.end());
      if (sorted.empty()) continue;
      summary << '"' << r.config.name << "\" " << m->method << ' '
              << fmt_double(sorted.front()) << ' ' << fmt_double(quantile_sorted(sorted, 0.25))
              << ' ' << fmt_double(quantile_sorted(sorted, 0.5)) << ' '
              << fmt_double(quantile_sorted(sorted, 0.75)) << ' '
              << fmt_double(sorted.back()) << ' ' << fmt_double(m->error_mean) << '\n';
    }
  }
  summary.close();
  if (!summary) throw IoError("failed while writing " + summary_path);
}

}  // namespace wavekit
