#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wavekit/bench.hpp"

namespace fs = std::filesystem;
using namespace wavekit;

namespace {

LossModel parse_family(const std::string& name, double huber_a) {
  if (name == "lsq" || name == "linear" || name == "least_squares") {
    return LossModel::least_squares();
  }
  if (name == "huber") return LossModel::huber(huber_a);
  if (name == "logistic") return LossModel::logistic();
  if (name == "poisson") return LossModel::poisson();
  throw ConfigError("unknown family '" + name + "' (lsq|huber|logistic|poisson)");
}

int cmd_bench(const std::string& config_path, const std::string& out_dir, int threads,
              std::uint64_t seed_offset, bool quiet) {
  BenchConfig cfg = load_bench_config(config_path);
  if (threads > 0) cfg.threads = threads;
  cfg.seed_offset += seed_offset;

  std::error_code ec;
  fs::create_directories(out_dir, ec);

  const auto reports = run_bench(cfg, quiet ? nullptr : &std::cerr);

  const std::string csv_path = (fs::path(out_dir) / "report.csv").string();
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write " + csv_path);
  write_report_csv(csv, reports);

  const std::string json_path = (fs::path(out_dir) / "report.json").string();
  std::ofstream js(json_path);
  if (!js) throw IoError("cannot write " + json_path);
  js << report_json(cfg, reports) << "\n";

  emit_plot_data(reports, out_dir);

  long failures = 0;
  for (const auto& r : reports) {
    failures += static_cast<long>(r.failures.size());
    for (const auto& m : r.methods) {
      std::cout << r.config.name << " " << m.method << ": mean " << m.error_mean
                << " std " << m.error_std << " exact " << m.exact_rate << " ("
                << m.completed << "/" << r.config.repetitions << " reps)\n";
    }
  }
  if (failures > 0) {
    std::cout << failures << " repetition(s) failed; see report.json\n";
  }
  std::cout << "wrote " << csv_path << ", " << json_path << ", plot data in " << out_dir
            << "\n";
  return 0;  // per-repetition failures are recorded, not fatal
}

int cmd_simulate(const CellConfig& cell, std::uint64_t seed_offset) {
  BenchConfig cfg;
  cfg.cells = {cell};
  cfg.threads = 1;
  cfg.seed_offset = seed_offset;
  const auto reports = run_bench(cfg);
  const auto& r = reports.front();
  const TrueModel truth = true_beta(cell.gen.example, cell.gen.p);

  std::cout << "cell " << cell.name << ": example " << example_name(cell.gen.example)
            << ", setting " << setting_name(cell.gen.setting) << ", K " << cell.gen.k
            << ", n_j " << cell.gen.n_per_worker << ", p " << cell.gen.p << ", N "
            << r.total_n << "\n";
  std::cout << "true active set (1-based):";
  for (int l : truth.active_set) std::cout << ' ' << (l + 1);
  std::cout << "\n";
  for (const auto& m : r.methods) {
    std::cout << "  " << m.method << ": mean error " << m.error_mean << ", std "
              << m.error_std << ", exact-support rate " << m.exact_rate << ", tpr "
              << m.tpr << ", fpr " << m.fpr << ", wall " << m.wall_seconds << "s\n";
    for (std::size_t i = 0; i < m.errors.size(); ++i) {
      std::cout << "    rep " << i << ": " << m.errors[i] << "\n";
    }
  }
  for (const auto& f : r.failures) {
    std::cout << "  rep " << f.repetition << " FAILED: " << f.message << "\n";
  }
  return r.failures.empty() ? 0 : 1;
}

int cmd_solve(const std::string& csv_path, const std::string& family, double huber_a,
              double lambda, double xi, bool adaptive) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open " + csv_path);
  const DataShard shard = read_shard_csv(in);
  const LossModel model = parse_family(family, huber_a);

  AdmmConfig cfg;
  VectorXd beta;
  if (adaptive) {
    LocalFit fit = fit_local(shard, model, xi, VectorXd(), cfg);
    std::cout << "adaptive fit, lambda " << fit.lambda
              << (fit.all_excluded ? " (pre-estimate empty: zero model)" : "") << "\n";
    beta = fit.beta;
  } else {
    beta = solve_weighted_l1(shard, model, lambda, VectorXd::Ones(shard.p()), cfg);
    std::cout << "lasso fit at lambda " << lambda << "\n";
  }
  std::cout << "n " << shard.n() << ", p " << shard.p() << ", nonzeros "
            << support_of(beta).size() << "\n";
  for (int l : support_of(beta)) {
    std::cout << "  beta[" << (l + 1) << "] = " << beta[l] << "\n";
  }
  return 0;
}

int cmd_gen(const GenConfig& gen, const std::string& out_dir) {
  const GeneratedData data = generate(gen);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  for (const auto& shard : data.shards) {
    char name[32];
    std::snprintf(name, sizeof(name), "shard_%03d.csv", shard.worker_id);
    const std::string path = (fs::path(out_dir) / name).string();
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    write_shard_csv(os, shard);
  }
  std::cout << "wrote " << data.shards.size() << " shard file(s) to " << out_dir << "\n";
  return 0;
}

int cmd_protocol_echo(const std::string& in_path, const std::string& out_path) {
  std::istream* in = &std::cin;
  std::ifstream fin;
  if (!in_path.empty()) {
    fin.open(in_path);
    if (!fin) throw IoError("cannot open " + in_path);
    in = &fin;
  }
  std::ostream* out = &std::cout;
  std::ofstream fout;
  if (!out_path.empty()) {
    fout.open(out_path);
    if (!fout) throw IoError("cannot write " + out_path);
    out = &fout;
  }
  const auto summaries = read_summaries(*in);
  write_summaries(*out, summaries);
  std::cerr << "echoed " << summaries.size() << " message(s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wave: distributed sparse regression via weighted-average aggregation"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "run an experiment grid from a JSON config");
  std::string config_path, out_dir = "bench_out";
  int threads = 0;
  std::uint64_t seed_offset = 0;
  bool quiet = false;
  bench->add_option("--config", config_path, "JSON grid configuration")->required();
  bench->add_option("--out-dir", out_dir, "output directory");
  bench->add_option("--threads", threads, "repetition parallelism (overrides config)");
  bench->add_option("--seed-offset", seed_offset, "added to every cell seed");
  bench->add_flag("--quiet", quiet, "suppress per-repetition progress");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run one cell verbosely");
  CellConfig cell;
  cell.name = "simulate";
  std::string sim_example = "linear", sim_setting = "homogeneous", sim_tuning = "bic";
  std::uint64_t sim_seed = 0, sim_seed_offset = 0;
  sim->add_option("--example", sim_example, "linear|logistic|poisson|huber");
  sim->add_option("--setting", sim_setting, "homogeneous|heterogeneous");
  sim->add_option("--k", cell.gen.k, "number of workers")->required();
  sim->add_option("--n-per-worker", cell.gen.n_per_worker, "rows per worker")->required();
  sim->add_option("--p", cell.gen.p, "dimension")->required();
  sim->add_option("--seed", sim_seed, "base seed");
  sim->add_option("--seed-offset", sim_seed_offset, "added to the seed");
  sim->add_option("--repetitions", cell.repetitions, "repetitions");
  sim->add_option("--xi", cell.run.worker.xi, "adaptive weight exponent");
  sim->add_option("--tuning", sim_tuning, "bic|cv");
  sim->add_option("--cv-folds", cell.run.worker.tuning.folds, "folds for cv tuning");
  sim->add_option("--lambda-count", cell.run.worker.lambda_grid.count, "lambda grid size");
  sim->add_option("--threads", threads, "unused placeholder for symmetry");
  std::vector<std::string> sim_methods;
  sim->add_option("--methods", sim_methods, "subset of wave|ave|ls");

  // solve
  auto* solve = app.add_subcommand("solve", "fit one shard at one lambda (debugging)");
  std::string solve_csv, solve_family = "lsq";
  double solve_lambda = 0.0, solve_huber_a = 1.345, solve_xi = 1.0;
  bool solve_adaptive = false;
  solve->add_option("--csv", solve_csv, "shard CSV (y,x1..xp)")->required();
  solve->add_option("--family", solve_family, "lsq|huber|logistic|poisson");
  solve->add_option("--huber-a", solve_huber_a, "huber threshold");
  solve->add_option("--lambda", solve_lambda, "penalty level");
  solve->add_flag("--adaptive", solve_adaptive, "run the full local adaptive fit");
  solve->add_option("--xi", solve_xi, "adaptive weight exponent");

  // gen
  auto* gen = app.add_subcommand("gen", "emit synthetic shards as CSV");
  GenConfig gen_cfg;
  std::string gen_example = "linear", gen_setting = "homogeneous", gen_out = "shards";
  gen->add_option("--example", gen_example, "linear|logistic|poisson|huber");
  gen->add_option("--setting", gen_setting, "homogeneous|heterogeneous");
  gen->add_option("--k", gen_cfg.k, "number of workers")->required();
  gen->add_option("--n-per-worker", gen_cfg.n_per_worker, "rows per worker")->required();
  gen->add_option("--p", gen_cfg.p, "dimension")->required();
  gen->add_option("--seed", gen_cfg.seed, "seed");
  gen->add_option("--out-dir", gen_out, "output directory");

  // protocol-echo
  auto* echo = app.add_subcommand("protocol-echo", "round-trip a summary stream");
  std::string echo_in, echo_out;
  echo->add_option("--in", echo_in, "input file (default stdin)");
  echo->add_option("--out", echo_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench) return cmd_bench(config_path, out_dir, threads, seed_offset, quiet);
    if (*sim) {
      auto parse_ex = [](const std::string& s) {
        if (s == "linear") return Example::Linear;
        if (s == "logistic") return Example::Logistic;
        if (s == "poisson") return Example::Poisson;
        if (s == "huber") return Example::HuberLinear;
        throw ConfigError("unknown example '" + s + "'");
      };
      cell.gen.example = parse_ex(sim_example);
      cell.gen.setting = sim_setting == "heterogeneous" ? Setting::Heterogeneous
                                                        : Setting::Homogeneous;
      cell.gen.seed = sim_seed;
      cell.run.model = example_loss(cell.gen.example);
      cell.run.worker.tuning.method =
          sim_tuning == "cv" ? TuningMethod::KFoldCV : TuningMethod::LocalBIC;
      if (!sim_methods.empty()) cell.methods = sim_methods;
      return cmd_simulate(cell, sim_seed_offset);
    }
    if (*solve) {
      return cmd_solve(solve_csv, solve_family, solve_huber_a, solve_lambda, solve_xi,
                       solve_adaptive);
    }
    if (*gen) {
      auto parse_ex = [](const std::string& s) {
        if (s == "linear") return Example::Linear;
        if (s == "logistic") return Example::Logistic;
        if (s == "poisson") return Example::Poisson;
        if (s == "huber") return Example::HuberLinear;
        throw ConfigError("unknown example '" + s + "'");
      };
      gen_cfg.example = parse_ex(gen_example);
      gen_cfg.setting = gen_setting == "heterogeneous" ? Setting::Heterogeneous
                                                       : Setting::Homogeneous;
      return cmd_gen(gen_cfg, gen_out);
    }
    if (*echo) return cmd_protocol_echo(echo_in, echo_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
