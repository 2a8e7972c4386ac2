#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "wavekit/datagen.hpp"
#include "wavekit/runtime.hpp"

namespace wavekit {

// ||beta_hat - beta_star||_2^2.
double squared_error(const VectorXd& beta_hat, const VectorXd& beta_star);

struct SelectionMetrics {
  bool exact = false;
  double tpr = 0.0;
  double fpr = 0.0;
};

// Support comparison with exact-zero semantics.
SelectionMetrics selection_metrics(const VectorXd& beta_hat, const TrueModel& truth);

struct CellConfig {
  std::string name;
  GenConfig gen;
  RunConfig run;
  int repetitions = 1;
  std::vector<std::string> methods = {"wave", "ave"};  // "ls" opt-in, p <= 200
};

struct BenchConfig {
  std::vector<CellConfig> cells;
  int threads = 1;
  std::uint64_t seed_offset = 0;
};

struct MethodStats {
  std::string method;
  int completed = 0;
  double error_mean = 0.0;
  double error_std = 0.0;  // sample standard deviation
  double exact_rate = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double wall_seconds = 0.0;
  std::vector<double> errors;  // per completed repetition, in repetition order
};

struct RepFailure {
  int repetition = 0;
  std::string message;
};

struct CellReport {
  CellConfig config;
  long total_n = 0;
  std::vector<MethodStats> methods;
  std::vector<RepFailure> failures;
};

// Parses the JSON grid configuration; errors carry line and field context.
BenchConfig parse_bench_config(const std::string& text);
BenchConfig load_bench_config(const std::string& path);

// Runs every cell x repetition; per-repetition failures are recorded in the
// report and do not abort the cell.
std::vector<CellReport> run_bench(const BenchConfig& cfg, std::ostream* progress = nullptr);

void write_report_csv(std::ostream& os, const std::vector<CellReport>& reports);
std::string report_json(const BenchConfig& cfg, const std::vector<CellReport>& reports);

// Tidy per-repetition errors (cell, method, repetition, error) plus a
// gnuplot-ready five-number summary per cell x method. Rewriting the same
// reports yields byte-identical files.
void emit_plot_data(const std::vector<CellReport>& reports, const std::string& out_dir);

}  // namespace wavekit
