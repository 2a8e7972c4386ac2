#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "wavekit/bench.hpp"

using namespace wavekit;

namespace {

const char* kMinimalConfig = R"({
  "threads": 1,
  "cells": [
    {
      "name": "tiny",
      "example": "linear",
      "setting": "homogeneous",
      "k": 2, "n_per_worker": 40, "p": 5,
      "seed": 7, "repetitions": 2,
      "lambda_grid": {"count": 20, "min_ratio": 1e-3}
    }
  ]
})";

}  // namespace

TEST_SUITE_BEGIN("bench");

TEST_CASE("squared_error") {
  VectorXd a(3), b(3);
  a << 1, 2, 3;
  b = a;
  CHECK(squared_error(a, b) == 0.0);
  b[0] += 0.1;
  CHECK(squared_error(a, b) == doctest::Approx(0.01).epsilon(1e-12));

  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd u(10), v(10);
  for (int i = 0; i < 10; ++i) {
    u[i] = normal(gen);
    v[i] = normal(gen);
  }
  double loop = 0.0;
  for (int i = 0; i < 10; ++i) loop += (u[i] - v[i]) * (u[i] - v[i]);
  CHECK(squared_error(u, v) == doctest::Approx(loop).epsilon(1e-12));
  CHECK_THROWS_AS(squared_error(u, VectorXd::Zero(3)), DimensionError);
}

TEST_CASE("selection_metrics") {
  VectorXd beta_star = VectorXd::Zero(10);
  beta_star[0] = 3.0;
  beta_star[1] = 1.5;
  beta_star[4] = 2.0;
  const TrueModel truth = TrueModel::from_beta(beta_star);

  SUBCASE("perfect support") {
    const auto m = selection_metrics(beta_star, truth);
    CHECK(m.exact);
    CHECK(m.tpr == 1.0);
    CHECK(m.fpr == 0.0);
  }
  SUBCASE("all-zero estimate") {
    const auto m = selection_metrics(VectorXd::Zero(10), truth);
    CHECK(!m.exact);
    CHECK(m.tpr == 0.0);
    CHECK(m.fpr == 0.0);
  }
  SUBCASE("one extra nonzero") {
    VectorXd beta = beta_star;
    beta[7] = 0.01;
    const auto m = selection_metrics(beta, truth);
    CHECK(!m.exact);
    CHECK(m.tpr == 1.0);
    CHECK(m.fpr == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
  }
}

TEST_CASE("config parsing") {
  SUBCASE("minimal config") {
    const BenchConfig cfg = parse_bench_config(kMinimalConfig);
    REQUIRE(cfg.cells.size() == 1);
    CHECK(cfg.cells[0].name == "tiny");
    CHECK(cfg.cells[0].gen.k == 2);
    CHECK(cfg.cells[0].methods == std::vector<std::string>{"wave", "ave"});
  }
  SUBCASE("parse errors name the line") {
    CHECK_THROWS_WITH_AS(parse_bench_config("{\n  \"cells\": [,]\n}"),
                         doctest::Contains("line 2"), ConfigError);
  }
  SUBCASE("missing fields name the field") {
    CHECK_THROWS_WITH_AS(parse_bench_config(R"({"cells":[{"example":"linear"}]})"),
                         doctest::Contains("'k'"), ConfigError);
  }
  SUBCASE("unknown method flagged") {
    CHECK_THROWS_WITH_AS(
        parse_bench_config(
            R"({"cells":[{"example":"linear","k":1,"n_per_worker":10,"p":5,"methods":["csl"]}]})"),
        doctest::Contains("csl"), ConfigError);
  }
  SUBCASE("ls is guarded to small p") {
    CHECK_THROWS_WITH_AS(
        parse_bench_config(
            R"({"cells":[{"example":"linear","k":1,"n_per_worker":10,"p":500,"methods":["ls"]}]})"),
        doctest::Contains("ls"), ConfigError);
  }
}

TEST_CASE("run_bench produces a structurally sound report") {
  const BenchConfig cfg = parse_bench_config(kMinimalConfig);
  const auto reports = run_bench(cfg);
  REQUIRE(reports.size() == 1);
  const CellReport& r = reports[0];
  CHECK(r.failures.empty());
  REQUIRE(r.methods.size() == 2);
  for (const auto& m : r.methods) {
    CHECK(m.completed == 2);
    CHECK(m.errors.size() == 2);
    CHECK(m.error_mean > 0.0);
  }

  // CSV: header plus one row per cell x method.
  std::stringstream csv;
  write_report_csv(csv, reports);
  long lines = 0;
  for (char c : csv.str()) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 3);

  // JSON echoes the grid and parses back.
  const std::string js = report_json(cfg, reports);
  CHECK(js.find("\"tiny\"") != std::string::npos);
  CHECK(js.find("\"errors\"") != std::string::npos);

  // Means and stds are recomputable from the reported raw errors.
  for (const auto& m : r.methods) {
    double mean = 0.0;
    for (double e : m.errors) mean += e;
    mean /= static_cast<double>(m.errors.size());
    CHECK(std::abs(mean - m.error_mean) <= 1e-12);
    double ss = 0.0;
    for (double e : m.errors) ss += (e - mean) * (e - mean);
    const double sd = std::sqrt(ss / (static_cast<double>(m.errors.size()) - 1.0));
    CHECK(std::abs(sd - m.error_std) <= 1e-12);
  }
}

TEST_CASE("ls reference method runs when requested") {
  BenchConfig cfg = parse_bench_config(kMinimalConfig);
  cfg.cells[0].methods = {"wave", "ave", "ls"};
  cfg.cells[0].repetitions = 1;
  const auto reports = run_bench(cfg);
  REQUIRE(reports[0].methods.size() == 3);
  for (const auto& m : reports[0].methods) CHECK(m.completed == 1);
}

TEST_CASE("emit_plot_data is sorted and byte-stable") {
  const BenchConfig cfg = [] {
    BenchConfig c = parse_bench_config(kMinimalConfig);
    c.cells[0].repetitions = 3;
    return c;
  }();
  const auto reports = run_bench(cfg);

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "wavekit_plot_test";
  fs::remove_all(dir);
  emit_plot_data(reports, dir.string());

  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string raw1 = slurp(dir / "raw_errors.csv");
  long lines = 0;
  for (char c : raw1) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 1 + 2 * 3);  // header + methods x repetitions

  // ave rows precede wave rows (lexicographic), repetitions ascending.
  CHECK(raw1.find("tiny,ave,0,") < raw1.find("tiny,ave,1,"));
  CHECK(raw1.find("tiny,ave,2,") < raw1.find("tiny,wave,0,"));

  const std::string summary1 = slurp(dir / "summary.dat");
  emit_plot_data(reports, dir.string());
  CHECK(slurp(dir / "raw_errors.csv") == raw1);
  CHECK(slurp(dir / "summary.dat") == summary1);
  fs::remove_all(dir);
}

TEST_SUITE_END();
