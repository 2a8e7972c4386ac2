// Acceptance suite: one checkable criterion per numbered entry, each printing
// a single PASS/FAIL line with the measured quantities. Run `wavekit_acceptance`
// with criterion numbers as arguments (none = all).

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wavekit/bench.hpp"
#include "wavekit/datagen.hpp"
#include "wavekit/detail/losseval.hpp"
#include "wavekit/protocol.hpp"
#include "wavekit/runtime.hpp"

using namespace wavekit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

bool bits_equal(const VectorXd& a, const VectorXd& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

// ---------------------------------------------------------------------------
// Criterion 1: solver vs refined exhaustive grid search (least squares, p<=3).

double penalized_objective(const MatrixXd& a, const VectorXd& b, double lambda,
                           const VectorXd& weights, const VectorXd& beta) {
  return 0.5 * beta.dot(a * beta) - b.dot(beta) +
         lambda * weights.cwiseProduct(beta.cwiseAbs()).sum();
}

// Exhaustive lattice scan at `res` within [center - half, center + half]^p,
// refined in three stages down to 1e-3 (the objective is convex, so each
// stage brackets the global lattice minimizer of the next).
VectorXd grid_search_oracle(const MatrixXd& a, const VectorXd& b, double lambda,
                            const VectorXd& weights) {
  const int p = static_cast<int>(b.size());
  VectorXd center = VectorXd::Zero(p);
  double half = 5.0;
  for (double res : {0.1, 0.01, 0.001}) {
    const long span = std::lround(half / res);
    std::vector<long> idx(static_cast<std::size_t>(p), -span);
    VectorXd best = center;
    double best_v = std::numeric_limits<double>::infinity();
    VectorXd point(p);
    for (;;) {
      for (int d = 0; d < p; ++d) {
        point[d] = center[d] + static_cast<double>(idx[static_cast<std::size_t>(d)]) * res;
      }
      const double v = penalized_objective(a, b, lambda, weights, point);
      if (v < best_v) {
        best_v = v;
        best = point;
      }
      int d = 0;
      for (; d < p; ++d) {
        auto& i = idx[static_cast<std::size_t>(d)];
        if (++i <= span) break;
        i = -span;
      }
      if (d == p) break;
    }
    center = best;
    half = 2.0 * res;  // next stage re-scans a couple of coarse cells
  }
  return center;
}

Outcome criterion_solver_oracle() {
  std::mt19937_64 gen(12345);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  AdmmConfig cfg;
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int p = 1 + static_cast<int>(gen() % 3);
    const int n = 10 + static_cast<int>(gen() % 21);
    DataShard shard;
    shard.x.resize(n, p);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) shard.x(i, j) = normal(gen);
    }
    // Coefficients sized so the penalized optimum stays inside the grid box.
    VectorXd beta_true(p);
    for (int j = 0; j < p; ++j) beta_true[j] = 5.0 * unif(gen) - 2.5;
    shard.y = shard.x * beta_true;
    for (int i = 0; i < n; ++i) shard.y[i] += normal(gen);
    VectorXd weights(p);
    for (int j = 0; j < p; ++j) weights[j] = 0.5 + 1.5 * unif(gen);
    const double lambda = 0.05 + 0.4 * unif(gen);

    const VectorXd beta =
        solve_weighted_l1(shard, LossModel::least_squares(), lambda, weights, cfg);

    const MatrixXd a = shard.x.transpose() * shard.x / static_cast<double>(n);
    const VectorXd b = shard.x.transpose() * shard.y / static_cast<double>(n);
    const VectorXd oracle = grid_search_oracle(a, b, lambda, weights);
    worst = std::max(worst, (beta - oracle).lpNorm<Eigen::Infinity>());
  }
  return {worst <= 2e-3,
          "max per-coordinate gap to the grid oracle " + fmt(worst) + " (<= 2e-3)"};
}

// ---------------------------------------------------------------------------
// Criterion 2: KKT stationarity across all four losses.

double kkt_violation(const DataShard& shard, const LossModel& model, double lambda,
                     const VectorXd& weights, const VectorXd& beta) {
  VectorXd d1, d2;
  detail::eval_derivatives(model, shard.y, shard.x * beta, d1, d2);
  const VectorXd g = shard.x.transpose() * d1 / static_cast<double>(shard.n());
  double worst = 0.0;
  for (Eigen::Index l = 0; l < beta.size(); ++l) {
    if (beta[l] != 0.0) {
      const double s = beta[l] > 0.0 ? 1.0 : -1.0;
      worst = std::max(worst, std::abs(g[l] + lambda * weights[l] * s));
    } else {
      worst = std::max(worst, std::max(0.0, std::abs(g[l]) - lambda * weights[l]));
    }
  }
  return worst;
}

Outcome criterion_kkt() {
  std::mt19937_64 gen(777);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  AdmmConfig cfg;
  double worst = 0.0;
  int count = 0;
  for (Family family : {Family::LeastSquares, Family::Huber, Family::Logistic,
                        Family::Poisson}) {
    const LossModel model = [&] {
      switch (family) {
        case Family::Huber: return LossModel::huber(1.345);
        case Family::Logistic: return LossModel::logistic();
        case Family::Poisson: return LossModel::poisson();
        default: return LossModel::least_squares();
      }
    }();
    for (int t = 0; t < 50; ++t) {
      const int n = 40 + static_cast<int>(gen() % 81);
      const int p = 3 + static_cast<int>(gen() % 8);
      DataShard shard;
      shard.x.resize(n, p);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) shard.x(i, j) = normal(gen);
      VectorXd beta_true = VectorXd::Zero(p);
      beta_true[0] = family == Family::Poisson ? 0.5 : 1.2;
      beta_true[1] = family == Family::Poisson ? -0.3 : -0.8;
      shard.y.resize(n);
      for (int i = 0; i < n; ++i) {
        const double z = shard.x.row(i).dot(beta_true);
        switch (family) {
          case Family::LeastSquares: shard.y[i] = z + normal(gen); break;
          case Family::Huber: {
            const double za = normal(gen), zb = normal(gen), zc = normal(gen);
            shard.y[i] = z + normal(gen) / std::sqrt((za * za + zb * zb + zc * zc) / 3.0);
            break;
          }
          case Family::Logistic:
            shard.y[i] = unif(gen) < 1.0 / (1.0 + std::exp(-z)) ? 1.0 : 0.0;
            break;
          case Family::Poisson: {
            // Small inverse-cdf draw; rates stay modest by construction.
            const double rate = std::exp(std::min(z, 3.0));
            double u = unif(gen), acc = std::exp(-rate), term = acc;
            long k = 0;
            while (u > acc && k < 500) {
              ++k;
              term *= rate / static_cast<double>(k);
              acc += term;
            }
            shard.y[i] = static_cast<double>(k);
            break;
          }
        }
      }
      VectorXd weights(p);
      for (int j = 0; j < p; ++j) weights[j] = 0.5 + 1.5 * unif(gen);
      VectorXd d1, d2;
      detail::eval_derivatives(model, shard.y, VectorXd::Zero(n), d1, d2);
      const VectorXd g0 = shard.x.transpose() * d1 / static_cast<double>(n);
      double lmax = 0.0;
      for (int j = 0; j < p; ++j) lmax = std::max(lmax, std::abs(g0[j]) / weights[j]);
      const double lambda = (0.15 + 0.35 * unif(gen)) * lmax;
      const VectorXd beta = solve_weighted_l1(shard, model, lambda, weights, cfg);
      worst = std::max(worst, kkt_violation(shard, model, lambda, weights, beta));
      ++count;
    }
  }
  return {worst <= 1e-3, "max subgradient violation " + fmt(worst) + " over " +
                             std::to_string(count) + " instances (<= 1e-3)"};
}

// ---------------------------------------------------------------------------
// Criterion 3: closed-form sparsifier vs numerical minimization.

Outcome criterion_wave_sparse() {
  std::mt19937_64 gen(4242);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int p = 1 + static_cast<int>(gen() % 10);
    VectorXd beta(p), v(p);
    AdaptiveWeights delta;
    delta.omega.resize(p);
    delta.xi = 1.0;
    for (int l = 0; l < p; ++l) {
      beta[l] = 2.0 * normal(gen);
      v[l] = 0.2 + 2.0 * unif(gen);
      delta.omega[l] = 0.1 + 3.0 * unif(gen);
    }
    const double nu = 0.5 * unif(gen);
    const VectorXd closed = wave_sparse(beta, v, delta, nu);
    for (int l = 0; l < p; ++l) {
      // Numerical minimization of the decoupled coordinate objective:
      // bisection on the sign of the subgradient of a strictly convex
      // function (value comparisons would bottom out near sqrt(eps)).
      const auto subgrad = [&](double x) {
        const double smooth = v[l] * x - v[l] * beta[l];
        if (x > 0.0) return smooth + nu * delta.omega[l];
        if (x < 0.0) return smooth - nu * delta.omega[l];
        // At the kink report the side that points downhill, 0 if neither.
        if (smooth + nu * delta.omega[l] < 0.0) return smooth + nu * delta.omega[l];
        if (smooth - nu * delta.omega[l] > 0.0) return smooth - nu * delta.omega[l];
        return 0.0;
      };
      double lo = -std::abs(beta[l]) - 1.0, hi = std::abs(beta[l]) + 1.0;
      double numeric = 0.0;
      for (int it = 0; it < 200; ++it) {
        numeric = 0.5 * (lo + hi);
        const double g = subgrad(numeric);
        if (g == 0.0) break;
        if (g > 0.0) hi = numeric;
        else lo = numeric;
      }
      worst = std::max(worst, std::abs(closed[l] - numeric));
    }
  }
  return {worst <= 1e-8,
          "max gap to the numerical minimizer " + fmt(worst) + " (<= 1e-8)"};
}

// ---------------------------------------------------------------------------
// Criterion 4: collapse and diagonal identities.

Outcome criterion_identities() {
  std::mt19937_64 gen(999);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  bool collapse_exact = true;
  double diag_gap = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int k = 2 + static_cast<int>(gen() % 6);
    const int p = 1 + static_cast<int>(gen() % 20);
    std::vector<LocalSummary> summaries;
    VectorXd shared(p);
    for (int l = 0; l < p; ++l) shared[l] = 0.2 + 3.0 * unif(gen);
    for (int j = 0; j < k; ++j) {
      LocalSummary s;
      s.worker_id = j;
      s.n_j = 50 + static_cast<long>(gen() % 300);
      s.beta_hat.resize(p);
      s.lambda_diag.resize(p);
      for (int l = 0; l < p; ++l) {
        s.beta_hat[l] = normal(gen);
        s.lambda_diag[l] = 0.2 + 3.0 * unif(gen);
      }
      summaries.push_back(std::move(s));
    }
    // Diagonal identity on heterogeneous precisions.
    {
      const auto [wave, var] = wave_point(summaries);
      std::vector<std::pair<VectorXd, MatrixXd>> full;
      for (const auto& s : summaries) {
        full.emplace_back(s.beta_hat, MatrixXd(s.lambda_diag.asDiagonal()));
      }
      const VectorXd ref = full_ls_reference(full, worker_alphas(summaries));
      diag_gap = std::max(diag_gap, (ref - wave).lpNorm<Eigen::Infinity>());
    }
    // Collapse identity on shared precisions.
    for (auto& s : summaries) s.lambda_diag = shared;
    const auto [wave, var] = wave_point(summaries);
    const VectorXd avg = simple_average(summaries);
    collapse_exact = collapse_exact && bits_equal(wave, avg);
  }
  const bool pass = collapse_exact && diag_gap <= 1e-10;
  return {pass, std::string("collapse exact: ") + (collapse_exact ? "yes" : "NO") +
                    ", diagonal-identity gap " + fmt(diag_gap) + " (<= 1e-10)"};
}

// ---------------------------------------------------------------------------
// Monte-Carlo cells shared by criteria 5-10.

struct CellOutcome {
  std::vector<double> wave_err, ave_err;
  std::vector<bool> exact_support;
  // Coverage indicators for the requested coordinates (criterion 10).
  std::vector<std::vector<bool>> covered;
};

CellOutcome run_cell(const GenConfig& base, const RunConfig& run, int reps,
                     const std::vector<int>& coverage_coords = {}) {
  CellOutcome out;
  for (int rep = 0; rep < reps; ++rep) {
    GenConfig gen = base;
    gen.seed = base.seed + static_cast<std::uint64_t>(rep);
    const GeneratedData data = generate(gen);
    const PipelineResult pipe = run_pipeline(data.shards, run);
    out.wave_err.push_back(squared_error(pipe.result.beta_sparse, data.truth.beta_star));
    out.ave_err.push_back(
        squared_error(simple_average(pipe.summaries), data.truth.beta_star));
    out.exact_support.push_back(
        selection_metrics(pipe.result.beta_sparse, data.truth).exact);
    if (!coverage_coords.empty()) {
      std::vector<bool> c;
      for (int l : coverage_coords) {
        const double err = std::abs(pipe.result.beta_wave[l] - data.truth.beta_star[l]);
        c.push_back(err <= pipe.result.ci_halfwidth[l]);
      }
      out.covered.push_back(std::move(c));
    }
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

GenConfig make_gen(Example example, Setting setting, int k, long n, int p,
                   std::uint64_t seed) {
  GenConfig g;
  g.example = example;
  g.setting = setting;
  g.k = k;
  g.n_per_worker = n;
  g.p = p;
  g.seed = seed;
  return g;
}

RunConfig make_run(Example example) {
  RunConfig r;
  r.model = example_loss(example);
  return r;
}

Outcome criterion_table1_homogeneous() {
  const auto cell = run_cell(
      make_gen(Example::Linear, Setting::Homogeneous, 10, 500, 100, 90001),
      make_run(Example::Linear), 50);
  const double mean = mean_of(cell.wave_err);
  const bool pass = mean >= 2e-4 && mean <= 2e-3;
  return {pass, "wave mean squared error " + fmt(mean) +
                    " in [2e-4, 2e-3] over 50 reps (ave " + fmt(mean_of(cell.ave_err)) +
                    ")"};
}

Outcome criterion_table1_heterogeneous() {
  const auto cell = run_cell(
      make_gen(Example::Linear, Setting::Heterogeneous, 50, 100, 100, 90002),
      make_run(Example::Linear), 50);
  const double wave = mean_of(cell.wave_err);
  const double ave = mean_of(cell.ave_err);
  return {wave < 0.6 * ave, "wave mean " + fmt(wave) + " vs ave mean " + fmt(ave) +
                                " (ratio " + fmt(wave / ave) + " < 0.6)"};
}

// Smallest m with P(Bin(n, 1/2) >= m) <= alpha.
int sign_test_critical(int n, double alpha) {
  std::vector<double> logc(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    logc[static_cast<std::size_t>(k)] = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                                        std::lgamma(n - k + 1.0) -
                                        n * std::log(2.0);
  }
  for (int m = 0; m <= n; ++m) {
    double tail = 0.0;
    for (int k = m; k <= n; ++k) tail += std::exp(logc[static_cast<std::size_t>(k)]);
    if (tail <= alpha) return m;
  }
  return n + 1;
}

Outcome criterion_poisson_ordering() {
  const auto cell = run_cell(
      make_gen(Example::Poisson, Setting::Homogeneous, 10, 500, 100, 90003),
      make_run(Example::Poisson), 50);
  int wins = 0;
  for (std::size_t r = 0; r < cell.wave_err.size(); ++r) {
    wins += cell.wave_err[r] < cell.ave_err[r] ? 1 : 0;
  }
  const int critical = sign_test_critical(50, 0.05);
  const double wave = mean_of(cell.wave_err);
  const double ave = mean_of(cell.ave_err);
  const bool pass = wave < ave && wins >= critical;
  return {pass, "wave mean " + fmt(wave) + " < ave mean " + fmt(ave) + "; sign test " +
                    std::to_string(wins) + "/50 wins (needs >= " +
                    std::to_string(critical) + ")"};
}

Outcome criterion_huber_ordering() {
  const auto cell = run_cell(
      make_gen(Example::HuberLinear, Setting::Homogeneous, 30, 167, 150, 90004),
      make_run(Example::HuberLinear), 50);
  const double wave = mean_of(cell.wave_err);
  const double ave = mean_of(cell.ave_err);
  return {wave < 0.8 * ave, "wave mean " + fmt(wave) + " vs ave mean " + fmt(ave) +
                                " (ratio " + fmt(wave / ave) + " < 0.8)"};
}

Outcome criterion_selection() {
  const auto cell = run_cell(
      make_gen(Example::Linear, Setting::Homogeneous, 10, 500, 100, 90005),
      make_run(Example::Linear), 50);
  int exact = 0;
  for (bool e : cell.exact_support) exact += e ? 1 : 0;
  const double rate = static_cast<double>(exact) / 50.0;
  return {rate >= 0.90, "exact-support rate " + fmt(rate) + " over 50 reps (>= 0.90)"};
}

Outcome criterion_ci_coverage() {
  const std::vector<int> coords = {0, 1, 4};
  const auto cell = run_cell(
      make_gen(Example::Linear, Setting::Homogeneous, 10, 500, 50, 90006),
      make_run(Example::Linear), 200, coords);
  long covered = 0, total = 0;
  std::vector<long> per_coord(coords.size(), 0);
  for (const auto& c : cell.covered) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      covered += c[i] ? 1 : 0;
      per_coord[i] += c[i] ? 1 : 0;
      ++total;
    }
  }
  const double rate = static_cast<double>(covered) / static_cast<double>(total);
  std::string per = "per-coordinate";
  for (std::size_t i = 0; i < coords.size(); ++i) {
    per += " " + fmt(static_cast<double>(per_coord[i]) / 200.0);
  }
  const bool pass = rate >= 0.90 && rate <= 0.98;
  return {pass, "95% CI coverage for the active coordinates " + fmt(rate) +
                    " in [0.90, 0.98] over 200 reps (" + per + ")"};
}

// ---------------------------------------------------------------------------
// Criterion 11: protocol round trip + stream parity.

Outcome criterion_protocol() {
  std::mt19937_64 gen(31337);
  std::normal_distribution<double> normal(0.0, 1.0);
  long failures = 0;
  for (int t = 0; t < 10000; ++t) {
    const int p = 1 + static_cast<int>(gen() % 8);
    LocalSummary s;
    s.worker_id = static_cast<int>(gen() % 1000);
    s.n_j = 1 + static_cast<long>(gen() % 1000000);
    s.beta_hat.resize(p);
    s.lambda_diag.resize(p);
    for (int l = 0; l < p; ++l) {
      switch (gen() % 5) {
        case 0: s.beta_hat[l] = 0.0; break;
        case 1: s.beta_hat[l] = -0.0; break;
        case 2:
          s.beta_hat[l] = 5e-324 * static_cast<double>(1 + (gen() % 100000));
          break;
        case 3:
          s.beta_hat[l] = std::ldexp(normal(gen), static_cast<int>(gen() % 2000) - 1000);
          break;
        default: s.beta_hat[l] = normal(gen); break;
      }
      if (!std::isfinite(s.beta_hat[l])) s.beta_hat[l] = normal(gen);
      s.lambda_diag[l] = std::ldexp(1.0 + std::abs(normal(gen)),
                                    static_cast<int>(gen() % 400) - 200);
    }
    const LocalSummary back = decode_summary(encode_summary(s));
    if (!bits_equal(back.beta_hat, s.beta_hat) ||
        !bits_equal(back.lambda_diag, s.lambda_diag) || back.n_j != s.n_j ||
        back.worker_id != s.worker_id) {
      ++failures;
    }
  }

  const auto shards = generate(make_gen(Example::Linear, Setting::Homogeneous, 6, 60, 8,
                                        90007))
                          .shards;
  RunConfig cfg = make_run(Example::Linear);
  const PipelineResult in_proc = run_pipeline(shards, cfg);
  cfg.mode = RunMode::Stream;
  const PipelineResult streamed = run_pipeline(shards, cfg);
  const bool stream_ok = bits_equal(in_proc.result.beta_sparse, streamed.result.beta_sparse) &&
                         bits_equal(in_proc.result.beta_wave, streamed.result.beta_wave) &&
                         streamed.stats.messages_sent == 6 &&
                         streamed.stats.messages_received == 6;
  const bool pass = failures == 0 && stream_ok;
  return {pass, std::to_string(10000 - failures) +
                    "/10000 summaries round-trip bit-exact; stream == in-process: " +
                    (stream_ok ? "yes" : "NO") + "; one message per worker"};
}

// ---------------------------------------------------------------------------
// Criterion 12: determinism.

Outcome criterion_determinism() {
  const auto shards =
      generate(make_gen(Example::Linear, Setting::Homogeneous, 8, 60, 10, 90008)).shards;
  RunConfig cfg = make_run(Example::Linear);
  cfg.worker_parallelism = 1;
  const PipelineResult p1 = run_pipeline(shards, cfg);
  cfg.worker_parallelism = 4;
  const PipelineResult p4 = run_pipeline(shards, cfg);
  cfg.worker_parallelism = 8;
  const PipelineResult p8 = run_pipeline(shards, cfg);
  bool same = bits_equal(p1.result.beta_sparse, p4.result.beta_sparse) &&
              bits_equal(p1.result.beta_sparse, p8.result.beta_sparse) &&
              bits_equal(p1.result.beta_wave, p4.result.beta_wave) &&
              bits_equal(p1.result.beta_wave, p8.result.beta_wave) &&
              bits_equal(p1.result.ci_halfwidth, p4.result.ci_halfwidth) &&
              bits_equal(p1.result.ci_halfwidth, p8.result.ci_halfwidth);

  std::vector<LocalSummary> shuffled = p1.summaries;
  std::mt19937_64 gen(5150);
  bool permutation_ok = true;
  for (int t = 0; t < 20; ++t) {
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    const AggregateResult again = aggregate_summaries(shuffled, cfg);
    permutation_ok = permutation_ok &&
                     bits_equal(again.beta_sparse, p1.result.beta_sparse) &&
                     bits_equal(again.beta_wave, p1.result.beta_wave) &&
                     bits_equal(again.ci_halfwidth, p1.result.ci_halfwidth);
  }
  const bool pass = same && permutation_ok;
  return {pass, std::string("parallelism {1,4,8} bit-identical: ") +
                    (same ? "yes" : "NO") + "; 20 arrival permutations identical: " +
                    (permutation_ok ? "yes" : "NO")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "solver_grid_oracle", criterion_solver_oracle},
      {2, "kkt_suite", criterion_kkt},
      {3, "wave_sparse_closed_form", criterion_wave_sparse},
      {4, "aggregation_identities", criterion_identities},
      {5, "table1_homogeneous", criterion_table1_homogeneous},
      {6, "table1_heterogeneous", criterion_table1_heterogeneous},
      {7, "poisson_ordering", criterion_poisson_ordering},
      {8, "huber_ordering", criterion_huber_ordering},
      {9, "selection_consistency", criterion_selection},
      {10, "ci_coverage", criterion_ci_coverage},
      {11, "protocol_roundtrip", criterion_protocol},
      {12, "determinism", criterion_determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  bool all_passed = true;
  for (const auto& c : criteria()) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) {
      continue;
    }
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %02d %s: %s\n", outcome.pass ? "PASS" : "FAIL", c.id,
                c.name, outcome.detail.c_str());
    std::fflush(stdout);
    all_passed = all_passed && outcome.pass;
  }
  return all_passed ? 0 : 1;
}
