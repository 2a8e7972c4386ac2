#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "wavekit/worker.hpp"

namespace wavekit {

// Per-coordinate variance bookkeeping for the weighted-average estimate.
// v_diag is the diagonal of V_N = sum_j alpha_j Lambda_j; var_wave is the
// variance of sqrt(N) * beta_wave per coordinate,
//   var_wave[l] = sum_k alpha_k (gamma2_kl)^2 sigma2_kl / (sum_k alpha_k gamma2_kl)^2,
// with the master substituting sigma2_kl = 1/gamma2_kl because workers ship
// only the diagonal precision (an approximation that ignores off-diagonal
// corrections).
struct VarianceEstimate {
  VectorXd v_diag;
  VectorXd var_wave;
};

struct AggregateResult {
  VectorXd beta_wave;    // dense weighted-average estimate
  VectorXd beta_sparse;  // adaptive-L1 sparsified estimate at nu_hat
  double nu_hat = 0.0;
  std::vector<int> support;  // exact nonzeros of beta_sparse
  VectorXd ci_halfwidth;
  VectorXd alpha;  // worker weights n_j / N, length K
};

// Indices of the exact nonzeros.
std::vector<int> support_of(const VectorXd& v);

// n_j / N per worker.
VectorXd worker_alphas(const std::vector<LocalSummary>& summaries);

// sum_j alpha_j beta_j (weights normalized so the identical-precision case
// collapses onto this bit-for-bit in wave_point).
VectorXd simple_average(const std::vector<LocalSummary>& summaries);

// Per-coordinate inverse-variance weighted combination, Eq.-style weights
// w_jl = alpha_j gamma2_jl / sum_k alpha_k gamma2_kl, plus the variance
// bookkeeping above.
std::pair<VectorXd, VarianceEstimate> wave_point(const std::vector<LocalSummary>& summaries);

// The literal variance formula with explicit per-worker sigma2 (K x p), used
// by wave_point with sigma2 = 1/gamma2 and directly testable against it.
VectorXd wave_variance(const VectorXd& alpha, const MatrixXd& gamma2, const MatrixXd& sigma2);

// Dense reference aggregate with full inverse-covariance matrices
// (sum_j alpha_j M_j)^{-1} (sum_j alpha_j M_j beta_j). Test/reference path;
// guarded to p <= 200.
VectorXd full_ls_reference(
    const std::vector<std::pair<VectorXd, MatrixXd>>& summaries_full,
    const VectorXd& alpha);

// delta_j = 1/|pilot_j|^xi on the simple-average pilot; shares the
// adaptive_weights implementation (including the infinite-weight exclusions).
AdaptiveWeights delta_weights(const VectorXd& beta_av, double xi);

// Exact coordinatewise minimizer of
//   (1/2) b' V b - b' V beta_wave + nu * sum_l delta_l |b_l|
// with diagonal V: soft_threshold(beta_wave_l, nu * delta_l / v_l).
// Coordinates with delta_l = inf map to exact zero for every nu.
VectorXd wave_sparse(const VectorXd& beta_wave, const VectorXd& v_diag,
                     const AdaptiveWeights& delta, double nu);

struct NuGridSpec {
  int count = 100;
  double min_nu = 1e-6;
};

// Log-spaced [min_nu, nu_max] with nu_max the smallest nu zeroing every
// coordinate; ascending.
VectorXd make_nu_grid(const VectorXd& beta_wave, const VectorXd& v_diag,
                      const AdaptiveWeights& delta, const NuGridSpec& spec = {});

struct NuChoice {
  double nu_hat = 0.0;
  VectorXd beta_sparse;
  double criterion = 0.0;
};

// BIC-type selection over the nu grid:
//   sum_l v_l (b_nu_l - b_l)^2 + log(N) * d_nu / N,
// ties toward larger nu (the sparser model).
NuChoice select_nu_bic(const VectorXd& beta_wave, const VectorXd& v_diag,
                       const AdaptiveWeights& delta, const VectorXd& nu_grid, long total_n);

// Inverse standard normal CDF, |error| well below 1e-8.
double normal_quantile(double prob);

// Half-widths z_{(1+level)/2} * sqrt(var_wave_l / N) per coordinate.
VectorXd confidence_intervals(const VarianceEstimate& var, long total_n, double level);

}  // namespace wavekit
