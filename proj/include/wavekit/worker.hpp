#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wavekit/admm.hpp"
#include "wavekit/model.hpp"

namespace wavekit {

// Per-coordinate adaptive-lasso penalty weights omega_k = 1/|beta_pre_k|^xi.
// Coordinates whose pre-estimate is exactly zero receive an infinite penalty
// and are listed in `excluded`; the solver never sees them.
struct AdaptiveWeights {
  VectorXd omega;             // length p, +inf on excluded coordinates
  double xi = 1.0;
  std::vector<int> excluded;  // sorted indices with zero pre-estimate

  std::vector<int> active() const;  // complement of excluded

  static AdaptiveWeights unit(Eigen::Index p);
};

AdaptiveWeights adaptive_weights(const VectorXd& beta_pre, double xi);

// The two vectors a worker ships to the master, plus its sample count.
struct LocalSummary {
  int worker_id = 0;
  long n_j = 0;
  VectorXd beta_hat;
  VectorXd lambda_diag;  // strictly positive, length p
};

enum class TuningMethod { LocalBIC, KFoldCV };

struct Tuning {
  TuningMethod method = TuningMethod::LocalBIC;
  int folds = 10;  // only for KFoldCV

  static Tuning bic() { return {TuningMethod::LocalBIC, 0}; }
  static Tuning cv(int k) { return {TuningMethod::KFoldCV, k}; }
};

struct LambdaGridSpec {
  int count = 50;
  double min_ratio = 1e-3;  // smallest grid point as a fraction of lambda_max
};

// Descending log-spaced grid from lambda_max down to min_ratio * lambda_max.
VectorXd make_lambda_grid(double lambda_max, const LambdaGridSpec& spec = {});

// Grid derived from the gradient of the loss at beta = 0 under the given
// penalty weights (lambda_max is the smallest lambda giving the zero model).
VectorXd default_lambda_grid(const DataShard& shard, const LossModel& model,
                             const AdaptiveWeights& weights,
                             const LambdaGridSpec& spec = {});

struct LambdaChoice {
  double lambda = 0.0;
  VectorXd beta;
  double criterion = 0.0;
};

// Sweeps the grid (descending, warm-started) and returns the entry minimizing
// the tuning criterion; ties break toward larger lambda. Excluded coordinates
// stay exactly zero in the returned fit.
LambdaChoice select_lambda(const DataShard& shard, const LossModel& model,
                           const AdaptiveWeights& weights, const VectorXd& lambda_grid,
                           const Tuning& tuning, const AdmmConfig& cfg);

// Plain lasso (unit weights) at the grid value chosen by select_lambda.
VectorXd fit_pre_estimate(const DataShard& shard, const LossModel& model,
                          const VectorXd& lambda_grid, const AdmmConfig& cfg,
                          const Tuning& tuning = {});

struct LocalFit {
  VectorXd beta;
  double lambda = 0.0;
  bool all_excluded = false;  // pre-estimate was identically zero
};

// The local adaptive lasso: pre-estimate, adaptive weights, penalized fit with
// lambda chosen by select_lambda. Empty grids request the default grid for the
// corresponding stage (derived per problem from lambda_max and `grid_spec`).
LocalFit fit_local(const DataShard& shard, const LossModel& model, double xi,
                   const VectorXd& lambda_grid, const AdmmConfig& cfg,
                   const Tuning& tuning = {}, const VectorXd& pre_grid = VectorXd(),
                   const LambdaGridSpec& grid_spec = {});

// Diagonal of the plug-in inverse covariance of the local estimator.
//
// Logistic / Poisson / LeastSquares use the generalized-linear shortcut
// diag(Psi_hat) = (1/n) sum_i d2_i x_il^2 (no matrix inverse). Huber uses the
// full sandwich diag(Psi (Phi + ridge I)^{-1} Psi), which requires p < n_j
// unless ridge > 0. Entries are clamped below at 1e-12; `clamped` (optional)
// receives how many were clamped.
VectorXd estimate_lambda_diag(const DataShard& shard, const LossModel& model,
                              const VectorXd& beta_hat, double ridge,
                              int* clamped = nullptr);

// The sandwich branch regardless of family (reference and test path).
VectorXd lambda_diag_general(const DataShard& shard, const LossModel& model,
                             const VectorXd& beta_hat, double ridge,
                             int* clamped = nullptr);

// Support-restricted sandwich: the precision of each selected coordinate is
// read off the sandwich built on the selected columns only (the asymptotic
// covariance of the post-selection estimator), and every unselected
// coordinate gets the one-column-augmented version. Stays well conditioned
// whenever the selected support is small, unlike the full p x p inverse at
// p close to n_j; the worker pipeline uses this for the sandwich families.
VectorXd lambda_diag_restricted(const DataShard& shard, const LossModel& model,
                                const VectorXd& beta_hat, double ridge,
                                int* clamped = nullptr);

// 1e-6 * trace(Phi_hat)/p when p >= n_j, else 0.
double default_sandwich_ridge(const DataShard& shard, const LossModel& model,
                              const VectorXd& beta_hat);

// Full p x p plug-in Sigma^{-1} = Psi (Phi + ridge I)^{-1} Psi. Reference path
// for the dense least-squares aggregate; never shipped off-worker.
MatrixXd sandwich_inverse_covariance(const DataShard& shard, const LossModel& model,
                                     const VectorXd& beta_hat, double ridge);

struct WorkerOptions {
  double xi = 1.0;
  Tuning tuning;
  LambdaGridSpec lambda_grid;
  AdmmConfig admm;
  double ridge = -1.0;  // < 0 selects default_sandwich_ridge
};

// One worker's full pipeline: local fit + lambda_diag, packaged for the wire.
LocalSummary compute_local_summary(const DataShard& shard, const LossModel& model,
                                   const WorkerOptions& options);

}  // namespace wavekit
