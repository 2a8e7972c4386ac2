#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "wavekit/model.hpp"

namespace wavekit {

// ADMM settings for the weighted-L1 problem
//   (1/n) sum_i L(y_i, x_i' beta) + lambda * sum_k w_k |beta_k|
// solved through the reparametrization alpha = D beta, D = diag(w).
struct AdmmConfig {
  double eta = 1.0;            // augmented-Lagrangian penalty, kept at 1
  double primal_tol = 1e-6;    // stop when ||alpha - theta||_2 <= primal_tol
  int max_outer_iter = 5000;
  double newton_tol = 1e-6;    // sup-norm of the inner Newton step
  int max_newton_iter = 25;
  double curvature_floor = 1e-6;  // d2 is floored at this in the Newton Hessian
};

struct SolverState {
  VectorXd alpha;
  VectorXd theta;
  VectorXd dual;  // Lagrange multipliers a
  long iter = 0;
  double primal_residual_norm = 0.0;
};

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

// Step 2: coordinatewise exact minimizer of the theta subproblem,
//   theta_j = soft_threshold(alpha_j - a_j / eta^2, lambda / eta^2).
VectorXd admm_theta_update(const SolverState& state, double lambda, const AdmmConfig& cfg);

// Step 1: damped Newton minimization of
//   (1/n) sum_i L(y_i, x_i' D^{-1} alpha) - a'(alpha - theta) + (eta^2/2)||alpha - theta||^2
// with Hessian (1/n) D^{-1} X' diag(max(d2, curvature_floor)) X D^{-1} + eta^2 I.
VectorXd admm_alpha_update(const DataShard& shard, const LossModel& model,
                           const VectorXd& weights, const SolverState& state,
                           const AdmmConfig& cfg);

// Full Steps 1-3 loop; returns beta = D^{-1} theta with exact zeros where the
// soft threshold produced them. Throws ConvergenceError when max_outer_iter
// is reached with a primal residual above 10 * primal_tol.
VectorXd solve_weighted_l1(const DataShard& shard, const LossModel& model,
                           double lambda, const VectorXd& weights,
                           const AdmmConfig& cfg, const VectorXd& init);
VectorXd solve_weighted_l1(const DataShard& shard, const LossModel& model,
                           double lambda, const VectorXd& weights,
                           const AdmmConfig& cfg);

// Warm-started solver for a descending sequence of lambdas on one shard with
// fixed penalty weights. Screens coordinates with the sequential strong rule
// and verifies the full stationarity system before accepting a solution, so
// results match the plain solver up to the configured tolerances while only
// paying for the active coordinates.
class WeightedL1Path {
 public:
  WeightedL1Path(const DataShard& shard, const LossModel& model, VectorXd weights,
                 const AdmmConfig& cfg);
  ~WeightedL1Path();
  WeightedL1Path(WeightedL1Path&&) noexcept;

  // Smallest lambda for which the all-zero model is stationary.
  double lambda_max() const;

  // Solve at `lambda`; call with nonincreasing values to benefit from warm
  // starts (other orders are legal but slower). Returns beta, length p.
  VectorXd solve(double lambda);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wavekit
