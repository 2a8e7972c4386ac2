#include "wavekit/admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "wavekit/detail/losseval.hpp"

namespace wavekit {

using detail::eval_derivatives;
using detail::guarded_mean_value;

namespace {

constexpr int kMaxHalvings = 30;
constexpr int kMaxScreenRounds = 30;

void check_weights(const VectorXd& weights, Eigen::Index p) {
  if (weights.size() != p) {
    throw DimensionError("penalty weights length " + std::to_string(weights.size()) +
                         " does not match p = " + std::to_string(p));
  }
  for (Eigen::Index k = 0; k < p; ++k) {
    if (!(weights[k] > 0.0) || !std::isfinite(weights[k])) {
      throw DomainError("penalty weight " + std::to_string(k) +
                        " must be strictly positive and finite; infinite-weight "
                        "coordinates are removed before the solver runs");
    }
  }
}

// The alpha-space problem: design columns already scaled by D^{-1}, so the
// penalty is uniform lambda * ||alpha||_1.
class AlphaEngine {
 public:
  AlphaEngine(MatrixXd xs, VectorXd y, const LossModel& model, const AdmmConfig& cfg)
      : xs_(std::move(xs)), y_(std::move(y)), model_(model), cfg_(cfg) {
    if (model_.family == Family::LeastSquares) {
      const double n = static_cast<double>(xs_.rows());
      gram_ = MatrixXd::Zero(xs_.cols(), xs_.cols());
      gram_.selfadjointView<Eigen::Lower>().rankUpdate(xs_.transpose(), 1.0 / n);
      gram_ = gram_.selfadjointView<Eigen::Lower>();
      xty_ = xs_.transpose() * y_ / n;
      MatrixXd h = gram_;
      h.diagonal().array() += cfg_.eta * cfg_.eta;
      ls_factor_.compute(h);
    }
  }

  Eigen::Index dim() const { return xs_.cols(); }
  const MatrixXd& xs() const { return xs_; }

  // Gradient of the smooth part (1/n) sum L at alpha, given z = xs * alpha.
  VectorXd smooth_gradient(const VectorXd& z) const {
    VectorXd d1, d2;
    eval_derivatives(model_, y_, z, d1, d2);
    return xs_.transpose() * d1 / static_cast<double>(xs_.rows());
  }

  double objective(const VectorXd& alpha, const VectorXd& theta, const VectorXd& dual,
                   const VectorXd& z) const {
    const double eta2 = cfg_.eta * cfg_.eta;
    const VectorXd diff = alpha - theta;
    return guarded_mean_value(model_, y_, z) - dual.dot(diff) + 0.5 * eta2 * diff.squaredNorm();
  }

  // Step 1. Damped Newton for the general case, exact quadratic solve for
  // least squares (one Newton step lands on the minimizer there anyway).
  void alpha_step(VectorXd& alpha, const VectorXd& theta, const VectorXd& dual,
                  long outer_iter) const {
    const double eta2 = cfg_.eta * cfg_.eta;
    if (model_.family == Family::LeastSquares) {
      alpha = ls_factor_.solve(xty_ + dual + eta2 * theta);
      return;
    }
    const double n = static_cast<double>(xs_.rows());
    const Eigen::Index m = xs_.cols();
    VectorXd z = xs_ * alpha;
    double obj = objective(alpha, theta, dual, z);
    if (!std::isfinite(obj)) {
      throw DivergenceError("non-finite objective entering the Newton step",
                            static_cast<int>(outer_iter));
    }
    VectorXd d1, d2;
    for (int t = 0; t < cfg_.max_newton_iter; ++t) {
      eval_derivatives(model_, y_, z, d1, d2);
      VectorXd grad = xs_.transpose() * d1 / n - dual + eta2 * (alpha - theta);
      const VectorXd floored = d2.cwiseMax(cfg_.curvature_floor);
      // The huber curvature is a 0/1 pattern that freezes near convergence,
      // so the factorization of an unchanged-diagonal Hessian is reusable.
      if (!hessian_cached_ || floored != cached_curvature_) {
        MatrixXd xw = floored.cwiseSqrt().asDiagonal() * xs_;
        MatrixXd h = MatrixXd::Zero(m, m);
        h.selfadjointView<Eigen::Lower>().rankUpdate(xw.transpose(), 1.0 / n);
        h = h.selfadjointView<Eigen::Lower>();
        h.diagonal().array() += eta2;
        cached_ldlt_.compute(h);
        cached_curvature_ = floored;
        hessian_cached_ = true;
      }
      const VectorXd delta = -cached_ldlt_.solve(grad);

      double step = 1.0;
      VectorXd alpha_try;
      VectorXd z_try;
      double obj_try = std::numeric_limits<double>::infinity();
      bool accepted = false;
      for (int h_count = 0; h_count <= kMaxHalvings; ++h_count) {
        alpha_try = alpha + step * delta;
        z_try = xs_ * alpha_try;
        obj_try = objective(alpha_try, theta, dual, z_try);
        if (std::isfinite(obj_try) && obj_try <= obj) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted && !std::isfinite(obj_try)) {
        throw DivergenceError("Newton step diverged after " +
                                  std::to_string(kMaxHalvings) + " halvings",
                              static_cast<int>(outer_iter));
      }
      const double applied = step * delta.lpNorm<Eigen::Infinity>();
      alpha = alpha_try;
      z = z_try;
      obj = obj_try;
      if (applied < cfg_.newton_tol || !accepted) break;
    }
  }

  // Steps 1-3 until the residuals pass or iterations run out. The multiplier
  // step is dual ascent for the -a'(alpha - theta) convention of the theta
  // update, i.e. a <- a - eta^2 (alpha - theta); the theta-movement (dual
  // residual) check keeps the lambda = 0 prox-identity case from stopping at
  // an arbitrary point. Returns the final primal residual; iterations spent
  // are added to *iters.
  double run(double lambda, VectorXd& alpha, VectorXd& theta, VectorXd& dual,
             long* iters = nullptr) const {
    const double eta2 = cfg_.eta * cfg_.eta;
    const double thr = lambda / eta2;
    double residual = std::numeric_limits<double>::infinity();
    long used = 0;
    VectorXd theta_prev = theta;
    for (long m = 0; m < cfg_.max_outer_iter; ++m) {
      ++used;
      alpha_step(alpha, theta, dual, m);
      theta_prev.swap(theta);
      for (Eigen::Index j = 0; j < theta.size(); ++j) {
        theta[j] = soft_threshold(alpha[j] - dual[j] / eta2, thr);
      }
      dual -= eta2 * (alpha - theta);
      residual = (alpha - theta).norm();
      const double dual_residual = eta2 * (theta - theta_prev).norm();
      if (residual <= cfg_.primal_tol && dual_residual <= cfg_.primal_tol) break;
    }
    if (iters) *iters += used;
    if (residual > 10.0 * cfg_.primal_tol) {
      throw ConvergenceError("ADMM did not converge: primal residual " +
                                 std::to_string(residual) + " after " +
                                 std::to_string(used) + " outer iterations",
                             residual);
    }
    return residual;
  }

 private:
  MatrixXd xs_;
  VectorXd y_;
  LossModel model_;
  AdmmConfig cfg_;
  MatrixXd gram_;
  VectorXd xty_;
  Eigen::LDLT<MatrixXd> ls_factor_;
  mutable Eigen::LDLT<MatrixXd> cached_ldlt_;
  mutable VectorXd cached_curvature_;
  mutable bool hessian_cached_ = false;
};

MatrixXd scaled_design(const DataShard& shard, const VectorXd& weights) {
  return shard.x * weights.cwiseInverse().asDiagonal();
}

}  // namespace

VectorXd admm_theta_update(const SolverState& state, double lambda, const AdmmConfig& cfg) {
  const double eta2 = cfg.eta * cfg.eta;
  const double thr = lambda / eta2;
  VectorXd theta(state.alpha.size());
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    theta[j] = soft_threshold(state.alpha[j] - state.dual[j] / eta2, thr);
  }
  return theta;
}

VectorXd admm_alpha_update(const DataShard& shard, const LossModel& model,
                           const VectorXd& weights, const SolverState& state,
                           const AdmmConfig& cfg) {
  check_weights(weights, shard.p());
  AlphaEngine engine(scaled_design(shard, weights), shard.y, model, cfg);
  VectorXd alpha = state.alpha;
  engine.alpha_step(alpha, state.theta, state.dual, state.iter);
  return alpha;
}

VectorXd solve_weighted_l1(const DataShard& shard, const LossModel& model,
                           double lambda, const VectorXd& weights,
                           const AdmmConfig& cfg, const VectorXd& init) {
  validate_shard(model, shard);
  check_weights(weights, shard.p());
  if (init.size() != shard.p()) {
    throw DimensionError("init length " + std::to_string(init.size()) +
                         " does not match p = " + std::to_string(shard.p()));
  }
  if (lambda < 0.0 || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be a nonnegative finite real");
  }
  AlphaEngine engine(scaled_design(shard, weights), shard.y, model, cfg);
  VectorXd alpha = weights.cwiseProduct(init);
  VectorXd theta = alpha;
  // Fixed-point initialization of the multipliers: at the solution
  // a = grad f(alpha), with |a_j| <= lambda on the zero coordinates. Starting
  // from the clamped gradient instead of zero removes the long multiplier
  // grind on ill-conditioned problems.
  VectorXd dual = engine.smooth_gradient(engine.xs() * alpha)
                      .cwiseMax(-lambda)
                      .cwiseMin(lambda);
  engine.run(lambda, alpha, theta, dual);
  // Zeros in theta come straight from the soft threshold and survive the
  // rescaling bit-exactly.
  return theta.cwiseQuotient(weights);
}

VectorXd solve_weighted_l1(const DataShard& shard, const LossModel& model,
                           double lambda, const VectorXd& weights,
                           const AdmmConfig& cfg) {
  return solve_weighted_l1(shard, model, lambda, weights, cfg,
                           VectorXd::Zero(shard.p()));
}

struct WeightedL1Path::Impl {
  LossModel model;
  AdmmConfig cfg;
  VectorXd weights;
  MatrixXd xs;  // n x p, columns scaled by 1/w
  VectorXd y;
  double lambda_max = 0.0;

  // Full-length ADMM state; entries outside the current working set are zero.
  VectorXd alpha, theta, dual;
  // Gradient of the smooth part at the current solution, and the lambda it
  // belongs to (drives the sequential strong rule).
  VectorXd grad;
  double prev_lambda = 0.0;

  // Working-set cache so identical sets across neighbouring lambdas reuse the
  // column copy (and the least-squares factorization inside the engine).
  std::vector<int> cached_set;
  std::unique_ptr<AlphaEngine> cached_engine;

  Impl(const DataShard& shard, const LossModel& model_in, VectorXd weights_in,
       const AdmmConfig& cfg_in)
      : model(model_in), cfg(cfg_in), weights(std::move(weights_in)) {
    validate_shard(model, shard);
    check_weights(weights, shard.p());
    xs = scaled_design(shard, weights);
    y = shard.y;
    const Eigen::Index p = xs.cols();
    alpha = VectorXd::Zero(p);
    theta = VectorXd::Zero(p);
    dual = VectorXd::Zero(p);
    VectorXd d1, d2;
    eval_derivatives(model, y, VectorXd::Zero(xs.rows()), d1, d2);
    grad = xs.transpose() * d1 / static_cast<double>(xs.rows());
    lambda_max = grad.lpNorm<Eigen::Infinity>();
    prev_lambda = lambda_max;
  }

  const AlphaEngine& engine_for(const std::vector<int>& set) {
    if (!cached_engine || set != cached_set) {
      MatrixXd sub(xs.rows(), static_cast<Eigen::Index>(set.size()));
      for (std::size_t j = 0; j < set.size(); ++j) sub.col(j) = xs.col(set[j]);
      cached_engine = std::make_unique<AlphaEngine>(std::move(sub), y, model, cfg);
      cached_set = set;
    }
    return *cached_engine;
  }

  VectorXd solve(double lambda) {
    const Eigen::Index p = xs.cols();
    const double slack = 50.0 * cfg.primal_tol;
    // Strong-rule candidates plus everything currently active.
    const double strong_thr = std::max(2.0 * lambda - prev_lambda, 0.0);
    std::vector<char> in_set(p, 0);
    for (Eigen::Index l = 0; l < p; ++l) {
      if (theta[l] != 0.0 || std::abs(grad[l]) >= strong_thr) in_set[l] = 1;
    }
    for (int round = 0; round <= kMaxScreenRounds; ++round) {
      if (round == kMaxScreenRounds) std::fill(in_set.begin(), in_set.end(), 1);
      std::vector<int> set;
      for (Eigen::Index l = 0; l < p; ++l) {
        if (in_set[l]) set.push_back(static_cast<int>(l));
      }
      VectorXd z;
      if (set.empty()) {
        z = VectorXd::Zero(xs.rows());
      } else {
        const AlphaEngine& eng = engine_for(set);
        const Eigen::Index m = static_cast<Eigen::Index>(set.size());
        VectorXd a(m), t(m), d(m);
        for (Eigen::Index j = 0; j < m; ++j) {
          a[j] = alpha[set[j]];
          t[j] = theta[set[j]];
          d[j] = dual[set[j]];
          // Coordinates entering with untouched state get the fixed-point
          // multiplier (the clamped current gradient) instead of zero.
          if (a[j] == 0.0 && t[j] == 0.0 && d[j] == 0.0) {
            d[j] = std::clamp(grad[set[j]], -lambda, lambda);
          }
        }
        eng.run(lambda, a, t, d);
        alpha.setZero();
        theta.setZero();
        dual.setZero();
        for (Eigen::Index j = 0; j < m; ++j) {
          alpha[set[j]] = a[j];
          theta[set[j]] = t[j];
          dual[set[j]] = d[j];
        }
        z = eng.xs() * t;
      }
      VectorXd d1, d2;
      eval_derivatives(model, y, z, d1, d2);
      grad = xs.transpose() * d1 / static_cast<double>(xs.rows());
      bool violated = false;
      for (Eigen::Index l = 0; l < p; ++l) {
        if (!in_set[l] && std::abs(grad[l]) > lambda + slack) {
          in_set[l] = 1;
          violated = true;
        }
      }
      if (!violated) break;
    }
    prev_lambda = lambda;
    return theta.cwiseQuotient(weights);
  }
};

WeightedL1Path::WeightedL1Path(const DataShard& shard, const LossModel& model,
                               VectorXd weights, const AdmmConfig& cfg)
    : impl_(std::make_unique<Impl>(shard, model, std::move(weights), cfg)) {}

WeightedL1Path::~WeightedL1Path() = default;
WeightedL1Path::WeightedL1Path(WeightedL1Path&&) noexcept = default;

double WeightedL1Path::lambda_max() const { return impl_->lambda_max; }

VectorXd WeightedL1Path::solve(double lambda) {
  if (lambda < 0.0 || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be a nonnegative finite real");
  }
  return impl_->solve(lambda);
}

}  // namespace wavekit
