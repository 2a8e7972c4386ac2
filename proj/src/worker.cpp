#include "wavekit/worker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "wavekit/detail/losseval.hpp"

namespace wavekit {

namespace {

constexpr double kLambdaDiagFloor = 1e-12;

DataShard columns_subset(const DataShard& shard, const std::vector<int>& cols) {
  DataShard out;
  out.worker_id = shard.worker_id;
  out.y = shard.y;
  out.x.resize(shard.n(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.x.col(j) = shard.x.col(cols[j]);
  return out;
}

VectorXd embed(const VectorXd& reduced, const std::vector<int>& cols, Eigen::Index p) {
  VectorXd full = VectorXd::Zero(p);
  for (std::size_t j = 0; j < cols.size(); ++j) full[cols[j]] = reduced[j];
  return full;
}

long count_nonzeros(const VectorXd& v) {
  long d = 0;
  for (Eigen::Index l = 0; l < v.size(); ++l) {
    if (v[l] != 0.0) ++d;
  }
  return d;
}

// Contiguous fold boundaries, sizes differing by at most one.
std::vector<std::pair<Eigen::Index, Eigen::Index>> fold_ranges(Eigen::Index n, int k) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  const Eigen::Index base = n / k;
  const Eigen::Index extra = n % k;
  Eigen::Index start = 0;
  for (int f = 0; f < k; ++f) {
    const Eigen::Index len = base + (f < extra ? 1 : 0);
    out.emplace_back(start, len);
    start += len;
  }
  return out;
}

}  // namespace

std::vector<int> AdaptiveWeights::active() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(omega.size()) - excluded.size());
  std::size_t e = 0;
  for (Eigen::Index k = 0; k < omega.size(); ++k) {
    if (e < excluded.size() && excluded[e] == static_cast<int>(k)) {
      ++e;
    } else {
      out.push_back(static_cast<int>(k));
    }
  }
  return out;
}

AdaptiveWeights AdaptiveWeights::unit(Eigen::Index p) {
  AdaptiveWeights w;
  w.omega = VectorXd::Ones(p);
  w.xi = 1.0;
  return w;
}

AdaptiveWeights adaptive_weights(const VectorXd& beta_pre, double xi) {
  if (!(xi > 0.0) || !std::isfinite(xi)) {
    throw ConfigError("adaptive-weight exponent xi must be positive and finite");
  }
  AdaptiveWeights w;
  w.xi = xi;
  w.omega.resize(beta_pre.size());
  for (Eigen::Index k = 0; k < beta_pre.size(); ++k) {
    if (beta_pre[k] == 0.0) {
      w.omega[k] = std::numeric_limits<double>::infinity();
      w.excluded.push_back(static_cast<int>(k));
    } else {
      w.omega[k] = 1.0 / std::pow(std::abs(beta_pre[k]), xi);
    }
  }
  return w;
}

VectorXd make_lambda_grid(double lambda_max, const LambdaGridSpec& spec) {
  if (spec.count < 1) throw ConfigError("lambda grid needs at least one point");
  if (!(spec.min_ratio > 0.0) || spec.min_ratio > 1.0) {
    throw ConfigError("lambda grid min_ratio must lie in (0, 1]");
  }
  if (!(lambda_max > 0.0)) return VectorXd::Zero(1);
  if (spec.count == 1) {
    VectorXd g(1);
    g[0] = lambda_max;
    return g;
  }
  VectorXd grid(spec.count);
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(lambda_max * spec.min_ratio);
  for (int i = 0; i < spec.count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(spec.count - 1);
    grid[i] = std::exp(log_max + t * (log_min - log_max));
  }
  return grid;
}

VectorXd default_lambda_grid(const DataShard& shard, const LossModel& model,
                             const AdaptiveWeights& weights, const LambdaGridSpec& spec) {
  validate_shard(model, shard);
  if (weights.omega.size() != shard.p()) {
    throw DimensionError("weights length does not match p");
  }
  VectorXd d1, d2;
  detail::eval_derivatives(model, shard.y, VectorXd::Zero(shard.n()), d1, d2);
  const VectorXd grad0 = shard.x.transpose() * d1 / static_cast<double>(shard.n());
  double lambda_max = 0.0;
  for (Eigen::Index k = 0; k < shard.p(); ++k) {
    if (std::isfinite(weights.omega[k])) {
      lambda_max = std::max(lambda_max, std::abs(grad0[k]) / weights.omega[k]);
    }
  }
  return make_lambda_grid(lambda_max, spec);
}

LambdaChoice select_lambda(const DataShard& shard, const LossModel& model,
                           const AdaptiveWeights& weights, const VectorXd& lambda_grid,
                           const Tuning& tuning, const AdmmConfig& cfg) {
  validate_shard(model, shard);
  if (lambda_grid.size() == 0) throw ConfigError("lambda grid must be nonempty");
  if (weights.omega.size() != shard.p()) {
    throw DimensionError("weights length does not match p");
  }
  const Eigen::Index n = shard.n();
  const Eigen::Index p = shard.p();

  std::vector<double> grid(lambda_grid.data(), lambda_grid.data() + lambda_grid.size());
  std::sort(grid.begin(), grid.end(), std::greater<double>());

  const std::vector<int> active = weights.active();
  if (active.empty()) {
    LambdaChoice choice;
    choice.lambda = grid.front();
    choice.beta = VectorXd::Zero(p);
    choice.criterion = mean_loss_guarded(model, shard, choice.beta);
    return choice;
  }

  const DataShard reduced = columns_subset(shard, active);
  VectorXd omega_active(static_cast<Eigen::Index>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j) omega_active[j] = weights.omega[active[j]];

  std::vector<double> criterion(grid.size(), std::numeric_limits<double>::infinity());

  if (tuning.method == TuningMethod::LocalBIC) {
    WeightedL1Path path(reduced, model, omega_active, cfg);
    double best = std::numeric_limits<double>::infinity();
    LambdaChoice choice;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const VectorXd beta_r = path.solve(grid[i]);
      const double fit = detail::guarded_mean_value(model, reduced.y, reduced.x * beta_r);
      const double d = static_cast<double>(count_nonzeros(beta_r));
      criterion[i] = fit + std::log(static_cast<double>(n)) * d / static_cast<double>(n);
      if (criterion[i] < best) {
        best = criterion[i];
        choice.lambda = grid[i];
        choice.beta = embed(beta_r, active, p);
        choice.criterion = best;
      }
    }
    return choice;
  }

  // K-fold cross-validation on contiguous blocks.
  const int k = tuning.folds;
  if (k < 2) throw ConfigError("k-fold cross-validation needs k >= 2");
  if (n < k) throw ConfigError("k-fold cross-validation needs n_j >= k");
  std::vector<double> heldout(grid.size(), 0.0);
  const auto folds = fold_ranges(n, k);
  for (const auto& [start, len] : folds) {
    DataShard train;
    train.worker_id = reduced.worker_id;
    const Eigen::Index m = n - len;
    train.x.resize(m, reduced.p());
    train.y.resize(m);
    train.x.topRows(start) = reduced.x.topRows(start);
    train.y.head(start) = reduced.y.head(start);
    train.x.bottomRows(m - start) = reduced.x.bottomRows(n - start - len);
    train.y.tail(m - start) = reduced.y.tail(n - start - len);

    DataShard test;
    test.worker_id = reduced.worker_id;
    test.x = reduced.x.middleRows(start, len);
    test.y = reduced.y.segment(start, len);

    WeightedL1Path path(train, model, omega_active, cfg);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const VectorXd beta_r = path.solve(grid[i]);
      const double v = detail::guarded_mean_value(model, test.y, test.x * beta_r);
      heldout[i] += v * static_cast<double>(len) / static_cast<double>(n);
    }
  }
  std::size_t best_i = 0;
  for (std::size_t i = 1; i < heldout.size(); ++i) {
    if (heldout[i] < heldout[best_i]) best_i = i;
  }
  // Refit on the full shard, warm-started down the grid to the chosen value.
  WeightedL1Path path(reduced, model, omega_active, cfg);
  VectorXd beta_r;
  for (std::size_t i = 0; i <= best_i; ++i) beta_r = path.solve(grid[i]);
  LambdaChoice choice;
  choice.lambda = grid[best_i];
  choice.beta = embed(beta_r, active, p);
  choice.criterion = heldout[best_i];
  return choice;
}

VectorXd fit_pre_estimate(const DataShard& shard, const LossModel& model,
                          const VectorXd& lambda_grid, const AdmmConfig& cfg,
                          const Tuning& tuning) {
  return select_lambda(shard, model, AdaptiveWeights::unit(shard.p()), lambda_grid,
                       tuning, cfg)
      .beta;
}

LocalFit fit_local(const DataShard& shard, const LossModel& model, double xi,
                   const VectorXd& lambda_grid, const AdmmConfig& cfg,
                   const Tuning& tuning, const VectorXd& pre_grid,
                   const LambdaGridSpec& grid_spec) {
  validate_shard(model, shard);
  VectorXd pre_grid_used = pre_grid;
  if (pre_grid_used.size() == 0) {
    pre_grid_used =
        default_lambda_grid(shard, model, AdaptiveWeights::unit(shard.p()), grid_spec);
  }
  const VectorXd beta_pre = fit_pre_estimate(shard, model, pre_grid_used, cfg, tuning);
  const AdaptiveWeights weights = adaptive_weights(beta_pre, xi);

  LocalFit fit;
  if (static_cast<Eigen::Index>(weights.excluded.size()) == shard.p()) {
    fit.beta = VectorXd::Zero(shard.p());
    fit.lambda = 0.0;
    fit.all_excluded = true;
    return fit;
  }
  VectorXd grid_used = lambda_grid;
  if (grid_used.size() == 0) {
    grid_used = default_lambda_grid(shard, model, weights, grid_spec);
  }
  LambdaChoice choice = select_lambda(shard, model, weights, grid_used, tuning, cfg);
  fit.beta = std::move(choice.beta);
  fit.lambda = choice.lambda;
  fit.all_excluded = false;
  return fit;
}

namespace {

VectorXd clamp_floor(VectorXd v, int* clamped) {
  int count = 0;
  for (Eigen::Index l = 0; l < v.size(); ++l) {
    if (!(v[l] > kLambdaDiagFloor)) {
      v[l] = kLambdaDiagFloor;
      ++count;
    }
  }
  if (clamped) *clamped = count;
  return v;
}

void sandwich_parts(const DataShard& shard, const LossModel& model,
                    const VectorXd& beta_hat, MatrixXd& psi, MatrixXd& phi) {
  const double n = static_cast<double>(shard.n());
  const VectorXd z = linear_predict(shard, beta_hat);
  VectorXd d1, d2;
  detail::eval_derivatives(model, shard.y, z, d1, d2);
  if (!d1.allFinite() || !d2.allFinite()) {
    throw LossOverflowError("loss derivatives overflow while estimating lambda_diag");
  }
  const Eigen::Index p = shard.p();
  psi = MatrixXd::Zero(p, p);
  {
    MatrixXd xw = d2.cwiseSqrt().asDiagonal() * shard.x;
    psi.selfadjointView<Eigen::Lower>().rankUpdate(xw.transpose(), 1.0 / n);
    psi = psi.selfadjointView<Eigen::Lower>();
  }
  phi = MatrixXd::Zero(p, p);
  {
    MatrixXd xw = d1.cwiseAbs().asDiagonal() * shard.x;
    phi.selfadjointView<Eigen::Lower>().rankUpdate(xw.transpose(), 1.0 / n);
    phi = phi.selfadjointView<Eigen::Lower>();
  }
}

}  // namespace

VectorXd lambda_diag_general(const DataShard& shard, const LossModel& model,
                             const VectorXd& beta_hat, double ridge, int* clamped) {
  validate_shard(model, shard);
  if (beta_hat.size() != shard.p()) {
    throw DimensionError("beta_hat length does not match p");
  }
  if (ridge < 0.0) throw ConfigError("ridge must be nonnegative");
  if (shard.p() >= shard.n() && ridge == 0.0) {
    throw SingularityError(
        "the sandwich branch needs p < n_j; pass a positive ridge value to "
        "regularize X' diag(d1^2) X (p = " +
        std::to_string(shard.p()) + ", n_j = " + std::to_string(shard.n()) + ")");
  }
  MatrixXd psi, phi;
  sandwich_parts(shard, model, beta_hat, psi, phi);
  phi.diagonal().array() += ridge;
  Eigen::LDLT<MatrixXd> ldlt(phi);
  if (ldlt.info() != Eigen::Success) {
    throw SingularityError("X' diag(d1^2) X is singular; pass a positive ridge value");
  }
  const MatrixXd k = ldlt.solve(psi);
  VectorXd out = psi.cwiseProduct(k.transpose()).rowwise().sum();
  if (!out.allFinite()) {
    throw SingularityError(
        "sandwich inverse produced non-finite entries; pass a positive ridge value");
  }
  return clamp_floor(std::move(out), clamped);
}

VectorXd lambda_diag_restricted(const DataShard& shard, const LossModel& model,
                                const VectorXd& beta_hat, double ridge, int* clamped) {
  validate_shard(model, shard);
  if (beta_hat.size() != shard.p()) {
    throw DimensionError("beta_hat length does not match p");
  }
  if (ridge < 0.0) throw ConfigError("ridge must be nonnegative");
  const Eigen::Index p = shard.p();
  const double n = static_cast<double>(shard.n());
  const VectorXd z = linear_predict(shard, beta_hat);
  VectorXd d1, d2;
  detail::eval_derivatives(model, shard.y, z, d1, d2);
  if (!d1.allFinite() || !d2.allFinite()) {
    throw LossOverflowError("loss derivatives overflow while estimating lambda_diag");
  }

  std::vector<int> sel;
  for (Eigen::Index l = 0; l < p; ++l) {
    if (beta_hat[l] != 0.0) sel.push_back(static_cast<int>(l));
  }
  const Eigen::Index m = static_cast<Eigen::Index>(sel.size());
  if (m + 1 >= shard.n() && ridge == 0.0) {
    throw SingularityError("restricted sandwich needs |support| + 1 < n_j or a ridge");
  }

  MatrixXd xsel(shard.n(), m);
  for (Eigen::Index j = 0; j < m; ++j) xsel.col(j) = shard.x.col(sel[j]);
  const VectorXd d1sq = d1.cwiseAbs2();
  const MatrixXd psi_sel = xsel.transpose() * d2.asDiagonal() * xsel / n;   // m x m
  const MatrixXd phi_sel = xsel.transpose() * d1sq.asDiagonal() * xsel / n;
  // Cross terms against every coordinate at once.
  const MatrixXd psi_cross = shard.x.transpose() * d2.asDiagonal() * xsel / n;  // p x m
  const MatrixXd phi_cross = shard.x.transpose() * d1sq.asDiagonal() * xsel / n;
  const VectorXd psi_diag = shard.x.cwiseProduct(shard.x).transpose() * d2 / n;
  const VectorXd phi_diag = shard.x.cwiseProduct(shard.x).transpose() * d1sq / n;

  VectorXd out(p);
  // Selected coordinates: diagonal of the m x m sandwich.
  if (m > 0) {
    MatrixXd phi_r = phi_sel;
    phi_r.diagonal().array() += ridge;
    Eigen::LDLT<MatrixXd> ldlt(phi_r);
    const MatrixXd k = ldlt.solve(psi_sel);
    const VectorXd sel_diag = psi_sel.cwiseProduct(k.transpose()).rowwise().sum();
    if (!sel_diag.allFinite()) {
      throw SingularityError("restricted sandwich is singular; pass a ridge value");
    }
    for (Eigen::Index j = 0; j < m; ++j) out[sel[j]] = sel_diag[j];
  }
  // Unselected coordinates: augment the selected block with that column.
  MatrixXd psi_aug(m + 1, m + 1), phi_aug(m + 1, m + 1);
  psi_aug.topLeftCorner(m, m) = psi_sel;
  phi_aug.topLeftCorner(m, m) = phi_sel;
  std::size_t s = 0;
  for (Eigen::Index l = 0; l < p; ++l) {
    if (s < sel.size() && sel[s] == static_cast<int>(l)) {
      ++s;
      continue;
    }
    psi_aug.block(0, m, m, 1) = psi_cross.row(l).transpose();
    psi_aug.block(m, 0, 1, m) = psi_cross.row(l);
    psi_aug(m, m) = psi_diag[l];
    phi_aug.block(0, m, m, 1) = phi_cross.row(l).transpose();
    phi_aug.block(m, 0, 1, m) = phi_cross.row(l);
    phi_aug(m, m) = phi_diag[l] + ridge;
    phi_aug.topLeftCorner(m, m).diagonal().array() += ridge;
    Eigen::LDLT<MatrixXd> ldlt(phi_aug);
    const VectorXd k = ldlt.solve(psi_aug.col(m));
    out[l] = psi_aug.col(m).dot(k);
    phi_aug.topLeftCorner(m, m) = phi_sel;  // undo the ridge for the next l
    if (!std::isfinite(out[l])) {
      throw SingularityError("restricted sandwich is singular; pass a ridge value");
    }
  }
  return clamp_floor(std::move(out), clamped);
}

VectorXd estimate_lambda_diag(const DataShard& shard, const LossModel& model,
                              const VectorXd& beta_hat, double ridge, int* clamped) {
  validate_shard(model, shard);
  if (beta_hat.size() != shard.p()) {
    throw DimensionError("beta_hat length does not match p");
  }
  if (model.family == Family::Huber) {
    return lambda_diag_general(shard, model, beta_hat, ridge, clamped);
  }
  // Generalized-linear shortcut: diag(Psi_hat), no matrix inverse.
  const double n = static_cast<double>(shard.n());
  const VectorXd z = linear_predict(shard, beta_hat);
  VectorXd d1, d2;
  detail::eval_derivatives(model, shard.y, z, d1, d2);
  if (!d2.allFinite()) {
    throw LossOverflowError("loss curvature overflow while estimating lambda_diag");
  }
  VectorXd out = shard.x.cwiseProduct(shard.x).transpose() * d2 / n;
  return clamp_floor(std::move(out), clamped);
}

double default_sandwich_ridge(const DataShard& shard, const LossModel& model,
                              const VectorXd& beta_hat) {
  if (shard.p() < shard.n()) return 0.0;
  const double n = static_cast<double>(shard.n());
  const VectorXd z = linear_predict(shard, beta_hat);
  VectorXd d1, d2;
  detail::eval_derivatives(model, shard.y, z, d1, d2);
  double trace = 0.0;
  for (Eigen::Index i = 0; i < shard.n(); ++i) {
    trace += d1[i] * d1[i] * shard.x.row(i).squaredNorm();
  }
  trace /= n;
  return 1e-6 * trace / static_cast<double>(shard.p());
}

MatrixXd sandwich_inverse_covariance(const DataShard& shard, const LossModel& model,
                                     const VectorXd& beta_hat, double ridge) {
  validate_shard(model, shard);
  if (beta_hat.size() != shard.p()) {
    throw DimensionError("beta_hat length does not match p");
  }
  if (shard.p() >= shard.n() && ridge == 0.0) {
    throw SingularityError("full sandwich needs p < n_j or a positive ridge value");
  }
  MatrixXd psi, phi;
  sandwich_parts(shard, model, beta_hat, psi, phi);
  phi.diagonal().array() += ridge;
  Eigen::LDLT<MatrixXd> ldlt(phi);
  MatrixXd out = psi * ldlt.solve(psi);
  if (!out.allFinite()) {
    throw SingularityError("full sandwich produced non-finite entries");
  }
  // Symmetrize away factorization round-off.
  out = 0.5 * (out + out.transpose()).eval();
  return out;
}

LocalSummary compute_local_summary(const DataShard& shard, const LossModel& model,
                                   const WorkerOptions& options) {
  LocalFit fit = fit_local(shard, model, options.xi, VectorXd(), options.admm,
                           options.tuning, VectorXd(), options.lambda_grid);
  double ridge = options.ridge;
  if (ridge < 0.0) ridge = default_sandwich_ridge(shard, model, fit.beta);
  LocalSummary s;
  s.worker_id = shard.worker_id;
  s.n_j = static_cast<long>(shard.n());
  s.beta_hat = std::move(fit.beta);
  // The sandwich families go through the support-restricted estimate: the
  // full p x p inverse is numerically meaningless once p approaches n_j,
  // while the selected block stays small and well conditioned.
  s.lambda_diag = model.family == Family::Huber
                      ? lambda_diag_restricted(shard, model, s.beta_hat, ridge)
                      : estimate_lambda_diag(shard, model, s.beta_hat, ridge);
  return s;
}

}  // namespace wavekit
