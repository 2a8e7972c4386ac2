#include "wavekit/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace wavekit {

namespace {

void check_summaries(const std::vector<LocalSummary>& summaries) {
  if (summaries.empty()) throw DimensionError("need at least one local summary");
  const Eigen::Index p = summaries.front().beta_hat.size();
  for (const auto& s : summaries) {
    if (s.beta_hat.size() != p || s.lambda_diag.size() != p) {
      throw DimensionError("summary from worker " + std::to_string(s.worker_id) +
                           " has mismatched dimension");
    }
    if (s.n_j < 1) {
      throw DataIntegrityError("summary from worker " + std::to_string(s.worker_id) +
                               " has nonpositive sample count");
    }
  }
}

void check_lambda_diag(const std::vector<LocalSummary>& summaries) {
  for (const auto& s : summaries) {
    for (Eigen::Index l = 0; l < s.lambda_diag.size(); ++l) {
      const double g = s.lambda_diag[l];
      if (!(g > 0.0) || !std::isfinite(g)) {
        throw DataIntegrityError("worker " + std::to_string(s.worker_id) +
                                 " shipped a nonpositive precision at coordinate " +
                                 std::to_string(l));
      }
    }
  }
}

// Shared combination loop. With `gamma2 == nullptr` every ratio is exactly 1,
// which is also what per-coordinate normalization produces when all workers
// ship identical precisions -- so the collapse onto the simple average is
// bit-exact by construction.
VectorXd combine(const std::vector<LocalSummary>& summaries, const VectorXd& alpha,
                 const MatrixXd* gamma2) {
  const Eigen::Index p = summaries.front().beta_hat.size();
  const std::size_t k = summaries.size();
  VectorXd out(p);
  std::vector<double> t(k);
  for (Eigen::Index l = 0; l < p; ++l) {
    double scale = 1.0;
    if (gamma2) {
      scale = (*gamma2)(0, l);
      for (std::size_t j = 1; j < k; ++j) scale = std::max(scale, (*gamma2)(j, l));
    }
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double ratio = gamma2 ? (*gamma2)(static_cast<Eigen::Index>(j), l) / scale : 1.0;
      t[j] = alpha[static_cast<Eigen::Index>(j)] * ratio;
      s += t[j];
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      acc += (t[j] / s) * summaries[j].beta_hat[l];
    }
    out[l] = acc;
  }
  return out;
}

}  // namespace

std::vector<int> support_of(const VectorXd& v) {
  std::vector<int> out;
  for (Eigen::Index l = 0; l < v.size(); ++l) {
    if (v[l] != 0.0) out.push_back(static_cast<int>(l));
  }
  return out;
}

VectorXd worker_alphas(const std::vector<LocalSummary>& summaries) {
  check_summaries(summaries);
  double total = 0.0;
  for (const auto& s : summaries) total += static_cast<double>(s.n_j);
  VectorXd alpha(static_cast<Eigen::Index>(summaries.size()));
  for (std::size_t j = 0; j < summaries.size(); ++j) {
    alpha[static_cast<Eigen::Index>(j)] = static_cast<double>(summaries[j].n_j) / total;
  }
  return alpha;
}

VectorXd simple_average(const std::vector<LocalSummary>& summaries) {
  check_summaries(summaries);
  return combine(summaries, worker_alphas(summaries), nullptr);
}

VectorXd wave_variance(const VectorXd& alpha, const MatrixXd& gamma2,
                       const MatrixXd& sigma2) {
  if (gamma2.rows() != alpha.size() || sigma2.rows() != alpha.size() ||
      gamma2.cols() != sigma2.cols()) {
    throw DimensionError("wave_variance inputs disagree on K or p");
  }
  const Eigen::Index p = gamma2.cols();
  VectorXd out(p);
  for (Eigen::Index l = 0; l < p; ++l) {
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index j = 0; j < alpha.size(); ++j) {
      const double g = gamma2(j, l);
      num += alpha[j] * g * g * sigma2(j, l);
      den += alpha[j] * g;
    }
    out[l] = num / (den * den);
  }
  return out;
}

std::pair<VectorXd, VarianceEstimate> wave_point(const std::vector<LocalSummary>& summaries) {
  check_summaries(summaries);
  check_lambda_diag(summaries);
  const Eigen::Index p = summaries.front().beta_hat.size();
  const Eigen::Index k = static_cast<Eigen::Index>(summaries.size());
  const VectorXd alpha = worker_alphas(summaries);

  MatrixXd gamma2(k, p);
  for (Eigen::Index j = 0; j < k; ++j) gamma2.row(j) = summaries[j].lambda_diag.transpose();

  VectorXd beta = combine(summaries, alpha, &gamma2);

  VarianceEstimate var;
  var.v_diag = gamma2.transpose() * alpha;  // sum_j alpha_j gamma2_jl
  // Workers ship only the diagonal precision, so sigma2 is approximated by
  // its coordinatewise inverse.
  var.var_wave = wave_variance(alpha, gamma2, gamma2.cwiseInverse());
  return {std::move(beta), std::move(var)};
}

VectorXd full_ls_reference(
    const std::vector<std::pair<VectorXd, MatrixXd>>& summaries_full,
    const VectorXd& alpha) {
  if (summaries_full.empty()) throw DimensionError("need at least one summary");
  if (alpha.size() != static_cast<Eigen::Index>(summaries_full.size())) {
    throw DimensionError("alpha length must equal the number of workers");
  }
  const Eigen::Index p = summaries_full.front().first.size();
  if (p > 200) {
    throw ConfigError("full_ls_reference is a reference path guarded to p <= 200");
  }
  MatrixXd a = MatrixXd::Zero(p, p);
  VectorXd b = VectorXd::Zero(p);
  for (std::size_t j = 0; j < summaries_full.size(); ++j) {
    const auto& [beta_j, m_j] = summaries_full[j];
    if (beta_j.size() != p || m_j.rows() != p || m_j.cols() != p) {
      throw DimensionError("full summary " + std::to_string(j) + " has mismatched size");
    }
    const double w = alpha[static_cast<Eigen::Index>(j)];
    a += w * m_j;
    b += w * (m_j * beta_j);
  }
  Eigen::LDLT<MatrixXd> ldlt(a);
  const VectorXd x = ldlt.solve(b);
  if (!(ldlt.rcond() > 1e-12) || !x.allFinite() ||
      (a * x - b).norm() > 1e-8 * (1.0 + b.norm())) {
    throw SingularityError("accumulated precision matrix is singular");
  }
  return x;
}

AdaptiveWeights delta_weights(const VectorXd& beta_av, double xi) {
  return adaptive_weights(beta_av, xi);
}

VectorXd wave_sparse(const VectorXd& beta_wave, const VectorXd& v_diag,
                     const AdaptiveWeights& delta, double nu) {
  const Eigen::Index p = beta_wave.size();
  if (v_diag.size() != p || delta.omega.size() != p) {
    throw DimensionError("wave_sparse inputs disagree on p");
  }
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw ConfigError("nu must be a nonnegative finite real");
  }
  VectorXd out(p);
  for (Eigen::Index l = 0; l < p; ++l) {
    if (!(v_diag[l] > 0.0)) {
      throw DataIntegrityError("v_diag must be strictly positive (coordinate " +
                               std::to_string(l) + ")");
    }
    const double d = delta.omega[l];
    if (std::isinf(d)) {
      out[l] = 0.0;  // infinite penalty, excluded regardless of nu
    } else {
      out[l] = soft_threshold(beta_wave[l], nu * d / v_diag[l]);
    }
  }
  return out;
}

VectorXd make_nu_grid(const VectorXd& beta_wave, const VectorXd& v_diag,
                      const AdaptiveWeights& delta, const NuGridSpec& spec) {
  if (spec.count < 1) throw ConfigError("nu grid needs at least one point");
  if (!(spec.min_nu > 0.0)) throw ConfigError("nu grid min_nu must be positive");
  double nu_max = 0.0;
  for (Eigen::Index l = 0; l < beta_wave.size(); ++l) {
    if (std::isfinite(delta.omega[l]) && delta.omega[l] > 0.0) {
      nu_max = std::max(nu_max, std::abs(beta_wave[l]) * v_diag[l] / delta.omega[l]);
    }
  }
  if (nu_max <= 0.0) return VectorXd::Zero(1);
  if (nu_max <= spec.min_nu || spec.count == 1) {
    VectorXd g(1);
    g[0] = nu_max;
    return g;
  }
  VectorXd grid(spec.count);
  const double log_min = std::log(spec.min_nu);
  const double log_max = std::log(nu_max);
  for (int i = 0; i < spec.count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(spec.count - 1);
    grid[i] = std::exp(log_min + t * (log_max - log_min));
  }
  return grid;
}

NuChoice select_nu_bic(const VectorXd& beta_wave, const VectorXd& v_diag,
                       const AdaptiveWeights& delta, const VectorXd& nu_grid,
                       long total_n) {
  if (nu_grid.size() == 0) throw ConfigError("nu grid must be nonempty");
  if (total_n < 1) throw ConfigError("total sample size must be at least 1");
  std::vector<double> grid(nu_grid.data(), nu_grid.data() + nu_grid.size());
  std::sort(grid.begin(), grid.end(), std::greater<double>());

  const double n = static_cast<double>(total_n);
  const double log_n = std::log(n);
  NuChoice best;
  double best_crit = std::numeric_limits<double>::infinity();
  for (double nu : grid) {
    VectorXd b = wave_sparse(beta_wave, v_diag, delta, nu);
    double fit = 0.0;
    long d = 0;
    for (Eigen::Index l = 0; l < b.size(); ++l) {
      const double diff = b[l] - beta_wave[l];
      fit += v_diag[l] * diff * diff;
      if (b[l] != 0.0) ++d;
    }
    const double crit = fit + log_n * static_cast<double>(d) / n;
    if (crit < best_crit) {  // sweeping descending: ties keep the larger nu
      best_crit = crit;
      best.nu_hat = nu;
      best.beta_sparse = std::move(b);
      best.criterion = crit;
    }
  }
  return best;
}

double normal_quantile(double prob) {
  if (!(prob > 0.0) || !(prob < 1.0)) {
    throw DomainError("normal_quantile needs a probability strictly inside (0, 1)");
  }
  // Acklam's rational approximation followed by one Halley refinement.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (prob < p_low) {
    const double q = std::sqrt(-2.0 * std::log(prob));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (prob <= 1.0 - p_low) {
    const double q = prob - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - prob));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double sqrt_2pi = 2.506628274631000502;
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - prob;
  const double u = e * sqrt_2pi * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

VectorXd confidence_intervals(const VarianceEstimate& var, long total_n, double level) {
  if (!(level > 0.0) || !(level < 1.0)) {
    throw ConfigError("confidence level must lie strictly inside (0, 1)");
  }
  if (total_n < 1) throw ConfigError("total sample size must be at least 1");
  const double z = normal_quantile(0.5 * (1.0 + level));
  const double n = static_cast<double>(total_n);
  VectorXd out(var.var_wave.size());
  for (Eigen::Index l = 0; l < out.size(); ++l) {
    out[l] = z * std::sqrt(var.var_wave[l] / n);
  }
  return out;
}

}  // namespace wavekit
