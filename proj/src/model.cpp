#include "wavekit/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "wavekit/detail/losseval.hpp"

namespace wavekit {

namespace detail {

double guarded_mean_value(const LossModel& model, const VectorXd& y, const VectorXd& z) {
  const double n = static_cast<double>(y.size());
  double total = 0.0;
  switch (model.family) {
    case Family::LeastSquares:
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double r = y[i] - z[i];
        total += 0.5 * r * r;
      }
      break;
    case Family::Huber: {
      const double a = model.huber_a;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double ar = std::abs(y[i] - z[i]);
        total += (ar < a) ? 0.5 * ar * ar : a * ar - 0.5 * a * a;
      }
      break;
    }
    case Family::Logistic:
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double zi = z[i];
        const double softplus =
            zi > 0.0 ? zi + std::log1p(std::exp(-zi)) : std::log1p(std::exp(zi));
        total += -y[i] * zi + softplus;
      }
      break;
    case Family::Poisson:
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double zi = z[i];
        if (zi > kPoissonOverflowZ) return std::numeric_limits<double>::infinity();
        total += -y[i] * zi + std::exp(zi);
      }
      break;
  }
  if (!std::isfinite(total)) return std::numeric_limits<double>::infinity();
  return total / n;
}

void eval_derivatives(const LossModel& model, const VectorXd& y, const VectorXd& z,
                      VectorXd& d1, VectorXd& d2) {
  const Eigen::Index n = y.size();
  d1.resize(n);
  d2.resize(n);
  switch (model.family) {
    case Family::LeastSquares:
      d1 = z - y;
      d2.setOnes();
      break;
    case Family::Huber: {
      const double a = model.huber_a;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double r = y[i] - z[i];
        if (std::abs(r) < a) {
          d1[i] = -r;
          d2[i] = 1.0;
        } else {
          d1[i] = (r >= 0.0) ? -a : a;
          d2[i] = 0.0;
        }
      }
      break;
    }
    case Family::Logistic:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double zi = z[i];
        const double mu = zi >= 0.0 ? 1.0 / (1.0 + std::exp(-zi))
                                    : std::exp(zi) / (1.0 + std::exp(zi));
        d1[i] = mu - y[i];
        d2[i] = mu * (1.0 - mu);
      }
      break;
    case Family::Poisson:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double ez = std::exp(z[i]);
        d1[i] = ez - y[i];
        d2[i] = ez;
      }
      break;
  }
}

}  // namespace detail

const char* family_name(Family f) {
  switch (f) {
    case Family::LeastSquares: return "least_squares";
    case Family::Huber: return "huber";
    case Family::Logistic: return "logistic";
    case Family::Poisson: return "poisson";
  }
  return "unknown";
}

LossModel LossModel::huber(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("huber threshold must be a positive finite real");
  }
  return {Family::Huber, a};
}

namespace {

inline double sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow for large |z|.
inline double log1p_exp(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

}  // namespace

LossEval loss_eval(const LossModel& model, double y, double z) {
  if (!std::isfinite(z)) throw DomainError("linear predictor z must be finite");
  if (!std::isfinite(y)) throw DomainError("response y must be finite");

  switch (model.family) {
    case Family::LeastSquares: {
      const double r = y - z;
      return {0.5 * r * r, -r, 1.0};
    }
    case Family::Huber: {
      const double a = model.huber_a;
      const double r = y - z;
      const double ar = std::abs(r);
      if (ar < a) {
        return {0.5 * r * r, -r, 1.0};
      }
      const double s = (r >= 0.0) ? 1.0 : -1.0;
      return {a * ar - 0.5 * a * a, -a * s, 0.0};
    }
    case Family::Logistic: {
      if (y != 0.0 && y != 1.0) {
        throw DomainError("logistic response must be 0 or 1, got " + std::to_string(y));
      }
      const double mu = sigmoid(z);
      return {-y * z + log1p_exp(z), mu - y, mu * (1.0 - mu)};
    }
    case Family::Poisson: {
      if (y < 0.0 || std::floor(y) != y) {
        throw DomainError("poisson response must be a nonnegative integer, got " +
                          std::to_string(y));
      }
      if (z > kPoissonOverflowZ) {
        throw LossOverflowError("poisson linear predictor z = " + std::to_string(z) +
                                " overflows exp()");
      }
      const double ez = std::exp(z);
      return {-y * z + ez, ez - y, ez};
    }
  }
  throw DomainError("unknown loss family");
}

void validate_response(const LossModel& model, const VectorXd& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double v = y[i];
    if (!std::isfinite(v)) {
      throw DomainError("response entry " + std::to_string(i) + " is not finite");
    }
    if (model.family == Family::Logistic && v != 0.0 && v != 1.0) {
      throw DomainError("logistic response entry " + std::to_string(i) +
                        " must be 0 or 1");
    }
    if (model.family == Family::Poisson && (v < 0.0 || std::floor(v) != v)) {
      throw DomainError("poisson response entry " + std::to_string(i) +
                        " must be a nonnegative integer");
    }
  }
}

void validate_shard(const LossModel& model, const DataShard& shard) {
  if (shard.n() < 1 || shard.p() < 1) {
    throw DimensionError("shard must have at least one row and one column");
  }
  if (shard.y.size() != shard.n()) {
    throw DimensionError("response length " + std::to_string(shard.y.size()) +
                         " does not match row count " + std::to_string(shard.n()));
  }
  if (!shard.x.allFinite()) {
    throw DomainError("design matrix contains non-finite entries");
  }
  validate_response(model, shard.y);
}

TrueModel TrueModel::from_beta(VectorXd beta) {
  TrueModel m;
  m.beta_star = std::move(beta);
  for (Eigen::Index l = 0; l < m.beta_star.size(); ++l) {
    if (m.beta_star[l] != 0.0) m.active_set.push_back(static_cast<int>(l));
  }
  return m;
}

VectorXd linear_predict(const DataShard& shard, const VectorXd& beta) {
  if (beta.size() != shard.p()) {
    throw DimensionError("beta length " + std::to_string(beta.size()) +
                         " does not match p = " + std::to_string(shard.p()));
  }
  return shard.x * beta;
}

double mean_loss(const LossModel& model, const DataShard& shard, const VectorXd& beta) {
  const VectorXd z = linear_predict(shard, beta);
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (model.family == Family::Poisson && z[i] > kPoissonOverflowZ) {
      throw LossOverflowError("poisson overflow at row " + std::to_string(i) +
                              ": z = " + std::to_string(z[i]));
    }
    total += loss_eval(model, shard.y[i], z[i]).value;
  }
  return total / static_cast<double>(shard.n());
}

double mean_loss_guarded(const LossModel& model, const DataShard& shard,
                         const VectorXd& beta) {
  const VectorXd z = linear_predict(shard, beta);
  return detail::guarded_mean_value(model, shard.y, z);
}

}  // namespace wavekit
