#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wavekit/errors.hpp"

namespace wavekit {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Family { LeastSquares, Huber, Logistic, Poisson };

const char* family_name(Family f);

// A convex, twice-differentiable loss L(y, z) in the linear predictor z.
// The least-squares loss carries a 1/2 prefactor so that d2 == 1; any global
// scalar on L cancels out of the aggregation weights and is absorbed into the
// penalty grids.
struct LossModel {
  Family family = Family::LeastSquares;
  double huber_a = 1.345;  // threshold of the Huber branch, used only for Huber

  static LossModel least_squares() { return {Family::LeastSquares, 0.0}; }
  static LossModel huber(double a);
  static LossModel logistic() { return {Family::Logistic, 0.0}; }
  static LossModel poisson() { return {Family::Poisson, 0.0}; }
};

struct LossEval {
  double value;
  double d1;  // dL/dz
  double d2;  // d2L/dz2, >= 0 for every family
};

// exp(z) beyond this is treated as overflow for the Poisson loss.
inline constexpr double kPoissonOverflowZ = 700.0;

// Evaluates L(y, z) with first and second derivatives in z.
// Throws DomainError when y is invalid for the family and LossOverflowError
// when exp(z) would overflow (Poisson).
LossEval loss_eval(const LossModel& model, double y, double z);

// One worker's slice of the data: rows of the design matrix plus responses.
struct DataShard {
  int worker_id = 0;
  MatrixXd x;   // n_j x p, row-major semantics (row i = observation i)
  VectorXd y;   // length n_j

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }
};

// Checks shard invariants: sizes, finiteness and per-family response domain.
void validate_shard(const LossModel& model, const DataShard& shard);

// Checks only the response domain; index of the first offender is reported.
void validate_response(const LossModel& model, const VectorXd& y);

struct TrueModel {
  VectorXd beta_star;
  std::vector<int> active_set;  // sorted indices of the nonzero entries

  static TrueModel from_beta(VectorXd beta);
};

// X beta for every row of the shard.
VectorXd linear_predict(const DataShard& shard, const VectorXd& beta);

// Mean loss (1/n) sum_i L(y_i, x_i' beta) over the given rows.
// Overflow errors name the offending row.
double mean_loss(const LossModel& model, const DataShard& shard, const VectorXd& beta);

// Same but returns +inf instead of throwing on overflow (tuning criteria
// treat such fits as arbitrarily bad).
double mean_loss_guarded(const LossModel& model, const DataShard& shard,
                         const VectorXd& beta);

}  // namespace wavekit
