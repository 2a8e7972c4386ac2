#pragma once

#include <Eigen/Dense>

#include "wavekit/model.hpp"

namespace wavekit::detail {

// Mean loss over rows at predictor z. Returns +inf instead of throwing on
// overflow so line searches can reject the step.
double guarded_mean_value(const LossModel& model, const VectorXd& y, const VectorXd& z);

// Rowwise d1 and d2 at predictor z; the caller guarantees z is in range.
void eval_derivatives(const LossModel& model, const VectorXd& y, const VectorXd& z,
                      VectorXd& d1, VectorXd& d2);

}  // namespace wavekit::detail
