#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "wavekit/model.hpp"
#include "wavekit/rng.hpp"

namespace wavekit {

enum class Example { Linear, Logistic, Poisson, HuberLinear };
enum class Setting { Homogeneous, Heterogeneous };

const char* example_name(Example e);
const char* setting_name(Setting s);

// Linear predictors are clipped here before exponentiation when generating
// Poisson responses; a clip is reported through the optional warning counter.
inline constexpr double kPoissonRateClip = 20.0;

struct GenConfig {
  Example example = Example::Linear;
  Setting setting = Setting::Homogeneous;
  int k = 1;
  long n_per_worker = 100;
  int p = 5;
  std::uint64_t seed = 0;
};

// The fixed coefficient vectors behind the four synthetic examples; the first
// five entries carry the signal, the rest are zero. Needs p >= 5.
TrueModel true_beta(Example example, int p);

// One covariate row with AR(1) correlation rho^{|i-j|}: X_1 ~ N(0,1),
// X_k = rho X_{k-1} + sqrt(1-rho^2) eps_k. No p x p factorization involved.
VectorXd sample_ar1_row(double rho, int p, Rng& rng);

struct GeneratedData {
  std::vector<DataShard> shards;
  TrueModel truth;
};

// Seeded shard generation. Every draw for worker j comes from streams keyed
// by (seed, j, stream-kind), so adding workers never disturbs existing ones.
// Homogeneous: rho = 0.5, unit noise. Heterogeneous: rho_j ~ U(0.1, 0.8) per
// worker, plus noise variance s_j ~ U(1, 4) for the linear example.
// HuberLinear draws t(3) errors and supports the homogeneous setting only.
GeneratedData generate(const GenConfig& cfg, long* poisson_clips = nullptr);

// CSV with a header row: response column `y`, covariates `x1`..`xp`.
void write_shard_csv(std::ostream& os, const DataShard& shard);

// Inverse of write_shard_csv; throws IoError on malformed input.
DataShard read_shard_csv(std::istream& is, int worker_id = 0);

// The loss family the example is fit with.
LossModel example_loss(Example example);

}  // namespace wavekit
