#include "wavekit/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

namespace wavekit {

long Rng::poisson(double rate) {
  if (!(rate >= 0.0)) return 0;
  if (rate < 700.0) {
    // Knuth: count uniforms until their product drops below exp(-rate).
    const double limit = std::exp(-rate);
    long k = 0;
    double prod = uniform01();
    while (prod > limit) {
      ++k;
      prod *= uniform01();
    }
    return k;
  }
  const double v = rate + std::sqrt(rate) * normal();
  return v > 0.0 ? static_cast<long>(std::llround(v)) : 0;
}

const char* example_name(Example e) {
  switch (e) {
    case Example::Linear: return "linear";
    case Example::Logistic: return "logistic";
    case Example::Poisson: return "poisson";
    case Example::HuberLinear: return "huber";
  }
  return "unknown";
}

const char* setting_name(Setting s) {
  return s == Setting::Homogeneous ? "homogeneous" : "heterogeneous";
}

LossModel example_loss(Example example) {
  switch (example) {
    case Example::Linear: return LossModel::least_squares();
    case Example::Logistic: return LossModel::logistic();
    case Example::Poisson: return LossModel::poisson();
    case Example::HuberLinear: return LossModel::huber(1.345);
  }
  return LossModel::least_squares();
}

TrueModel true_beta(Example example, int p) {
  if (p < 5) {
    throw ConfigError("the synthetic examples embed five leading coefficients; p >= 5");
  }
  VectorXd beta = VectorXd::Zero(p);
  switch (example) {
    case Example::Linear:
    case Example::Logistic:
      beta[0] = 3.0;
      beta[1] = 1.5;
      beta[4] = 2.0;
      break;
    case Example::Poisson:
      beta[0] = 0.8;
      beta[1] = -0.6;
      beta[4] = 0.4;
      break;
    case Example::HuberLinear:
      beta.head(5).setConstant(3.0);
      break;
  }
  return TrueModel::from_beta(std::move(beta));
}

VectorXd sample_ar1_row(double rho, int p, Rng& rng) {
  if (!(std::abs(rho) < 1.0)) throw ConfigError("AR(1) correlation must satisfy |rho| < 1");
  VectorXd x(p);
  x[0] = rng.normal();
  const double s = std::sqrt(1.0 - rho * rho);
  for (int k = 1; k < p; ++k) {
    x[k] = rho * x[k - 1] + s * rng.normal();
  }
  return x;
}

GeneratedData generate(const GenConfig& cfg, long* poisson_clips) {
  if (cfg.k < 1 || cfg.n_per_worker < 1) {
    throw ConfigError("need at least one worker and one row per worker");
  }
  if (cfg.example == Example::HuberLinear && cfg.setting == Setting::Heterogeneous) {
    throw ConfigError("the huber example is defined for the homogeneous setting only");
  }
  GeneratedData out;
  out.truth = true_beta(cfg.example, cfg.p);
  out.shards.reserve(static_cast<std::size_t>(cfg.k));
  long clips = 0;

  for (int j = 0; j < cfg.k; ++j) {
    const auto wj = static_cast<std::uint64_t>(j);
    Rng cov_rng(cfg.seed, wj, Rng::Stream::Covariates);
    Rng noise_rng(cfg.seed, wj, Rng::Stream::Noise);
    Rng param_rng(cfg.seed, wj, Rng::Stream::WorkerParams);

    double rho = 0.5;
    double noise_sd = 1.0;
    if (cfg.setting == Setting::Heterogeneous) {
      rho = param_rng.uniform(0.1, 0.8);
      if (cfg.example == Example::Linear) {
        noise_sd = std::sqrt(param_rng.uniform(1.0, 4.0));
      }
    }

    DataShard shard;
    shard.worker_id = j;
    shard.x.resize(cfg.n_per_worker, cfg.p);
    shard.y.resize(cfg.n_per_worker);
    for (long i = 0; i < cfg.n_per_worker; ++i) {
      shard.x.row(i) = sample_ar1_row(rho, cfg.p, cov_rng).transpose();
      const double z = shard.x.row(i).dot(out.truth.beta_star);
      switch (cfg.example) {
        case Example::Linear:
          shard.y[i] = z + noise_sd * noise_rng.normal();
          break;
        case Example::Logistic: {
          const double prob = 1.0 / (1.0 + std::exp(-z));
          shard.y[i] = noise_rng.uniform01() < prob ? 1.0 : 0.0;
          break;
        }
        case Example::Poisson: {
          double zc = z;
          if (zc > kPoissonRateClip) {
            zc = kPoissonRateClip;
            ++clips;
          }
          shard.y[i] = static_cast<double>(noise_rng.poisson(std::exp(zc)));
          break;
        }
        case Example::HuberLinear:
          shard.y[i] = z + noise_rng.student_t3();
          break;
      }
    }
    out.shards.push_back(std::move(shard));
  }
  if (poisson_clips) *poisson_clips = clips;
  return out;
}

namespace {

void append_double(std::string& buf, double v) {
  char tmp[32];
  const auto res = std::to_chars(tmp, tmp + sizeof(tmp), v);
  buf.append(tmp, res.ptr);
}

}  // namespace

void write_shard_csv(std::ostream& os, const DataShard& shard) {
  std::string line = "y";
  for (Eigen::Index k = 0; k < shard.p(); ++k) {
    line += ",x" + std::to_string(k + 1);
  }
  line += '\n';
  os << line;
  for (Eigen::Index i = 0; i < shard.n(); ++i) {
    line.clear();
    append_double(line, shard.y[i]);
    for (Eigen::Index k = 0; k < shard.p(); ++k) {
      line += ',';
      append_double(line, shard.x(i, k));
    }
    line += '\n';
    os << line;
  }
}

DataShard read_shard_csv(std::istream& is, int worker_id) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty CSV: missing header row");
  long p = std::count(line.begin(), line.end(), ',');
  if (p < 1 || line.substr(0, 1) != "y") {
    throw IoError("CSV header must be y,x1,...,xp");
  }
  std::vector<std::vector<double>> rows;
  long line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(p) + 1);
    const char* ptr = line.data();
    const char* end = line.data() + line.size();
    while (ptr <= end) {
      double v = 0.0;
      const auto res = std::from_chars(ptr, end, v);
      if (res.ec != std::errc()) {
        throw IoError("CSV parse error at line " + std::to_string(line_no));
      }
      row.push_back(v);
      if (res.ptr == end) break;
      if (*res.ptr != ',') {
        throw IoError("CSV parse error at line " + std::to_string(line_no));
      }
      ptr = res.ptr + 1;
    }
    if (static_cast<long>(row.size()) != p + 1) {
      throw IoError("CSV row at line " + std::to_string(line_no) + " has " +
                    std::to_string(row.size()) + " fields, expected " +
                    std::to_string(p + 1));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("CSV has no data rows");
  DataShard shard;
  shard.worker_id = worker_id;
  shard.x.resize(static_cast<Eigen::Index>(rows.size()), p);
  shard.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    shard.y[static_cast<Eigen::Index>(i)] = rows[i][0];
    for (long k = 0; k < p; ++k) {
      shard.x(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k) + 1];
    }
  }
  return shard;
}

}  // namespace wavekit
