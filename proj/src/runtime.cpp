#include "wavekit/runtime.hpp"

#include <algorithm>
#include <sstream>
#include <string>

#include "wavekit/parallel.hpp"

namespace wavekit {

std::vector<DataShard> shard_dataset(const MatrixXd& x, const VectorXd& y, int k) {
  const long n = static_cast<long>(x.rows());
  if (k < 1) throw ConfigError("need at least one shard");
  if (n < k) {
    throw ConfigError("cannot split " + std::to_string(n) + " rows into " +
                      std::to_string(k) + " shards");
  }
  std::vector<long> sizes(static_cast<std::size_t>(k), n / k);
  for (long r = 0; r < n % k; ++r) sizes[static_cast<std::size_t>(r)] += 1;
  return shard_dataset(x, y, sizes);
}

std::vector<DataShard> shard_dataset(const MatrixXd& x, const VectorXd& y,
                                     const std::vector<long>& sizes) {
  const long n = static_cast<long>(x.rows());
  if (y.size() != x.rows()) throw DimensionError("x and y row counts differ");
  long total = 0;
  for (long s : sizes) {
    if (s < 1) throw ConfigError("every shard size must be at least 1");
    total += s;
  }
  if (total != n) {
    throw ConfigError("shard sizes sum to " + std::to_string(total) + " but N = " +
                      std::to_string(n));
  }
  std::vector<DataShard> shards;
  shards.reserve(sizes.size());
  long start = 0;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    DataShard shard;
    shard.worker_id = static_cast<int>(j);
    shard.x = x.middleRows(start, sizes[j]);
    shard.y = y.segment(start, sizes[j]);
    shards.push_back(std::move(shard));
    start += sizes[j];
  }
  return shards;
}

AggregateResult aggregate_summaries(std::vector<LocalSummary> summaries,
                                    const RunConfig& cfg) {
  std::sort(summaries.begin(), summaries.end(),
            [](const LocalSummary& a, const LocalSummary& b) {
              return a.worker_id < b.worker_id;
            });
  long total_n = 0;
  for (const auto& s : summaries) total_n += s.n_j;

  auto [beta_wave, var] = wave_point(summaries);
  const VectorXd pilot =
      cfg.delta_from_wave ? beta_wave : simple_average(summaries);
  const AdaptiveWeights delta = delta_weights(pilot, cfg.worker.xi);
  const VectorXd nu_grid = make_nu_grid(beta_wave, var.v_diag, delta, cfg.nu_grid);
  NuChoice choice = select_nu_bic(beta_wave, var.v_diag, delta, nu_grid, total_n);

  AggregateResult out;
  out.beta_wave = std::move(beta_wave);
  out.beta_sparse = std::move(choice.beta_sparse);
  out.nu_hat = choice.nu_hat;
  out.support = support_of(out.beta_sparse);
  out.ci_halfwidth = confidence_intervals(var, total_n, cfg.ci_level);
  out.alpha = worker_alphas(summaries);
  return out;
}

PipelineResult run_pipeline(const std::vector<DataShard>& shards, const RunConfig& cfg) {
  if (shards.empty()) throw ConfigError("need at least one shard");
  const Eigen::Index p = shards.front().p();
  for (const auto& s : shards) {
    if (s.p() != p) throw DimensionError("shards disagree on p");
  }
  if (cfg.worker_parallelism < 1) {
    throw ConfigError("worker_parallelism must be at least 1");
  }

  // Failures carry the worker id; parallel_for rethrows the lowest-index one,
  // so attribution does not depend on scheduling.
  std::vector<LocalSummary> summaries(shards.size());
  parallel_for(static_cast<long>(shards.size()), cfg.worker_parallelism, [&](long i) {
    const auto idx = static_cast<std::size_t>(i);
    const std::string who = "worker " + std::to_string(shards[idx].worker_id) + ": ";
    try {
      summaries[idx] = compute_local_summary(shards[idx], cfg.model, cfg.worker);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(who + e.what(), e.residual);
    } catch (const std::exception& e) {
      throw Error(who + e.what());
    }
  });

  PipelineResult out;
  if (cfg.mode == RunMode::Stream) {
    // Exercise the wire protocol: one message per worker over a byte stream.
    std::stringstream wire;
    for (const auto& s : summaries) {
      const std::string msg = encode_summary(s);
      out.stats.bytes_on_wire += static_cast<long>(msg.size());
      out.stats.messages_sent += 1;
      wire << msg;
    }
    out.summaries = read_summaries(wire);
    out.stats.messages_received = static_cast<long>(out.summaries.size());
  } else {
    out.summaries = std::move(summaries);
  }
  out.result = aggregate_summaries(out.summaries, cfg);
  std::sort(out.summaries.begin(), out.summaries.end(),
            [](const LocalSummary& a, const LocalSummary& b) {
              return a.worker_id < b.worker_id;
            });
  return out;
}

}  // namespace wavekit
