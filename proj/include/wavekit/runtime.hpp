#pragma once

#include <vector>

#include "wavekit/aggregate.hpp"
#include "wavekit/protocol.hpp"
#include "wavekit/worker.hpp"

namespace wavekit {

enum class RunMode { InProcess, Stream };

struct RunConfig {
  LossModel model;
  WorkerOptions worker;
  NuGridSpec nu_grid;
  double ci_level = 0.95;
  RunMode mode = RunMode::InProcess;
  int worker_parallelism = 1;
  // Pilot for the sparsification weights: the simple average by default,
  // optionally the weighted-average point estimate itself.
  bool delta_from_wave = false;
};

struct RunStats {
  long messages_sent = 0;
  long messages_received = 0;
  long bytes_on_wire = 0;
};

struct PipelineResult {
  AggregateResult result;
  std::vector<LocalSummary> summaries;  // sorted by worker_id
  RunStats stats;
};

// Contiguous row partition into k shards, sizes differing by at most one.
std::vector<DataShard> shard_dataset(const MatrixXd& x, const VectorXd& y, int k);

// Contiguous partition with explicit sizes (must sum to the row count).
std::vector<DataShard> shard_dataset(const MatrixXd& x, const VectorXd& y,
                                     const std::vector<long>& sizes);

// Master-side ensembling of already-collected summaries: weighted average,
// sparsification weights from the pilot, BIC selection of nu, confidence
// half-widths. Summaries are sorted by worker_id first, so the result is
// independent of arrival order.
AggregateResult aggregate_summaries(std::vector<LocalSummary> summaries,
                                    const RunConfig& cfg);

// The single-round pipeline: every shard runs the local fit (up to
// worker_parallelism concurrently), ships one summary each (through the wire
// codec in Stream mode), and the master aggregates. Deterministic given the
// shards and config, whatever the parallelism. Worker failures abort the run
// with the worker named.
PipelineResult run_pipeline(const std::vector<DataShard>& shards, const RunConfig& cfg);

}  // namespace wavekit
