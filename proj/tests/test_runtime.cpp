#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <random>

#include "wavekit/datagen.hpp"
#include "wavekit/runtime.hpp"

using namespace wavekit;

namespace {

bool bit_equal(const VectorXd& a, const VectorXd& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

bool same_result(const AggregateResult& a, const AggregateResult& b) {
  return bit_equal(a.beta_wave, b.beta_wave) && bit_equal(a.beta_sparse, b.beta_sparse) &&
         a.nu_hat == b.nu_hat && a.support == b.support &&
         bit_equal(a.ci_halfwidth, b.ci_halfwidth) && bit_equal(a.alpha, b.alpha);
}

std::vector<DataShard> small_problem(int k, long n_per_worker, int p, std::uint64_t seed) {
  GenConfig cfg;
  cfg.example = Example::Linear;
  cfg.k = k;
  cfg.n_per_worker = n_per_worker;
  cfg.p = p;
  cfg.seed = seed;
  return generate(cfg).shards;
}

}  // namespace

TEST_SUITE_BEGIN("runtime");

TEST_CASE("shard_dataset splits") {
  MatrixXd x(10, 2);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = i;
    x(i, 1) = -i;
  }
  VectorXd y = x.col(0);

  SUBCASE("uniform ceiling split") {
    const auto shards = shard_dataset(x, y, 3);
    REQUIRE(shards.size() == 3);
    CHECK(shards[0].n() == 4);
    CHECK(shards[1].n() == 3);
    CHECK(shards[2].n() == 3);
    CHECK(shards[0].worker_id == 0);
    CHECK(shards[2].worker_id == 2);
    // Row order preserved and contiguous.
    CHECK(shards[0].x(0, 0) == 0.0);
    CHECK(shards[1].x(0, 0) == 4.0);
    CHECK(shards[2].x(0, 0) == 7.0);
  }
  SUBCASE("k = 1 keeps everything") {
    const auto shards = shard_dataset(x, y, 1);
    REQUIRE(shards.size() == 1);
    CHECK(shards[0].n() == 10);
  }
  SUBCASE("explicit sizes") {
    const auto shards = shard_dataset(x, y, std::vector<long>{2, 8});
    REQUIRE(shards.size() == 2);
    CHECK(shards[0].n() == 2);
    CHECK(shards[1].n() == 8);
    CHECK(shards[1].x(0, 0) == 2.0);
  }
  SUBCASE("k > N is a configuration error") {
    CHECK_THROWS_AS(shard_dataset(x, y, 11), ConfigError);
  }
  SUBCASE("sizes must sum to N") {
    CHECK_THROWS_AS(shard_dataset(x, y, std::vector<long>{2, 7}), ConfigError);
  }
}

TEST_CASE("run_pipeline: single-worker degenerate case") {
  const auto shards = small_problem(1, 120, 8, 31);
  RunConfig cfg;
  cfg.model = LossModel::least_squares();
  const PipelineResult pipe = run_pipeline(shards, cfg);

  // Same thing assembled by hand from the worker's own summary.
  const LocalSummary s = compute_local_summary(shards[0], cfg.model, cfg.worker);
  const AggregateResult manual = aggregate_summaries({s}, cfg);
  CHECK(same_result(pipe.result, manual));
  CHECK(bit_equal(pipe.result.beta_wave, s.beta_hat));
}

TEST_CASE("run_pipeline determinism across worker parallelism") {
  const auto shards = small_problem(6, 60, 10, 37);
  RunConfig cfg;
  cfg.model = LossModel::least_squares();
  cfg.worker_parallelism = 1;
  const PipelineResult p1 = run_pipeline(shards, cfg);
  cfg.worker_parallelism = 4;
  const PipelineResult p4 = run_pipeline(shards, cfg);
  cfg.worker_parallelism = 8;
  const PipelineResult p8 = run_pipeline(shards, cfg);
  CHECK(same_result(p1.result, p4.result));
  CHECK(same_result(p1.result, p8.result));
}

TEST_CASE("stream mode matches in-process and counts one message per worker") {
  const auto shards = small_problem(5, 80, 6, 41);
  RunConfig cfg;
  cfg.model = LossModel::least_squares();
  const PipelineResult in_proc = run_pipeline(shards, cfg);
  cfg.mode = RunMode::Stream;
  const PipelineResult streamed = run_pipeline(shards, cfg);
  CHECK(same_result(in_proc.result, streamed.result));
  CHECK(streamed.stats.messages_sent == 5);
  CHECK(streamed.stats.messages_received == 5);
  CHECK(streamed.stats.bytes_on_wire > 0);
  CHECK(in_proc.stats.messages_sent == 0);
}

TEST_CASE("aggregation is invariant under summary arrival order") {
  const auto shards = small_problem(5, 70, 6, 43);
  RunConfig cfg;
  cfg.model = LossModel::least_squares();
  const PipelineResult pipe = run_pipeline(shards, cfg);

  std::vector<LocalSummary> shuffled = pipe.summaries;
  std::mt19937_64 gen(9);
  for (int t = 0; t < 10; ++t) {
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    const AggregateResult again = aggregate_summaries(shuffled, cfg);
    CHECK(same_result(pipe.result, again));
  }
}

TEST_CASE("aggregate result invariants") {
  const auto shards = small_problem(4, 90, 7, 47);
  RunConfig cfg;
  cfg.model = LossModel::least_squares();
  const PipelineResult pipe = run_pipeline(shards, cfg);
  CHECK(pipe.result.support == support_of(pipe.result.beta_sparse));
  CHECK(pipe.result.alpha.sum() == doctest::Approx(1.0).epsilon(1e-12));
  for (Eigen::Index l = 0; l < pipe.result.ci_halfwidth.size(); ++l) {
    CHECK(pipe.result.ci_halfwidth[l] >= 0.0);
  }
}

TEST_CASE("worker failures carry attribution") {
  auto shards = small_problem(3, 4, 6, 53);  // p > n_j: the huber sandwich needs a ridge
  RunConfig cfg;
  cfg.model = LossModel::huber(1.345);
  cfg.worker.ridge = 0.0;  // force the singular branch
  CHECK_THROWS_WITH_AS(run_pipeline(shards, cfg), doctest::Contains("worker 0"), Error);
}

TEST_CASE("pipeline rejects inconsistent shards") {
  auto shards = small_problem(2, 30, 5, 59);
  shards[1].x = MatrixXd::Zero(30, 4);
  shards[1].y = VectorXd::Zero(30);
  RunConfig cfg;
  CHECK_THROWS_AS(run_pipeline(shards, cfg), DimensionError);
  CHECK_THROWS_AS(run_pipeline({}, cfg), ConfigError);
}

TEST_SUITE_END();
