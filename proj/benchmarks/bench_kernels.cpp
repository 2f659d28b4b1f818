// Microbenchmarks for the sampler's inner kernels: the per-worker Langevin
// step, the exact master draw, one full round over a simulated cluster, and
// the autocorrelation diagnostics.

#include <vector>

#include <benchmark/benchmark.h>

#include "dglmc/diagnostics.hpp"
#include "dglmc/engine.hpp"
#include "dglmc/kernels.hpp"
#include "dglmc/model.hpp"
#include "dglmc/rng.hpp"
#include "dglmc/synthetic.hpp"
#include "dglmc/tuning.hpp"

namespace {

using namespace dglmc;

struct Fixture {
  SyntheticDataset ds;
  std::vector<PotentialSpec> specs;
  HyperParams hyper;
  PrecisionFactor factor;
  ChainState state;
};

Fixture make_fixture(const std::string& kind, int dim, long n, int shards) {
  Fixture f;
  f.ds = generate_dataset(kind, dim, n, shards, 7);
  if (kind == "gaussian") {
    f.specs = gaussian_model(VectorXd::Zero(dim),
                             MatrixXd::Identity(dim, dim),
                             MatrixXd::Identity(dim, dim), f.ds.data);
  } else {
    MatrixXd features(f.ds.n, dim);
    VectorXd labels(f.ds.n);
    Eigen::Index at = 0;
    for (const DataShard& shard : f.ds.data.shards) {
      features.middleRows(at, shard.size()) = shard.rows;
      labels.segment(at, shard.size()) = shard.labels;
      at += shard.size();
    }
    f.specs = logistic_model(features, labels, 1.0, shards);
  }
  ClusterProfile profile;
  profile.tau = VectorXd::Ones(shards);
  f.hyper = guideline_hyperparams(f.specs, 0.25, profile);
  f.factor = build_precision(f.specs, f.hyper.rho);
  f.state = initial_state(f.specs, f.hyper.rho, f.factor,
                          posterior_mode(f.specs), VectorXd::Zero(dim));
  return f;
}

void BM_LocalStepGaussian(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  Fixture f = make_fixture("gaussian", dim, 20000, 10);
  NormalStream stream(1, 1);
  VectorXd noise(dim);
  VectorXd z = f.state.z[0];
  for (auto _ : state) {
    stream.fill(noise);
    z = lmc_local_step(z, f.state.theta, f.specs[0], f.hyper.rho[0],
                       f.hyper.gamma[0], noise);
    benchmark::DoNotOptimize(z.data());
  }
}
BENCHMARK(BM_LocalStepGaussian)->Arg(2)->Arg(16)->Arg(64);

void BM_LocalStepLogistic(benchmark::State& state) {
  const long shard_obs = state.range(0);
  Fixture f = make_fixture("logistic", 10, shard_obs * 8, 8);
  NormalStream stream(1, 1);
  VectorXd noise(10);
  VectorXd z = f.state.z[0];
  for (auto _ : state) {
    stream.fill(noise);
    z = lmc_local_step(z, f.state.theta, f.specs[0], f.hyper.rho[0],
                       f.hyper.gamma[0], noise);
    benchmark::DoNotOptimize(z.data());
  }
  state.SetItemsProcessed(state.iterations() * shard_obs);
}
BENCHMARK(BM_LocalStepLogistic)->Arg(125)->Arg(1250);

void BM_MasterDraw(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const int shards = static_cast<int>(state.range(1));
  Fixture f = make_fixture("gaussian", dim, 200 * shards, shards);
  NormalStream stream(1, 0);
  VectorXd noise(dim);
  for (auto _ : state) {
    stream.fill(noise);
    VectorXd theta =
        master_draw(f.state.z, f.factor, f.specs, f.hyper.rho, noise);
    benchmark::DoNotOptimize(theta.data());
  }
}
BENCHMARK(BM_MasterDraw)->Args({2, 10})->Args({16, 10})->Args({64, 10})
    ->Args({16, 100});

// One full round: every worker runs its guideline number of local steps,
// then the master refreshes theta.
void BM_DglmcRound(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  Fixture f = make_fixture("gaussian", dim, 20000, 10);
  std::vector<NormalStream> streams;
  for (std::size_t i = 0; i <= f.specs.size(); ++i)
    streams.emplace_back(3, static_cast<std::uint64_t>(i));
  VectorXd noise(dim);
  ChainState s = f.state;
  for (auto _ : state) {
    for (std::size_t i = 0; i < f.specs.size(); ++i)
      s.z[i] = run_local_chain(s.z[i], s.theta, f.specs[i], f.hyper.rho[i],
                               f.hyper.gamma[i], f.hyper.n_local[i],
                               streams[i + 1]);
    streams[0].fill(noise);
    s.theta = master_draw(s.z, f.factor, f.specs, f.hyper.rho, noise);
    benchmark::DoNotOptimize(s.theta.data());
  }
}
BENCHMARK(BM_DglmcRound)->Arg(2)->Arg(16)->Arg(64);

void BM_MomentsWithSe(benchmark::State& state) {
  const long rows = state.range(0);
  NormalStream stream(5, 0);
  MatrixXd samples(rows, 4);
  VectorXd row(4);
  // AR(1) rows so the autocorrelation sums do nontrivial work.
  VectorXd prev = VectorXd::Zero(4);
  for (long t = 0; t < rows; ++t) {
    stream.fill(row);
    prev = 0.9 * prev + row;
    samples.row(t) = prev.transpose();
  }
  for (auto _ : state) {
    Moments m = moments_with_se(samples);
    benchmark::DoNotOptimize(m.iat.data());
  }
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(BM_MomentsWithSe)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
