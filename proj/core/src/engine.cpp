#include "dglmc/engine.hpp"

#include <atomic>
#include <barrier>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "dglmc/rng.hpp"

namespace dglmc {

namespace {

constexpr double kDivergenceRadius = 1e12;

void validate_run_config(const RunConfig& config) {
  if (config.total_iters < 1)
    throw std::invalid_argument("total_iters must be at least 1");
  if (config.burn_in < 0 || config.burn_in >= config.total_iters)
    throw std::invalid_argument("burn_in must lie in [0, total_iters)");
  if (config.thin < 1) throw std::invalid_argument("thin must be at least 1");
}

void validate_profile(const ClusterProfile& profile, std::size_t b) {
  if (profile.tau.size() != static_cast<Eigen::Index>(b))
    throw std::invalid_argument("profile.tau does not match the worker count");
  if ((profile.tau.array() <= 0.0).any())
    throw std::invalid_argument("all tau_i must be positive");
  if (profile.comm_cost < 0.0)
    throw std::invalid_argument("comm_cost must be nonnegative");
}

bool state_ok(const VectorXd& v) {
  return v.allFinite() && v.norm() < kDivergenceRadius;
}

}  // namespace

long kept_samples(const RunConfig& config) {
  validate_run_config(config);
  return (config.total_iters - config.burn_in + config.thin - 1) / config.thin;
}

int requested_threads() {
  const char* env = std::getenv("DGLMC_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || v < 0) return 0;
  return static_cast<int>(std::min(v, 256L));
}

Eigen::VectorXi allocate_local_iters(const ClusterProfile& profile, int n_avg) {
  if (profile.tau.size() == 0)
    throw std::invalid_argument("profile.tau is empty");
  if ((profile.tau.array() <= 0.0).any())
    throw std::invalid_argument("all tau_i must be positive");
  if (n_avg < 1) throw std::invalid_argument("n_avg must be at least 1");
  const Eigen::Index b = profile.tau.size();
  const VectorXd inv = profile.tau.cwiseInverse();
  const double total = inv.sum();
  Eigen::VectorXi n(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const double share = inv[i] / total * n_avg * static_cast<double>(b);
    n[i] = static_cast<int>(std::max(1.0, std::round(share)));
  }
  return n;
}

RunReport run_dglmc(const std::vector<PotentialSpec>& specs,
                    const HyperParams& hyper, const RunConfig& config,
                    const ClusterProfile& profile, bool override_validation) {
  const std::size_t b = specs.size();
  const int dim = global_dim(specs);
  validate_run_config(config);
  validate_profile(profile, b);
  if (hyper.rho.size() != static_cast<Eigen::Index>(b) ||
      hyper.gamma.size() != static_cast<Eigen::Index>(b) ||
      hyper.n_local.size() != static_cast<Eigen::Index>(b))
    throw std::invalid_argument(
        "hyperparameter vectors do not match the worker count");
  if (!hyper.validated && !override_validation)
    throw std::invalid_argument(
        "hyperparameters did not pass validation; rerun with the validation "
        "override to force them");

  const PrecisionFactor factor = build_precision(specs, hyper.rho);
  const VectorXd theta_star = posterior_mode(specs);

  // Stream 0 drives the master, stream i+1 drives worker i. Draw order
  // within each stream is fixed, so the output cannot depend on scheduling.
  NormalStream master_stream(config.seed, 0);
  std::vector<NormalStream> worker_streams;
  worker_streams.reserve(b);
  for (std::size_t i = 0; i < b; ++i)
    worker_streams.emplace_back(config.seed, static_cast<std::uint64_t>(i) + 1);

  ChainState state = initial_state(specs, hyper.rho, factor, theta_star,
                                   master_stream.vector(dim));

  const long total = config.total_iters;
  const long kept = kept_samples(config);
  long sum_d = 0;
  for (const PotentialSpec& s : specs) sum_d += s.dim_out;

  RunReport report;
  report.theta_samples.resize(kept, dim);
  report.kept_iterations.reserve(kept);
  report.iter_count = total;
  report.wall_model =
      static_cast<double>(total) *
      (2.0 * profile.comm_cost +
       (hyper.n_local.cast<double>().array() * profile.tau.array()).maxCoeff());
  if (config.record_z) report.z_samples.emplace(kept, sum_d);

  std::atomic<long> diverged{-1};
  std::atomic<bool> skip{false};

  auto advance_worker = [&](std::size_t i, long t) {
    const Eigen::Index k = static_cast<Eigen::Index>(i);
    state.z[i] = run_local_chain(state.z[i], state.theta, specs[i],
                                 hyper.rho[k], hyper.gamma[k],
                                 hyper.n_local[k], worker_streams[i]);
    if (!state_ok(state.z[i])) {
      long expected = -1;
      diverged.compare_exchange_strong(expected, t);
    }
  };

  VectorXd master_noise(dim);
  auto master_phase = [&](long t) {
    master_stream.fill(master_noise);
    state.theta = master_draw(state.z, factor, specs, hyper.rho, master_noise);
    state.iteration = t;
    if (!state_ok(state.theta)) {
      long expected = -1;
      diverged.compare_exchange_strong(expected, t);
    }
    if (diverged.load(std::memory_order_relaxed) >= 0) {
      skip.store(true, std::memory_order_relaxed);
      return;
    }
    if (t > config.burn_in && (t - config.burn_in - 1) % config.thin == 0) {
      const long row = (t - config.burn_in - 1) / config.thin;
      report.theta_samples.row(row) = state.theta.transpose();
      report.kept_iterations.push_back(t);
      if (report.z_samples) {
        long off = 0;
        for (const VectorXd& zi : state.z) {
          report.z_samples->row(row).segment(off, zi.size()) = zi.transpose();
          off += zi.size();
        }
      }
    }
  };

  const int n_threads = std::min<int>(requested_threads(), static_cast<int>(b));
  if (n_threads >= 2) {
    std::barrier sync(n_threads + 1);
    {
      std::vector<std::jthread> pool;
      pool.reserve(n_threads);
      for (int j = 0; j < n_threads; ++j) {
        pool.emplace_back([&, j] {
          for (long t = 1; t <= total; ++t) {
            sync.arrive_and_wait();  // theta for round t is published
            if (!skip.load(std::memory_order_relaxed)) {
              for (std::size_t i = static_cast<std::size_t>(j); i < b;
                   i += static_cast<std::size_t>(n_threads))
                advance_worker(i, t);
            }
            sync.arrive_and_wait();  // all z blocks for round t are published
          }
        });
      }
      for (long t = 1; t <= total; ++t) {
        sync.arrive_and_wait();
        sync.arrive_and_wait();
        if (!skip.load(std::memory_order_relaxed)) master_phase(t);
      }
    }
  } else {
    for (long t = 1; t <= total && !skip.load(std::memory_order_relaxed);
         ++t) {
      for (std::size_t i = 0; i < b; ++i) advance_worker(i, t);
      master_phase(t);
    }
  }

  const long bad_iter = diverged.load();
  if (bad_iter >= 0) {
    std::ostringstream msg;
    msg << "chain diverged at iteration " << bad_iter;
    throw ChainDivergence(msg.str(), bad_iter);
  }
  return report;
}

std::vector<double> run_coupled_pair(const std::vector<PotentialSpec>& specs,
                                     const HyperParams& hyper,
                                     const RunConfig& config,
                                     const ChainState& state_a,
                                     const ChainState& state_b) {
  const std::size_t b = specs.size();
  const int dim = global_dim(specs);
  validate_run_config(config);
  if (hyper.rho.size() != static_cast<Eigen::Index>(b) ||
      hyper.gamma.size() != static_cast<Eigen::Index>(b) ||
      hyper.n_local.size() != static_cast<Eigen::Index>(b))
    throw std::invalid_argument(
        "hyperparameter vectors do not match the worker count");
  if (state_a.z.size() != b || state_b.z.size() != b ||
      state_a.theta.size() != dim || state_b.theta.size() != dim)
    throw std::invalid_argument("chain states do not match the model");

  const PrecisionFactor factor = build_precision(specs, hyper.rho);
  NormalStream master_stream(config.seed, 0);
  std::vector<NormalStream> worker_streams;
  worker_streams.reserve(b);
  for (std::size_t i = 0; i < b; ++i)
    worker_streams.emplace_back(config.seed, static_cast<std::uint64_t>(i) + 1);

  ChainState a = state_a;
  ChainState bst = state_b;
  std::vector<double> distances;
  distances.reserve(config.total_iters);
  VectorXd master_noise(dim);

  for (long t = 1; t <= config.total_iters; ++t) {
    for (std::size_t i = 0; i < b; ++i) {
      const Eigen::Index k = static_cast<Eigen::Index>(i);
      VectorXd noise(specs[i].dim_out);
      for (int step = 0; step < hyper.n_local[k]; ++step) {
        worker_streams[i].fill(noise);
        a.z[i] = lmc_local_step(a.z[i], a.theta, specs[i], hyper.rho[k],
                                hyper.gamma[k], noise);
        bst.z[i] = lmc_local_step(bst.z[i], bst.theta, specs[i], hyper.rho[k],
                                  hyper.gamma[k], noise);
      }
    }
    master_stream.fill(master_noise);
    a.theta = master_draw(a.z, factor, specs, hyper.rho, master_noise);
    bst.theta = master_draw(bst.z, factor, specs, hyper.rho, master_noise);

    double sq = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
      const Eigen::Index k = static_cast<Eigen::Index>(i);
      sq += (a.z[i] - bst.z[i]).squaredNorm() /
            (hyper.n_local[k] * hyper.gamma[k]);
    }
    distances.push_back(std::sqrt(sq));
  }
  return distances;
}

}  // namespace dglmc
