#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dglmc/kernels.hpp"
#include "dglmc/model.hpp"

namespace dglmc {

/// Simulated cluster: per-worker compute cost tau_i (time per local gradient
/// step) and a fixed per-round communication cost.
struct ClusterProfile {
  VectorXd tau;
  double comm_cost = 0.0;
};

struct RunConfig {
  long total_iters = 0;  // T
  long burn_in = 0;      // discarded prefix, must be < T
  long thin = 1;
  std::uint64_t seed = 0;
  bool record_z = false;
};

struct ChainDiagnostics {
  VectorXd mean;
  MatrixXd cov;
  VectorXd se;   // standard error of the mean, autocorrelation-adjusted
  VectorXd iat;  // integrated autocorrelation time per coordinate
};

struct RunReport {
  MatrixXd theta_samples;             // kept x d
  std::vector<long> kept_iterations;  // global iteration index per kept row
  double wall_model = 0.0;
  long iter_count = 0;
  double acceptance_rate = std::numeric_limits<double>::quiet_NaN();
  std::optional<ChainDiagnostics> diagnostics;
  std::optional<MatrixXd> z_samples;  // kept x sum(d_i), when record_z
};

/// Thrown when a chain leaves the numerically representable range.
class ChainDivergence : public std::runtime_error {
 public:
  ChainDivergence(const std::string& what, long iteration)
      : std::runtime_error(what), iteration(iteration) {}
  long iteration;
};

/// Workload split across b workers proportional to inverse compute cost:
/// n_i = max(1, round(q_i * n_avg * b)) with q_i = tau_i^{-1} / sum_k tau_k^{-1}.
Eigen::VectorXi allocate_local_iters(const ClusterProfile& profile, int n_avg);

/// Runs the distributed Gibbs/Langevin sampler: each round every worker
/// advances its local chain by n_local_i steps at fixed theta, then the
/// master draws theta exactly from its Gaussian conditional.
///
/// Worker rounds execute on a thread pool when DGLMC_THREADS requests more
/// than one thread (0 or unset means serial); the output is bit-identical
/// for every thread count. Requires hyper.validated unless
/// override_validation is set. Throws ChainDivergence if the state blows up.
RunReport run_dglmc(const std::vector<PotentialSpec>& specs,
                    const HyperParams& hyper, const RunConfig& config,
                    const ClusterProfile& profile,
                    bool override_validation = false);

/// Runs two chains from the given initial states under one shared noise
/// realization and returns, per round, the weighted distance
/// sqrt(sum_i |za_i - zb_i|^2 / (n_local_i * gamma_i)).
std::vector<double> run_coupled_pair(const std::vector<PotentialSpec>& specs,
                                     const HyperParams& hyper,
                                     const RunConfig& config,
                                     const ChainState& state_a,
                                     const ChainState& state_b);

/// Number of kept (post burn-in, thinned) samples for a config.
long kept_samples(const RunConfig& config);

/// Thread count requested via the DGLMC_THREADS environment variable
/// (0 = serial).
int requested_threads();

}  // namespace dglmc
