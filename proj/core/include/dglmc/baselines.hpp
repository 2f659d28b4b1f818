#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dglmc/engine.hpp"
#include "dglmc/model.hpp"

namespace dglmc {

struct GaussianLaw {
  VectorXd mean;
  MatrixXd cov;
};

/// Exact conjugate posterior for the gaussian toy model:
/// precision = cov_prior^{-1} + n * cov_like^{-1},
/// mean = cov * (cov_prior^{-1} mean_prior + cov_like^{-1} sum_j y_j).
GaussianLaw exact_gaussian_posterior(const VectorXd& mean_prior,
                                     const MatrixXd& cov_prior,
                                     const MatrixXd& cov_like,
                                     const ShardedDataset& observations);

/// Marginal of the tolerance-augmented target when the posterior is Gaussian
/// and the augmentation acts through a single identity block: the covariance
/// inflates by rho * I.
GaussianLaw exact_axda_marginal_gaussian(const GaussianLaw& posterior,
                                         double rho);

/// Guarded variant that rejects models outside the single-worker identity
/// setting where the closed form holds.
GaussianLaw exact_axda_marginal_gaussian(const std::vector<PotentialSpec>& specs,
                                         const GaussianLaw& posterior,
                                         double rho);

/// Wasserstein-2 distance between two Gaussian laws.
double gaussian_w2(const GaussianLaw& a, const GaussianLaw& b);

/// Distributed stochastic-gradient Langevin baseline, trajectory style: one
/// chain visits the data-carrying workers in round-robin order, and the
/// active worker advances it by n_local SGLD steps per round. Each step
/// estimates the full posterior gradient from a minibatch of the active
/// shard (fraction batch_frac of it, at least one observation) rescaled by
/// n_total / n_minibatch, plus the prior term; no averaging across workers
/// takes place. One sample is recorded per round. batch_frac = 1 with a
/// single worker degenerates to exact ULA on the full posterior. Requires
/// observation-decomposable potentials.
RunReport run_dsgld(const std::vector<PotentialSpec>& specs, double step,
                    double batch_frac, int n_local, const RunConfig& config,
                    const ClusterProfile* profile = nullptr);

/// Matched-accuracy calibration for the baseline above: the step at which a
/// single-local-step pilot run reaches the given pooled per-coordinate
/// stationary variance, found by log-scale bisection below the stability
/// limit. Pass the pooled variance measured from a reference sampler (for
/// comparisons, a DG-LMC pilot at one local step per round) so both chains
/// approximate the posterior equally well before mixing is compared.
double calibrate_dsgld_step(const std::vector<PotentialSpec>& specs,
                            double target_variance, double batch_frac,
                            std::uint64_t seed);

/// Log acceptance ratio of a MALA move from -> to with step size h on the
/// full posterior.
double mala_log_acceptance(const std::vector<PotentialSpec>& specs,
                           const VectorXd& from, const VectorXd& to,
                           double step);

/// Metropolis-adjusted Langevin on the full posterior; records the realized
/// acceptance rate in the report.
RunReport run_mala(const std::vector<PotentialSpec>& specs, double step,
                   const RunConfig& config,
                   const ClusterProfile* profile = nullptr);

/// Step size whose pilot-run acceptance rate is close to `target`
/// (doubling/halving bracket, then bisection).
double calibrate_mala_step(const std::vector<PotentialSpec>& specs,
                           std::uint64_t seed, double target = 0.574);

}  // namespace dglmc
