#pragma once

#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace dglmc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One worker's slice of the data.
struct DataShard {
  /// One observation per row. For the gaussian model these are the y_j
  /// (n_i x d); for the logistic model the covariate rows x_j (n_i x d).
  MatrixXd rows;
  /// Binary outcomes for the logistic model; empty for gaussian shards.
  VectorXd labels;

  Eigen::Index size() const { return rows.rows(); }
  bool empty() const { return rows.rows() == 0; }
};

struct ShardedDataset {
  std::vector<DataShard> shards;
  long n_total = 0;
  /// Covariate dimension; 0 for models without covariates.
  int feature_dim = 0;
};

/// A worker-local potential U_i together with the constants the theory needs.
///
/// The sampled local variable z_i lives in R^{dim_out}; matrix_a maps the
/// global parameter into that space. m_lower/m_upper bound the Hessian of u
/// from below/above, l_hess bounds the Lipschitz constant of the Hessian
/// (NaN when no bound is known).
struct PotentialSpec {
  int dim_out = 0;
  MatrixXd matrix_a;
  double m_lower = 0.0;
  double m_upper = 0.0;
  double l_hess = std::numeric_limits<double>::quiet_NaN();
  DataShard shard;

  std::function<double(const VectorXd&)> u;
  std::function<VectorXd(const VectorXd&)> grad_u;
  std::function<MatrixXd(const VectorXd&)> hess_u;

  /// Observation-level decomposition U_i = sum_j u_{ij} + prior part, used by
  /// minibatch samplers. n_obs == 0 with a prior part present means the
  /// potential is a pure prior term. grad_obs_subset returns the *unscaled*
  /// sum of per-observation gradients over the given index subset.
  long n_obs = 0;
  std::function<VectorXd(const VectorXd&, const std::vector<long>&)> grad_obs_subset;
  std::function<VectorXd(const VectorXd&)> grad_prior_part;

  bool decomposable() const {
    return static_cast<bool>(grad_prior_part) &&
           (n_obs == 0 || static_cast<bool>(grad_obs_subset));
  }
};

/// Constants attached to the full model (all workers combined).
struct ModelConstants {
  double m_u = 0.0;        // strong-convexity constant of the full potential
  double sigma_u_sq = 0.0; // sub-Gaussian proxy of the posterior
  double l_beta = 0.0;     // coupling strength of the augmented target
};

/// Gaussian conjugate toy: worker i holds U_i(z) = sum_j (z-y_j)' S1^{-1} (z-y_j) / 2
/// over its shard, with the N(mean_prior, cov_prior) prior folded into the
/// first worker. All A_i are identity.
std::vector<PotentialSpec> gaussian_model(const VectorXd& mean_prior,
                                          const MatrixXd& cov_prior,
                                          const MatrixXd& cov_like,
                                          const ShardedDataset& observations);

/// Bayesian logistic regression with a N(0, I/prior_prec) prior split evenly
/// across b workers; observations are sharded contiguously.
std::vector<PotentialSpec> logistic_model(const MatrixXd& features,
                                          const VectorXd& labels,
                                          double prior_prec, int n_shards);

/// Pure quadratic potential u(z) = curvature * |z|^2 / 2 on R^dim
/// (m = M = curvature, Lipschitz-Hessian constant 0).
PotentialSpec quadratic_potential(int dim, double curvature);

/// Model-level constants derived from the worker specs and the tolerance
/// parameters rho. Throws if the stacked A_i are column-rank deficient.
ModelConstants model_constants(const std::vector<PotentialSpec>& specs,
                               const VectorXd& rho);

// Full-posterior callables: potential, gradient and Hessian of
// theta -> sum_i U_i(A_i theta).
double posterior_potential(const std::vector<PotentialSpec>& specs,
                           const VectorXd& theta);
VectorXd posterior_gradient(const std::vector<PotentialSpec>& specs,
                            const VectorXd& theta);
MatrixXd posterior_hessian(const std::vector<PotentialSpec>& specs,
                           const VectorXd& theta);

/// Mode of the full posterior (Newton, started at zero).
VectorXd posterior_mode(const std::vector<PotentialSpec>& specs);

/// Minimizer of one local potential over its own z-space.
VectorXd local_minimizer(const PotentialSpec& spec);

/// Global parameter dimension shared by all specs. Throws on inconsistency.
int global_dim(const std::vector<PotentialSpec>& specs);

}  // namespace dglmc
