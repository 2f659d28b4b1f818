#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dglmc/model.hpp"
#include "dglmc/rng.hpp"

namespace dglmc {

/// Per-worker sampler hyperparameters: tolerances rho_i, step sizes gamma_i
/// and local iteration counts n_local_i. `validated` records whether the
/// combination passed the contraction check (not merely the stability bound).
struct HyperParams {
  VectorXd rho;
  VectorXd gamma;
  Eigen::VectorXi n_local;
  bool validated = false;
};

/// Checks the per-worker stability requirement
/// gamma_i in (0, rho_i / (1 + rho_i * M_i)] and n_local_i >= 1.
bool stability_ok(const std::vector<PotentialSpec>& specs,
                  const HyperParams& hyper);

/// Builds HyperParams and throws std::invalid_argument if any entry violates
/// positivity, the stability bound, or n_local_i >= 1. `validated` is left
/// false; the contraction check is a separate, stronger certificate.
HyperParams make_hyperparams(const std::vector<PotentialSpec>& specs,
                             const VectorXd& rho, const VectorXd& gamma,
                             const Eigen::VectorXi& n_local);

/// Cholesky factorization of the master conditional precision
/// Q = sum_i A_i' A_i / rho_i.
struct PrecisionFactor {
  MatrixXd q;
  MatrixXd chol;       // lower-triangular L with L L' = Q
  double log_det = 0;  // log det Q
};

PrecisionFactor build_precision(const std::vector<PotentialSpec>& specs,
                                const VectorXd& rho);

/// One local Langevin step for worker i. With fresh noise xi this computes
///   z' = (1 - gamma/rho) z + (gamma/rho) A_i theta - gamma grad U_i(z)
///        + sqrt(2 gamma) xi
/// coefficient-wise in exactly that order of operations.
VectorXd lmc_local_step(const VectorXd& z, const VectorXd& theta,
                        const PotentialSpec& spec, double rho_i,
                        double gamma_i, const VectorXd& noise);

/// n_steps local Langevin steps, drawing each noise vector from `stream`
/// in order.
VectorXd run_local_chain(const VectorXd& z0, const VectorXd& theta,
                         const PotentialSpec& spec, double rho_i,
                         double gamma_i, int n_steps, NormalStream& stream);

/// Exact draw of the master conditional theta | z ~ N(mu, Q^{-1}) with
/// mu = Q^{-1} sum_i A_i' z_i / rho_i, using theta = mu + L^{-T} noise.
VectorXd master_draw(const std::vector<VectorXd>& z,
                     const PrecisionFactor& factor,
                     const std::vector<PotentialSpec>& specs,
                     const VectorXd& rho, const VectorXd& noise);

struct ChainState {
  VectorXd theta;
  std::vector<VectorXd> z;
  long iteration = 0;
};

/// Deterministic-in-noise initial state: z_i = A_i theta_star, theta drawn
/// from the master conditional at that z.
ChainState initial_state(const std::vector<PotentialSpec>& specs,
                         const VectorXd& rho, const PrecisionFactor& factor,
                         const VectorXd& theta_star, const VectorXd& noise);

}  // namespace dglmc
