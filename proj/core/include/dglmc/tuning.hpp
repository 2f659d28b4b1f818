#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dglmc/engine.hpp"
#include "dglmc/kernels.hpp"
#include "dglmc/model.hpp"

namespace dglmc {

/// Hyperparameters from the closed-form tuning guideline:
///   rho_i   = 1 / (5 M_i)
///   gamma_i = c_gamma * rho_i / (rho_i M_i + 1),   c_gamma in [0.1, 0.5]
///   n_local = workload split of n_avg = ceil(mean_i rho_i / (gamma_i (rho_i M_i + 1)))
/// `validated` reflects the contraction certificate for the result.
HyperParams guideline_hyperparams(const std::vector<PotentialSpec>& specs,
                                  double c_gamma,
                                  const ClusterProfile& profile);

/// Per-step contraction factor of the local updates:
/// max_i { |1 - gamma_i m_i| v |1 - gamma_i (M_i + 1/rho_i)| }.
double kappa_gamma(const std::vector<PotentialSpec>& specs,
                   const HyperParams& hyper);

struct ContractionReport {
  double kappa_gamma = 0.0;
  double r_term = 0.0;         // block-coupling remainder
  double min_n_gamma_m = 0.0;  // min_i n_local_i gamma_i m_i
  double a0 = 0.0;             // step-size condition constants
  double a1 = 0.0;
  double c = 0.0;              // workload-balance ratio used
  bool premises_ok = false;    // per-worker step-size premises
  bool s46_ok = false;         // closed-form sufficient step-size condition
  bool contraction_ok = false;
};

/// Certifies geometric contraction of the coupled kernel in the weighted
/// norm with blocks scaled by 1/(n_local_i gamma_i). When every worker runs
/// a single local step the remainder term vanishes and the certificate
/// reduces to gamma_i <= 2 / (m_i + M_i + 1/rho_i); with multiple local
/// steps the remainder must stay below min_i n_local_i gamma_i m_i / 2.
/// c_ratio = 0 means "use the actual min/max workload ratio".
ContractionReport check_contraction(const std::vector<PotentialSpec>& specs,
                                    const HyperParams& hyper,
                                    double c_ratio = 0.0);

struct BiasBoundReport {
  bool applicable = false;
  std::string reason;  // empty when applicable
  double bound = std::numeric_limits<double>::quiet_NaN();
  double a1_term = std::numeric_limits<double>::quiet_NaN();
  double a3_term = std::numeric_limits<double>::quiet_NaN();
  double rho_bar = 0.0;
};

/// Computable upper bound on the Wasserstein-2 distance between the
/// tolerance-augmented marginal and the exact posterior. Inapplicable (with
/// reason) when rho exceeds the smallness preconditions.
BiasBoundReport axda_bias_bound(const std::vector<PotentialSpec>& specs,
                                const VectorXd& rho);

struct MixingBudget {
  bool applicable = false;
  std::string reason;
  double rho_eps = std::numeric_limits<double>::quiet_NaN();
  double gamma_eps = std::numeric_limits<double>::quiet_NaN();
  long n_local_eps = 0;
  long n_eps = 0;
  double e0 = std::numeric_limits<double>::quiet_NaN();  // initial W2 scale
  long long gradient_evals = 0;
  // Step-size candidates from the two smoothness regimes (NaN when the
  // Hessian-Lipschitz route is unavailable).
  double gamma_smooth = std::numeric_limits<double>::quiet_NaN();
  double gamma_hess_lip = std::numeric_limits<double>::quiet_NaN();
};

/// Sufficient (rho, gamma, n_local, iterations) budget to bring the sampler
/// within W2 tolerance eps of the exact posterior, for homogeneous worker
/// constants. eps = +inf asks only for stationarity (n_eps = 1).
MixingBudget mixing_budget(const std::vector<PotentialSpec>& specs,
                           const HyperParams& hyper, double eps);

/// Everything the bounds CLI reports for one (model, eps) point.
struct BoundReport {
  double kappa_gamma = std::numeric_limits<double>::quiet_NaN();
  double r_term = std::numeric_limits<double>::quiet_NaN();
  bool contraction_ok = false;
  double w2_bias_axda = std::numeric_limits<double>::quiet_NaN();
  double rho_eps = std::numeric_limits<double>::quiet_NaN();
  double gamma_eps = std::numeric_limits<double>::quiet_NaN();
  long n_local_eps = 0;
  long n_eps = 0;
  long long gradient_evals = 0;
  std::string reason;  // empty when every bound applied
};

/// Flat "key = value" block, one line per field.
std::string to_flat_text(const BoundReport& report);

}  // namespace dglmc
