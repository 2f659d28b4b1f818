#pragma once

#include <functional>

#include <Eigen/Dense>

namespace dglmc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Sample autocorrelation per coordinate. samples is T x d (one draw per
/// row); the result is (max_lag + 1) x d with row k holding lag-k values,
/// so row 0 is identically 1. Throws if T <= max_lag or if a coordinate is
/// constant.
MatrixXd acf(const MatrixXd& samples, int max_lag);

/// Integrated autocorrelation time per coordinate, using the initial
/// positive sequence rule: partial sums of autocovariance pairs are
/// accumulated until a pair turns non-positive.
VectorXd iat(const MatrixXd& samples);

struct HpdSummary {
  double alpha = 0.0;
  double eta_alpha = 0.0;  // estimated potential threshold
  double rel_error = 0.0;  // against the supplied reference threshold
};

/// Highest-posterior-density threshold estimate: the (1 - alpha) empirical
/// quantile (type-7 interpolation) of the potential evaluated along the
/// chain, compared against a reference value.
HpdSummary hpd_error(const MatrixXd& samples,
                     const std::function<double(const VectorXd&)>& potential,
                     double alpha, double eta_reference);

struct Moments {
  VectorXd mean;
  MatrixXd cov;
  VectorXd se;   // autocorrelation-adjusted standard error of the mean
  VectorXd iat;
};

Moments moments_with_se(const MatrixXd& samples);

/// Type-7 empirical quantile of a sample (the same interpolation rule
/// hpd_error uses).
double quantile_type7(VectorXd values, double p);

}  // namespace dglmc
