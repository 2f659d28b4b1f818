#include "dglmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dglmc {

namespace {

// Lag-k autocovariance of a centered series, normalized by T.
double autocov(const VectorXd& centered, long lag) {
  const long t = centered.size();
  double s = 0.0;
  for (long j = 0; j + lag < t; ++j) s += centered[j] * centered[j + lag];
  return s / static_cast<double>(t);
}

// Initial-positive-sequence estimate of the integrated autocorrelation time:
// accumulate paired autocovariances until a pair turns non-positive.
double iat_one(const VectorXd& centered, double gamma0) {
  const long t = centered.size();
  double total = 0.0;
  const long max_pairs = t / 2;
  for (long m = 0; m < max_pairs; ++m) {
    const double even = autocov(centered, 2 * m);
    const double odd = 2 * m + 1 < t ? autocov(centered, 2 * m + 1) : 0.0;
    const double pair = even + odd;
    if (m > 0 && pair <= 0.0) break;
    total += pair;
  }
  return 2.0 * total / gamma0 - 1.0;
}

}  // namespace

MatrixXd acf(const MatrixXd& samples, int max_lag) {
  const long t = samples.rows();
  const long d = samples.cols();
  if (max_lag < 0) throw std::invalid_argument("max_lag must be nonnegative");
  if (t <= max_lag)
    throw std::invalid_argument(
        "need more samples than max_lag to estimate autocorrelation");
  if (t < 2) throw std::invalid_argument("need at least two samples");

  MatrixXd out(max_lag + 1, d);
  for (long j = 0; j < d; ++j) {
    VectorXd centered = samples.col(j).array() - samples.col(j).mean();
    const double gamma0 = autocov(centered, 0);
    if (!(gamma0 > 0.0)) {
      std::ostringstream msg;
      msg << "coordinate " << j + 1
          << " is constant; autocorrelation is undefined";
      throw std::invalid_argument(msg.str());
    }
    for (int k = 0; k <= max_lag; ++k)
      out(k, j) = autocov(centered, k) / gamma0;
  }
  return out;
}

VectorXd iat(const MatrixXd& samples) {
  const long t = samples.rows();
  const long d = samples.cols();
  if (t < 4) throw std::invalid_argument("need at least four samples");
  VectorXd out(d);
  for (long j = 0; j < d; ++j) {
    VectorXd centered = samples.col(j).array() - samples.col(j).mean();
    const double gamma0 = autocov(centered, 0);
    if (!(gamma0 > 0.0)) {
      std::ostringstream msg;
      msg << "coordinate " << j + 1
          << " is constant; autocorrelation time is undefined";
      throw std::invalid_argument(msg.str());
    }
    out[j] = iat_one(centered, gamma0);
  }
  return out;
}

double quantile_type7(VectorXd values, double p) {
  if (values.size() == 0) throw std::invalid_argument("empty sample");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("quantile level must lie in [0, 1]");
  std::sort(values.data(), values.data() + values.size());
  const long n = values.size();
  if (n == 1) return values[0];
  const double h = (static_cast<double>(n) - 1.0) * p;
  const long lo = static_cast<long>(std::floor(h));
  if (lo >= n - 1) return values[n - 1];
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

HpdSummary hpd_error(const MatrixXd& samples,
                     const std::function<double(const VectorXd&)>& potential,
                     double alpha, double eta_reference) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0, 1)");
  if (samples.rows() < 2)
    throw std::invalid_argument("need at least two samples");
  VectorXd vals(samples.rows());
  for (long r = 0; r < samples.rows(); ++r)
    vals[r] = potential(samples.row(r).transpose());

  HpdSummary out;
  out.alpha = alpha;
  out.eta_alpha = quantile_type7(vals, 1.0 - alpha);
  const double denom = std::abs(eta_reference);
  out.rel_error = denom > 0.0 ? std::abs(out.eta_alpha - eta_reference) / denom
                              : std::abs(out.eta_alpha - eta_reference);
  return out;
}

Moments moments_with_se(const MatrixXd& samples) {
  const long t = samples.rows();
  const long d = samples.cols();
  if (t < 1) throw std::invalid_argument("empty sample");

  Moments out;
  out.mean = samples.colwise().mean();
  out.cov = MatrixXd::Zero(d, d);
  if (t >= 2) {
    MatrixXd centered = samples.rowwise() - out.mean.transpose();
    out.cov = centered.transpose() * centered / static_cast<double>(t - 1);
  }
  out.iat = VectorXd::Ones(d);
  out.se = VectorXd::Zero(d);
  for (long j = 0; j < d; ++j) {
    if (t >= 4 && out.cov(j, j) > 0.0) {
      VectorXd centered = samples.col(j).array() - out.mean[j];
      out.iat[j] = iat_one(centered, autocov(centered, 0));
    }
    if (out.cov(j, j) > 0.0)
      out.se[j] = std::sqrt(out.cov(j, j) *
                            std::max(out.iat[j], 0.0) /
                            static_cast<double>(t));
  }
  return out;
}

}  // namespace dglmc
