#include "dglmc/baselines.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dglmc/rng.hpp"

namespace dglmc {

namespace {

MatrixXd spd_inverse(const MatrixXd& m, const char* name) {
  if (m.rows() != m.cols() || m.rows() == 0 ||
      !m.isApprox(m.transpose(), 1e-12))
    throw std::invalid_argument(std::string(name) +
                                " must be a symmetric square matrix");
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(std::string(name) +
                                " is not positive definite");
  return llt.solve(MatrixXd::Identity(m.rows(), m.cols()));
}

void validate_run_config(const RunConfig& config) {
  if (config.total_iters < 1)
    throw std::invalid_argument("total_iters must be at least 1");
  if (config.burn_in < 0 || config.burn_in >= config.total_iters)
    throw std::invalid_argument("burn_in must lie in [0, total_iters)");
  if (config.thin < 1) throw std::invalid_argument("thin must be at least 1");
}

constexpr double kDivergenceRadius = 1e12;

}  // namespace

GaussianLaw exact_gaussian_posterior(const VectorXd& mean_prior,
                                     const MatrixXd& cov_prior,
                                     const MatrixXd& cov_like,
                                     const ShardedDataset& observations) {
  const Eigen::Index dim = mean_prior.size();
  if (dim == 0) throw std::invalid_argument("mean_prior must be nonempty");
  if (cov_prior.rows() != dim || cov_like.rows() != dim)
    throw std::invalid_argument("covariances do not match mean_prior");
  const MatrixXd prior_prec = spd_inverse(cov_prior, "cov_prior");
  const MatrixXd like_prec = spd_inverse(cov_like, "cov_like");

  long n = 0;
  VectorXd ysum = VectorXd::Zero(dim);
  for (const DataShard& shard : observations.shards) {
    if (!shard.empty() && shard.rows.cols() != dim)
      throw std::invalid_argument("observation dimension mismatch");
    n += shard.size();
    for (Eigen::Index j = 0; j < shard.size(); ++j)
      ysum += shard.rows.row(j).transpose();
  }

  const MatrixXd precision = prior_prec + static_cast<double>(n) * like_prec;
  Eigen::LLT<MatrixXd> llt(precision);
  GaussianLaw law;
  law.cov = llt.solve(MatrixXd::Identity(dim, dim));
  law.mean = llt.solve(prior_prec * mean_prior + like_prec * ysum);
  return law;
}

GaussianLaw exact_axda_marginal_gaussian(const GaussianLaw& posterior,
                                         double rho) {
  if (rho < 0.0) throw std::invalid_argument("rho must be nonnegative");
  GaussianLaw law;
  law.mean = posterior.mean;
  law.cov = posterior.cov +
            rho * MatrixXd::Identity(posterior.cov.rows(), posterior.cov.cols());
  return law;
}

GaussianLaw exact_axda_marginal_gaussian(const std::vector<PotentialSpec>& specs,
                                         const GaussianLaw& posterior,
                                         double rho) {
  if (specs.size() != 1 ||
      !specs[0].matrix_a.isApprox(
          MatrixXd::Identity(specs[0].matrix_a.rows(), specs[0].matrix_a.cols())))
    throw std::invalid_argument(
        "the augmented marginal has a closed form only for a single worker "
        "with identity coupling");
  return exact_axda_marginal_gaussian(posterior, rho);
}

double gaussian_w2(const GaussianLaw& a, const GaussianLaw& b) {
  if (a.mean.size() != b.mean.size() || a.cov.rows() != b.cov.rows())
    throw std::invalid_argument("laws have different dimensions");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es_b(b.cov);
  if (es_b.info() != Eigen::Success)
    throw std::runtime_error("covariance eigendecomposition failed");
  const MatrixXd sqrt_b = es_b.operatorSqrt();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es_m(sqrt_b * a.cov * sqrt_b);
  const double cross =
      es_m.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double trace_part =
      a.cov.trace() + b.cov.trace() - 2.0 * cross;
  const double sq = (a.mean - b.mean).squaredNorm() + trace_part;
  return std::sqrt(std::max(0.0, sq));
}

RunReport run_dsgld(const std::vector<PotentialSpec>& specs, double step,
                    double batch_frac, int n_local, const RunConfig& config,
                    const ClusterProfile* profile) {
  const std::size_t b = specs.size();
  const int dim = global_dim(specs);
  validate_run_config(config);
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  if (!(batch_frac > 0.0 && batch_frac <= 1.0))
    throw std::invalid_argument("batch_frac must lie in (0, 1]");
  if (n_local < 1) throw std::invalid_argument("n_local must be at least 1");
  for (std::size_t i = 0; i < b; ++i) {
    if (!specs[i].decomposable()) {
      std::ostringstream msg;
      msg << "worker " << i + 1
          << " potential is not observation-decomposable";
      throw std::invalid_argument(msg.str());
    }
    if (specs[i].dim_out != dim ||
        !specs[i].matrix_a.isApprox(MatrixXd::Identity(dim, dim)))
      throw std::invalid_argument(
          "distributed SGLD requires identity coupling on every worker");
  }
  if (profile != nullptr &&
      profile->tau.size() != static_cast<Eigen::Index>(b))
    throw std::invalid_argument("profile.tau does not match the worker count");

  std::vector<NormalStream> streams;
  streams.reserve(b);
  for (std::size_t i = 0; i < b; ++i)
    streams.emplace_back(config.seed, static_cast<std::uint64_t>(i) + 1);

  // The chain visits data-carrying workers in round-robin order; a worker
  // without observations only ever contributes its prior term, so it is left
  // out of the rotation unless nobody holds data.
  std::vector<std::size_t> schedule;
  for (std::size_t i = 0; i < b; ++i)
    if (specs[i].n_obs > 0) schedule.push_back(i);
  if (schedule.empty())
    for (std::size_t i = 0; i < b; ++i) schedule.push_back(i);

  long n_total = 0;
  for (std::size_t i = 0; i < b; ++i) n_total += specs[i].n_obs;

  VectorXd theta = posterior_mode(specs);

  const long total = config.total_iters;
  const long kept =
      (config.total_iters - config.burn_in + config.thin - 1) / config.thin;
  RunReport report;
  report.theta_samples.resize(kept, dim);
  report.kept_iterations.reserve(kept);
  report.iter_count = total;

  double active_time = 0.0;
  VectorXd noise(dim);
  VectorXd prior_grad(dim);
  std::vector<long> idx;
  for (long t = 1; t <= total; ++t) {
    const std::size_t s =
        schedule[static_cast<std::size_t>((t - 1) % schedule.size())];
    const long n_s = specs[s].n_obs;
    const long n_mb =
        n_s == 0
            ? 0
            : std::max(1L, std::lround(batch_frac * static_cast<double>(n_s)));
    if (profile != nullptr) active_time += profile->tau[s];
    for (int k = 0; k < n_local; ++k) {
      VectorXd grad;
      if (b == 1 && n_mb >= n_s) {
        grad = specs[s].grad_u(theta);  // exact full-posterior gradient
      } else {
        prior_grad.setZero();
        for (std::size_t i = 0; i < b; ++i)
          prior_grad += specs[i].grad_prior_part(theta);
        if (n_mb == 0) {
          grad = prior_grad;
        } else {
          idx.clear();
          if (n_mb >= n_s) {
            for (long j = 0; j < n_s; ++j) idx.push_back(j);
          } else {
            for (long j = 0; j < n_mb; ++j)
              idx.push_back(static_cast<long>(streams[s].bits().uniform_index(
                  static_cast<std::size_t>(n_s))));
          }
          grad = (static_cast<double>(n_total) /
                  static_cast<double>(idx.size())) *
                     specs[s].grad_obs_subset(theta, idx) +
                 prior_grad;
        }
      }
      streams[s].fill(noise);
      theta = theta - (step / 2.0) * grad + std::sqrt(step) * noise;
    }

    if (!theta.allFinite() || theta.norm() > kDivergenceRadius) {
      std::ostringstream msg;
      msg << "chain diverged at iteration " << t;
      throw ChainDivergence(msg.str(), t);
    }
    if (t > config.burn_in && (t - config.burn_in - 1) % config.thin == 0) {
      const long row = (t - config.burn_in - 1) / config.thin;
      report.theta_samples.row(row) = theta.transpose();
      report.kept_iterations.push_back(t);
    }
  }
  if (profile != nullptr)
    report.wall_model =
        static_cast<double>(total) * 2.0 * profile->comm_cost +
        static_cast<double>(n_local) * batch_frac * active_time;
  return report;
}

double calibrate_dsgld_step(const std::vector<PotentialSpec>& specs,
                            double target_variance, double batch_frac,
                            std::uint64_t seed) {
  if (!(target_variance > 0.0))
    throw std::invalid_argument("target variance must be positive");
  double m_total = 0.0;
  for (const auto& spec : specs) m_total += spec.m_upper;
  if (!(m_total > 0.0))
    throw std::invalid_argument("potentials carry no smoothness bound");

  RunConfig pilot;
  pilot.total_iters = 40000;
  pilot.burn_in = 4000;
  pilot.seed = seed;

  const auto pooled_variance = [&](double h) {
    const RunReport r = run_dsgld(specs, h, batch_frac, 1, pilot);
    const Eigen::RowVectorXd mean = r.theta_samples.colwise().mean();
    return (r.theta_samples.rowwise() - mean).squaredNorm() /
           ((static_cast<double>(r.theta_samples.rows()) - 1.0) *
            static_cast<double>(r.theta_samples.cols()));
  };

  // Pooled variance grows monotonically with the step (discretization plus
  // minibatch noise), so a log-scale bisection between a near-exact step and
  // half the stability limit brackets the target.
  double lo = 2e-4 / m_total;
  double hi = 1.0 / m_total;
  if (pooled_variance(lo) >= target_variance) return lo;
  if (pooled_variance(hi) <= target_variance) return hi;
  for (int round = 0; round < 16; ++round) {
    const double mid = std::sqrt(lo * hi);
    (pooled_variance(mid) < target_variance ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

double mala_log_acceptance(const std::vector<PotentialSpec>& specs,
                           const VectorXd& from, const VectorXd& to,
                           double step) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  const double u_from = posterior_potential(specs, from);
  const double u_to = posterior_potential(specs, to);
  const VectorXd g_from = posterior_gradient(specs, from);
  const VectorXd g_to = posterior_gradient(specs, to);
  const double fwd = (to - from + (step / 2.0) * g_from).squaredNorm();
  const double bwd = (from - to + (step / 2.0) * g_to).squaredNorm();
  return (u_from - u_to) + (fwd - bwd) / (2.0 * step);
}

RunReport run_mala(const std::vector<PotentialSpec>& specs, double step,
                   const RunConfig& config, const ClusterProfile* profile) {
  const int dim = global_dim(specs);
  validate_run_config(config);
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  if (profile != nullptr &&
      profile->tau.size() != static_cast<Eigen::Index>(specs.size()))
    throw std::invalid_argument("profile.tau does not match the worker count");

  PhiloxStream uniforms(config.seed, 0);
  NormalStream noise_stream(config.seed, 1);

  VectorXd theta = posterior_mode(specs);
  double u_cur = posterior_potential(specs, theta);
  VectorXd g_cur = posterior_gradient(specs, theta);

  const long total = config.total_iters;
  const long kept =
      (config.total_iters - config.burn_in + config.thin - 1) / config.thin;
  RunReport report;
  report.theta_samples.resize(kept, dim);
  report.kept_iterations.reserve(kept);
  report.iter_count = total;
  if (profile != nullptr)
    report.wall_model =
        static_cast<double>(total) * profile->tau.sum();

  VectorXd noise(dim);
  long accepted = 0;
  for (long t = 1; t <= total; ++t) {
    noise_stream.fill(noise);
    const VectorXd prop =
        theta - (step / 2.0) * g_cur + std::sqrt(step) * noise;
    const double u_prop = posterior_potential(specs, prop);
    const VectorXd g_prop = posterior_gradient(specs, prop);
    const double fwd = (prop - theta + (step / 2.0) * g_cur).squaredNorm();
    const double bwd = (theta - prop + (step / 2.0) * g_prop).squaredNorm();
    const double log_alpha = (u_cur - u_prop) + (fwd - bwd) / (2.0 * step);
    if (std::log(uniforms.next_unit()) < log_alpha) {
      theta = prop;
      u_cur = u_prop;
      g_cur = g_prop;
      ++accepted;
    }
    if (!theta.allFinite() || theta.norm() > kDivergenceRadius) {
      std::ostringstream msg;
      msg << "chain diverged at iteration " << t;
      throw ChainDivergence(msg.str(), t);
    }
    if (t > config.burn_in && (t - config.burn_in - 1) % config.thin == 0) {
      const long row = (t - config.burn_in - 1) / config.thin;
      report.theta_samples.row(row) = theta.transpose();
      report.kept_iterations.push_back(t);
    }
  }
  report.acceptance_rate =
      static_cast<double>(accepted) / static_cast<double>(total);
  return report;
}

double calibrate_mala_step(const std::vector<PotentialSpec>& specs,
                           std::uint64_t seed, double target) {
  if (!(target > 0.0 && target < 1.0))
    throw std::invalid_argument("target acceptance must lie in (0, 1)");
  RunConfig pilot;
  pilot.total_iters = 1500;
  pilot.burn_in = 500;
  pilot.thin = 1;
  pilot.seed = seed;

  auto acceptance = [&](double h) {
    return run_mala(specs, h, pilot).acceptance_rate;
  };

  double m_total = 0.0;
  for (const PotentialSpec& s : specs) m_total += s.m_upper;
  double h = 1.0 / m_total;
  double acc = acceptance(h);
  double lo = h, hi = h;
  if (acc >= target) {
    // Acceptance too high: grow the step until it drops below target.
    for (int k = 0; k < 40 && acc >= target; ++k) {
      lo = hi;
      hi *= 2.0;
      acc = acceptance(hi);
    }
  } else {
    for (int k = 0; k < 40 && acc < target; ++k) {
      hi = lo;
      lo /= 2.0;
      acc = acceptance(lo);
    }
  }
  // lo keeps acceptance >= target, hi < target; bisect on the log scale.
  for (int k = 0; k < 12; ++k) {
    const double mid = std::sqrt(lo * hi);
    const double a = acceptance(mid);
    if (std::abs(a - target) <= 0.02) return mid;
    if (a >= target)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace dglmc
