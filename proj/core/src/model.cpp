#include "dglmc/model.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "dglmc/optim.hpp"

namespace dglmc {

namespace {

MatrixXd checked_spd_inverse(const MatrixXd& m, const char* name) {
  std::ostringstream msg;
  if (m.rows() != m.cols() || m.rows() == 0) {
    msg << name << " must be a nonempty square matrix, got " << m.rows()
        << "x" << m.cols();
    throw std::invalid_argument(msg.str());
  }
  if (!m.isApprox(m.transpose(), 1e-12)) {
    msg << name << " is not symmetric";
    throw std::invalid_argument(msg.str());
  }
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    msg << name << " is not positive definite";
    throw std::invalid_argument(msg.str());
  }
  return llt.solve(MatrixXd::Identity(m.rows(), m.cols()));
}

// Quadratic worker potential u(z) = z'Pz/2 - h'z + c0 with the pieces the
// minibatch decomposition needs.
struct QuadraticData {
  MatrixXd p;
  VectorXd h;
  double c0 = 0.0;
  MatrixXd like_prec;
  MatrixXd obs_rows;    // y_j, one per row
  MatrixXd prior_prec;  // empty when no prior term is folded in
  VectorXd prior_mean;
};

void attach_quadratic(PotentialSpec& spec, std::shared_ptr<QuadraticData> d) {
  spec.u = [d](const VectorXd& z) {
    return 0.5 * z.dot(d->p * z) - d->h.dot(z) + d->c0;
  };
  spec.grad_u = [d](const VectorXd& z) -> VectorXd { return d->p * z - d->h; };
  spec.hess_u = [d](const VectorXd&) -> MatrixXd { return d->p; };
  spec.n_obs = d->obs_rows.rows();
  spec.grad_obs_subset = [d](const VectorXd& z,
                             const std::vector<long>& idx) -> VectorXd {
    VectorXd ysum = VectorXd::Zero(z.size());
    for (long j : idx) ysum += d->obs_rows.row(j).transpose();
    return d->like_prec * (static_cast<double>(idx.size()) * z - ysum);
  };
  spec.grad_prior_part = [d](const VectorXd& z) -> VectorXd {
    if (d->prior_prec.size() == 0) return VectorXd::Zero(z.size());
    return d->prior_prec * (z - d->prior_mean);
  };
}

double stable_log1pexp(double t) {
  // log(1 + e^t) without overflow for large |t|.
  if (t > 0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

struct LogisticData {
  MatrixXd x;
  VectorXd y;
  double prior_prec_share = 0.0;  // lambda / b
};

void attach_logistic(PotentialSpec& spec, std::shared_ptr<LogisticData> d) {
  spec.u = [d](const VectorXd& z) {
    const VectorXd t = d->x * z;
    double total = 0.5 * d->prior_prec_share * z.squaredNorm();
    for (Eigen::Index j = 0; j < t.size(); ++j)
      total += stable_log1pexp(t[j]) - d->y[j] * t[j];
    return total;
  };
  spec.grad_u = [d](const VectorXd& z) -> VectorXd {
    VectorXd t = d->x * z;
    for (Eigen::Index j = 0; j < t.size(); ++j) t[j] = sigmoid(t[j]) - d->y[j];
    return d->x.transpose() * t + d->prior_prec_share * z;
  };
  spec.hess_u = [d](const VectorXd& z) -> MatrixXd {
    VectorXd t = d->x * z;
    for (Eigen::Index j = 0; j < t.size(); ++j) {
      const double s = sigmoid(t[j]);
      t[j] = s * (1.0 - s);
    }
    const Eigen::Index dim = z.size();
    MatrixXd hess =
        d->prior_prec_share * MatrixXd::Identity(dim, dim);
    hess.noalias() += d->x.transpose() * t.asDiagonal() * d->x;
    return hess;
  };
  spec.n_obs = d->x.rows();
  spec.grad_obs_subset = [d](const VectorXd& z,
                             const std::vector<long>& idx) -> VectorXd {
    VectorXd g = VectorXd::Zero(z.size());
    for (long j : idx) {
      const double t = d->x.row(j).dot(z);
      g += (sigmoid(t) - d->y[j]) * d->x.row(j).transpose();
    }
    return g;
  };
  spec.grad_prior_part = [d](const VectorXd& z) -> VectorXd {
    return d->prior_prec_share * z;
  };
}

double max_eigenvalue(const MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

std::vector<PotentialSpec> gaussian_model(const VectorXd& mean_prior,
                                          const MatrixXd& cov_prior,
                                          const MatrixXd& cov_like,
                                          const ShardedDataset& observations) {
  const Eigen::Index dim = mean_prior.size();
  if (dim == 0) throw std::invalid_argument("mean_prior must be nonempty");
  if (cov_prior.rows() != dim)
    throw std::invalid_argument("cov_prior does not match mean_prior dimension");
  if (cov_like.rows() != dim)
    throw std::invalid_argument("cov_like does not match mean_prior dimension");
  const MatrixXd prior_prec = checked_spd_inverse(cov_prior, "cov_prior");
  const MatrixXd like_prec = checked_spd_inverse(cov_like, "cov_like");
  const std::size_t b = observations.shards.size();
  if (b == 0) throw std::invalid_argument("dataset has no shards");

  std::vector<PotentialSpec> specs(b);
  for (std::size_t i = 0; i < b; ++i) {
    const DataShard& shard = observations.shards[i];
    if (!shard.empty() && shard.rows.cols() != dim) {
      std::ostringstream msg;
      msg << "shard " << i + 1 << " has " << shard.rows.cols()
          << " columns, expected " << dim;
      throw std::invalid_argument(msg.str());
    }
    const bool has_prior = (i == 0);
    if (shard.empty() && !has_prior) {
      std::ostringstream msg;
      msg << "shard " << i + 1
          << " is empty and carries no prior term; its potential would not "
             "be strongly convex";
      throw std::invalid_argument(msg.str());
    }

    auto data = std::make_shared<QuadraticData>();
    const Eigen::Index n_i = shard.size();
    data->like_prec = like_prec;
    data->obs_rows = shard.rows;
    data->p = static_cast<double>(n_i) * like_prec;
    data->h = VectorXd::Zero(dim);
    for (Eigen::Index j = 0; j < n_i; ++j) {
      const VectorXd y = shard.rows.row(j).transpose();
      data->h += like_prec * y;
      data->c0 += 0.5 * y.dot(like_prec * y);
    }
    if (has_prior) {
      data->p += prior_prec;
      data->h += prior_prec * mean_prior;
      data->c0 += 0.5 * mean_prior.dot(prior_prec * mean_prior);
      data->prior_prec = prior_prec;
      data->prior_mean = mean_prior;
    }

    PotentialSpec& spec = specs[i];
    spec.dim_out = static_cast<int>(dim);
    spec.matrix_a = MatrixXd::Identity(dim, dim);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(data->p, Eigen::EigenvaluesOnly);
    spec.m_lower = es.eigenvalues().minCoeff();
    spec.m_upper = es.eigenvalues().maxCoeff();
    spec.l_hess = 0.0;
    spec.shard = shard;
    attach_quadratic(spec, data);
  }
  return specs;
}

std::vector<PotentialSpec> logistic_model(const MatrixXd& features,
                                          const VectorXd& labels,
                                          double prior_prec, int n_shards) {
  const Eigen::Index n = features.rows();
  const Eigen::Index dim = features.cols();
  if (n == 0 || dim == 0)
    throw std::invalid_argument("feature matrix is empty");
  if (labels.size() != n)
    throw std::invalid_argument("labels do not match the number of rows");
  if (prior_prec <= 0.0)
    throw std::invalid_argument("prior_prec must be positive");
  if (n_shards < 1)
    throw std::invalid_argument("n_shards must be at least 1");
  if (n_shards > n) {
    std::ostringstream msg;
    msg << "cannot split " << n << " observations across " << n_shards
        << " workers";
    throw std::invalid_argument(msg.str());
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (labels[j] != 0.0 && labels[j] != 1.0)
      throw std::invalid_argument("labels must be 0 or 1");
  }

  // Contiguous split; the first n % b shards take one extra row.
  std::vector<PotentialSpec> specs(n_shards);
  const Eigen::Index base = n / n_shards;
  const Eigen::Index extra = n % n_shards;
  Eigen::Index start = 0;
  for (int i = 0; i < n_shards; ++i) {
    const Eigen::Index n_i = base + (i < extra ? 1 : 0);
    auto data = std::make_shared<LogisticData>();
    data->x = features.middleRows(start, n_i);
    data->y = labels.segment(start, n_i);
    data->prior_prec_share = prior_prec / n_shards;
    start += n_i;

    PotentialSpec& spec = specs[i];
    spec.dim_out = static_cast<int>(dim);
    spec.matrix_a = MatrixXd::Identity(dim, dim);
    spec.m_lower = data->prior_prec_share;
    spec.m_upper =
        data->prior_prec_share +
        0.25 * max_eigenvalue(data->x.transpose() * data->x);
    double cubes = 0.0;
    for (Eigen::Index j = 0; j < n_i; ++j)
      cubes += std::pow(data->x.row(j).norm(), 3);
    spec.l_hess = cubes / (6.0 * std::sqrt(3.0));
    spec.shard.rows = data->x;
    spec.shard.labels = data->y;
    attach_logistic(spec, data);
  }
  return specs;
}

PotentialSpec quadratic_potential(int dim, double curvature) {
  if (dim < 1) throw std::invalid_argument("dim must be positive");
  if (curvature <= 0.0) throw std::invalid_argument("curvature must be positive");
  auto data = std::make_shared<QuadraticData>();
  data->p = curvature * MatrixXd::Identity(dim, dim);
  data->h = VectorXd::Zero(dim);
  data->like_prec = MatrixXd::Zero(dim, dim);
  data->obs_rows = MatrixXd(0, dim);
  data->prior_prec = data->p;
  data->prior_mean = VectorXd::Zero(dim);

  PotentialSpec spec;
  spec.dim_out = dim;
  spec.matrix_a = MatrixXd::Identity(dim, dim);
  spec.m_lower = curvature;
  spec.m_upper = curvature;
  spec.l_hess = 0.0;
  attach_quadratic(spec, data);
  return spec;
}

int global_dim(const std::vector<PotentialSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("no worker specs");
  const Eigen::Index dim = specs.front().matrix_a.cols();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const PotentialSpec& s = specs[i];
    if (s.matrix_a.cols() != dim || s.matrix_a.rows() != s.dim_out) {
      std::ostringstream msg;
      msg << "worker " << i + 1 << " has inconsistent dimensions";
      throw std::invalid_argument(msg.str());
    }
  }
  return static_cast<int>(dim);
}

ModelConstants model_constants(const std::vector<PotentialSpec>& specs,
                               const VectorXd& rho) {
  const int dim = global_dim(specs);
  if (rho.size() != static_cast<Eigen::Index>(specs.size()))
    throw std::invalid_argument("rho size does not match worker count");
  if ((rho.array() <= 0.0).any())
    throw std::invalid_argument("all rho_i must be positive");

  MatrixXd ata = MatrixXd::Zero(dim, dim);
  MatrixXd sum_m = MatrixXd::Zero(dim, dim);
  MatrixXd sum_rho = MatrixXd::Zero(dim, dim);
  double max_m_upper = 0.0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const MatrixXd gram = specs[i].matrix_a.transpose() * specs[i].matrix_a;
    ata += gram;
    sum_m += specs[i].m_lower * gram;
    sum_rho += rho[static_cast<Eigen::Index>(i)] * specs[i].m_upper *
               specs[i].m_upper * gram;
    max_m_upper = std::max(max_m_upper, specs[i].m_upper);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sum_m, Eigen::EigenvaluesOnly);
  const double m_u = es.eigenvalues().minCoeff();
  if (m_u <= 0.0)
    throw std::runtime_error(
        "stacked design is rank deficient; the full potential is not "
        "strongly convex");

  ModelConstants out;
  out.m_u = m_u;
  out.sigma_u_sq = max_eigenvalue(ata) * max_m_upper * max_m_upper / m_u;
  out.l_beta = std::sqrt(std::max(0.0, max_eigenvalue(sum_rho)));
  return out;
}

double posterior_potential(const std::vector<PotentialSpec>& specs,
                           const VectorXd& theta) {
  double total = 0.0;
  for (const PotentialSpec& s : specs) total += s.u(s.matrix_a * theta);
  return total;
}

VectorXd posterior_gradient(const std::vector<PotentialSpec>& specs,
                            const VectorXd& theta) {
  VectorXd g = VectorXd::Zero(theta.size());
  for (const PotentialSpec& s : specs)
    g += s.matrix_a.transpose() * s.grad_u(s.matrix_a * theta);
  return g;
}

MatrixXd posterior_hessian(const std::vector<PotentialSpec>& specs,
                           const VectorXd& theta) {
  MatrixXd h = MatrixXd::Zero(theta.size(), theta.size());
  for (const PotentialSpec& s : specs)
    h += s.matrix_a.transpose() * s.hess_u(s.matrix_a * theta) * s.matrix_a;
  return h;
}

VectorXd posterior_mode(const std::vector<PotentialSpec>& specs) {
  const int dim = global_dim(specs);
  NewtonResult res = newton_minimize(
      [&](const VectorXd& x) { return posterior_potential(specs, x); },
      [&](const VectorXd& x) { return posterior_gradient(specs, x); },
      [&](const VectorXd& x) { return posterior_hessian(specs, x); },
      VectorXd::Zero(dim));
  if (!res.converged)
    throw std::runtime_error("posterior mode search did not converge");
  return res.x;
}

VectorXd local_minimizer(const PotentialSpec& spec) {
  NewtonResult res = newton_minimize(spec.u, spec.grad_u, spec.hess_u,
                                     VectorXd::Zero(spec.dim_out));
  if (!res.converged)
    throw std::runtime_error("local minimizer search did not converge");
  return res.x;
}

}  // namespace dglmc
