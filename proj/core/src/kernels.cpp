#include "dglmc/kernels.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dglmc {

namespace {

void check_sizes(const std::vector<PotentialSpec>& specs,
                 const HyperParams& hyper) {
  const Eigen::Index b = static_cast<Eigen::Index>(specs.size());
  if (hyper.rho.size() != b || hyper.gamma.size() != b ||
      hyper.n_local.size() != b)
    throw std::invalid_argument(
        "hyperparameter vectors do not match the worker count");
}

}  // namespace

bool stability_ok(const std::vector<PotentialSpec>& specs,
                  const HyperParams& hyper) {
  check_sizes(specs, hyper);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const Eigen::Index k = static_cast<Eigen::Index>(i);
    const double rho = hyper.rho[k];
    const double gamma = hyper.gamma[k];
    if (!(rho > 0.0) || !(gamma > 0.0)) return false;
    if (hyper.n_local[k] < 1) return false;
    if (gamma > rho / (1.0 + rho * specs[i].m_upper)) return false;
  }
  return true;
}

HyperParams make_hyperparams(const std::vector<PotentialSpec>& specs,
                             const VectorXd& rho, const VectorXd& gamma,
                             const Eigen::VectorXi& n_local) {
  HyperParams hyper{rho, gamma, n_local, false};
  check_sizes(specs, hyper);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const Eigen::Index k = static_cast<Eigen::Index>(i);
    std::ostringstream msg;
    if (!(hyper.rho[k] > 0.0)) {
      msg << "rho must be positive for worker " << i + 1;
      throw std::invalid_argument(msg.str());
    }
    if (!(hyper.gamma[k] > 0.0)) {
      msg << "gamma must be positive for worker " << i + 1;
      throw std::invalid_argument(msg.str());
    }
    if (hyper.n_local[k] < 1) {
      msg << "n_local must be at least 1 for worker " << i + 1;
      throw std::invalid_argument(msg.str());
    }
    const double bound = hyper.rho[k] / (1.0 + hyper.rho[k] * specs[i].m_upper);
    if (hyper.gamma[k] > bound) {
      msg << "gamma = " << hyper.gamma[k] << " exceeds the stability bound "
          << bound << " for worker " << i + 1;
      throw std::invalid_argument(msg.str());
    }
  }
  return hyper;
}

PrecisionFactor build_precision(const std::vector<PotentialSpec>& specs,
                                const VectorXd& rho) {
  const int dim = global_dim(specs);
  if (rho.size() != static_cast<Eigen::Index>(specs.size()))
    throw std::invalid_argument("rho size does not match worker count");
  if ((rho.array() <= 0.0).any())
    throw std::invalid_argument("all rho_i must be positive");

  PrecisionFactor out;
  out.q = MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < specs.size(); ++i)
    out.q += specs[i].matrix_a.transpose() * specs[i].matrix_a /
             rho[static_cast<Eigen::Index>(i)];
  Eigen::LLT<MatrixXd> llt(out.q);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "master precision is not positive definite; the stacked A_i lack "
        "full column rank");
  out.chol = llt.matrixL();
  out.log_det = 2.0 * out.chol.diagonal().array().log().sum();
  return out;
}

VectorXd lmc_local_step(const VectorXd& z, const VectorXd& theta,
                        const PotentialSpec& spec, double rho_i,
                        double gamma_i, const VectorXd& noise) {
  const double keep = 1.0 - gamma_i / rho_i;
  const double pull = gamma_i / rho_i;
  const VectorXd anchor = spec.matrix_a * theta;
  const VectorXd grad = spec.grad_u(z);
  return keep * z + pull * anchor - gamma_i * grad +
         std::sqrt(2.0 * gamma_i) * noise;
}

VectorXd run_local_chain(const VectorXd& z0, const VectorXd& theta,
                         const PotentialSpec& spec, double rho_i,
                         double gamma_i, int n_steps, NormalStream& stream) {
  VectorXd z = z0;
  VectorXd noise(z.size());
  for (int k = 0; k < n_steps; ++k) {
    stream.fill(noise);
    z = lmc_local_step(z, theta, spec, rho_i, gamma_i, noise);
  }
  return z;
}

VectorXd master_draw(const std::vector<VectorXd>& z,
                     const PrecisionFactor& factor,
                     const std::vector<PotentialSpec>& specs,
                     const VectorXd& rho, const VectorXd& noise) {
  if (z.size() != specs.size())
    throw std::invalid_argument("z block count does not match worker count");
  const Eigen::Index dim = factor.q.rows();
  VectorXd rhs = VectorXd::Zero(dim);
  for (std::size_t i = 0; i < specs.size(); ++i)
    rhs += specs[i].matrix_a.transpose() * z[i] /
           rho[static_cast<Eigen::Index>(i)];
  // mu = Q^{-1} rhs via the two triangular solves, then theta = mu + L^{-T} xi.
  const auto lower = factor.chol.triangularView<Eigen::Lower>();
  const auto upper = factor.chol.transpose().triangularView<Eigen::Upper>();
  VectorXd mu = upper.solve(lower.solve(rhs));
  return mu + upper.solve(noise);
}

ChainState initial_state(const std::vector<PotentialSpec>& specs,
                         const VectorXd& rho, const PrecisionFactor& factor,
                         const VectorXd& theta_star, const VectorXd& noise) {
  ChainState state;
  state.z.reserve(specs.size());
  for (const PotentialSpec& s : specs) state.z.push_back(s.matrix_a * theta_star);
  state.theta = master_draw(state.z, factor, specs, rho, noise);
  state.iteration = 0;
  return state;
}

}  // namespace dglmc
