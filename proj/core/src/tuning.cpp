#include "dglmc/tuning.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dglmc/csv.hpp"

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

double min_eigenvalue_sum_gram(const std::vector<PotentialSpec>& specs) {
  const int dim = global_dim(specs);
  MatrixXd ata = MatrixXd::Zero(dim, dim);
  for (const PotentialSpec& s : specs)
    ata += s.matrix_a.transpose() * s.matrix_a;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(ata, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

HyperParams guideline_hyperparams(const std::vector<PotentialSpec>& specs,
                                  double c_gamma,
                                  const ClusterProfile& profile) {
  if (!(c_gamma >= 0.1 && c_gamma <= 0.5))
    throw std::invalid_argument("c_gamma must lie in [0.1, 0.5]");
  const std::size_t b = specs.size();
  if (b == 0) throw std::invalid_argument("no worker specs");

  VectorXd rho(b), gamma(b);
  double avg = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const Eigen::Index k = static_cast<Eigen::Index>(i);
    const double m_upper = specs[i].m_upper;
    if (!(m_upper > 0.0))
      throw std::invalid_argument("m_upper must be positive for every worker");
    rho[k] = 1.0 / (5.0 * m_upper);
    gamma[k] = c_gamma * rho[k] / (rho[k] * m_upper + 1.0);
    avg += rho[k] / (gamma[k] * (rho[k] * m_upper + 1.0));
  }
  avg /= static_cast<double>(b);
  // The average equals 1/c_gamma up to roundoff; nudge below the ceiling so
  // a last-ulp excess cannot bump the local budget to the next integer.
  const int n_avg = static_cast<int>(std::ceil(avg - 1e-9));

  Eigen::VectorXi n_local = allocate_local_iters(profile, std::max(1, n_avg));
  HyperParams hyper = make_hyperparams(specs, rho, gamma, n_local);
  hyper.validated = check_contraction(specs, hyper).contraction_ok;
  return hyper;
}

double kappa_gamma(const std::vector<PotentialSpec>& specs,
                   const HyperParams& hyper) {
  check_sizes(specs, hyper);
  double kappa = 0.0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const Eigen::Index k = static_cast<Eigen::Index>(i);
    const double m_tilde = specs[i].m_upper + 1.0 / hyper.rho[k];
    const double lo = std::abs(1.0 - hyper.gamma[k] * specs[i].m_lower);
    const double hi = std::abs(1.0 - hyper.gamma[k] * m_tilde);
    kappa = std::max(kappa, std::max(lo, hi));
  }
  return kappa;
}

ContractionReport check_contraction(const std::vector<PotentialSpec>& specs,
                                    const HyperParams& hyper, double c_ratio) {
  check_sizes(specs, hyper);
  const std::size_t b = specs.size();

  ContractionReport rep;
  rep.kappa_gamma = kappa_gamma(specs, hyper);

  double max_ngr = 0.0;       // max_i n_i gamma_i / rho_i
  double max_multi_gm = 0.0;  // max_i (n_i - 1) gamma_i Mt_i
  double max_ngm_sq = 0.0;    // max_i (n_i gamma_i Mt_i)^2 over n_i > 1
  double max_mt = 0.0, max_inv_rho = 0.0, max_mm = 0.0;
  double min_m = std::numeric_limits<double>::infinity();
  double min_ng = std::numeric_limits<double>::infinity();
  double max_ng = 0.0;
  rep.min_n_gamma_m = std::numeric_limits<double>::infinity();
  bool premises = true;
  bool all_single = true;

  for (std::size_t i = 0; i < b; ++i) {
    const Eigen::Index k = static_cast<Eigen::Index>(i);
    const double m = specs[i].m_lower;
    const double mu = specs[i].m_upper;
    const double rho = hyper.rho[k];
    const double gamma = hyper.gamma[k];
    const double n = static_cast<double>(hyper.n_local[k]);
    const double m_tilde = mu + 1.0 / rho;

    max_ngr = std::max(max_ngr, n * gamma / rho);
    max_multi_gm = std::max(max_multi_gm, (n - 1.0) * gamma * m_tilde);
    if (hyper.n_local[k] > 1) {
      all_single = false;
      const double v = n * gamma * m_tilde;
      max_ngm_sq = std::max(max_ngm_sq, v * v);
    }
    max_mt = std::max(max_mt, m_tilde);
    max_inv_rho = std::max(max_inv_rho, 1.0 / rho);
    max_mm = std::max(max_mm, m + mu + 1.0 / rho);
    min_m = std::min(min_m, m);
    min_ng = std::min(min_ng, n * gamma);
    max_ng = std::max(max_ng, n * gamma);
    rep.min_n_gamma_m = std::min(rep.min_n_gamma_m, n * gamma * m);
  }

  // Premises of the one-step vs multi-step contraction arguments.
  for (std::size_t i = 0; i < b && premises; ++i) {
    const Eigen::Index k = static_cast<Eigen::Index>(i);
    const double m = specs[i].m_lower;
    const double mu = specs[i].m_upper;
    const double rho = hyper.rho[k];
    const double gamma = hyper.gamma[k];
    const double n = static_cast<double>(hyper.n_local[k]);
    const double m_tilde = mu + 1.0 / rho;
    if (all_single) {
      premises = gamma <= 2.0 / (m + mu + 1.0 / rho);
    } else {
      premises = (gamma < 1.0 / m_tilde) && (n * gamma <= 2.0 / (m + m_tilde));
    }
  }

  // Coupling remainder; every term carries a factor that vanishes when all
  // workers run exactly one local step.
  rep.r_term = max_ngr * max_multi_gm / 2.0 + max_ngr * max_ngm_sq +
               4.0 * max_multi_gm * max_multi_gm;
  rep.premises_ok = premises;
  rep.contraction_ok = premises && rep.r_term < rep.min_n_gamma_m / 2.0;

  rep.a0 = max_mt * max_inv_rho / 2.0 + 4.0 * max_mt * max_mt;
  rep.a1 = max_mt * max_mt * max_inv_rho;
  const double ratio = min_ng / max_ng;
  rep.c = c_ratio > 0.0 ? c_ratio : ratio;
  const double step_cap =
      std::min(rep.c * min_m / (2.0 * rep.a0 +
                                std::sqrt(2.0 * rep.a1 * rep.c * min_m)),
               2.0 / max_mm);
  rep.s46_ok = ratio >= rep.c && max_ng <= step_cap;
  return rep;
}

BiasBoundReport axda_bias_bound(const std::vector<PotentialSpec>& specs,
                                const VectorXd& rho) {
  const ModelConstants mc = model_constants(specs, rho);
  const int dim = global_dim(specs);

  BiasBoundReport rep;
  rep.rho_bar = rho.maxCoeff();

  std::ostringstream reason;
  const double rho_cap = 1.0 / (12.0 * mc.sigma_u_sq);
  if (rep.rho_bar > rho_cap) {
    reason << "max rho = " << format_g17(rep.rho_bar)
           << " exceeds 1/(12 sigma_u_sq) = " << format_g17(rho_cap);
  }
  if (12.0 * mc.l_beta * mc.l_beta > mc.m_u) {
    if (!reason.str().empty()) reason << "; ";
    reason << "12 l_beta^2 = " << format_g17(12.0 * mc.l_beta * mc.l_beta)
           << " exceeds m_u = " << format_g17(mc.m_u);
  }
  if (!reason.str().empty()) {
    rep.applicable = false;
    rep.reason = reason.str();
    return rep;
  }

  const VectorXd theta_star = posterior_mode(specs);
  double sum_rm2 = 0.0;   // sum_i rho_i M_i^2 |A_i theta* - z_i*|^2
  double sum_r2m3 = 0.0;  // same with rho_i^2 M_i^3
  double log_prod = 0.0;  // log prod_i (1 + rho_i M_i)^{d_i}
  MatrixXd sum_gram = MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const Eigen::Index k = static_cast<Eigen::Index>(i);
    const double r = rho[k];
    const double mu = specs[i].m_upper;
    const VectorXd z_star = local_minimizer(specs[i]);
    const double delta =
        (specs[i].matrix_a * theta_star - z_star).squaredNorm();
    sum_rm2 += r * mu * mu * delta;
    sum_r2m3 += r * r * mu * mu * mu * delta;
    log_prod += specs[i].dim_out * std::log1p(r * mu);
    sum_gram += r * r * mu * mu * mu *
                (specs[i].matrix_a.transpose() * specs[i].matrix_a);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sum_gram, Eigen::EigenvaluesOnly);
  const double lam_r2m3 = es.eigenvalues().maxCoeff();

  const double lb2 = mc.l_beta * mc.l_beta / mc.m_u;
  const double head = dim * lb2 + sum_rm2;
  rep.a1_term = head * (1.0 + 2.0 * lb2) +
                2.0 * std::pow(mc.l_beta, 4) / (mc.m_u * mc.m_u) +
                0.5 * log_prod;

  const double expo = 2.0 * dim * lam_r2m3 / mc.m_u + 2.0 * sum_r2m3 +
                      8.0 * std::pow(mc.l_beta, 4) / (mc.m_u * mc.m_u) +
                      8.0 * head * lb2;
  rep.a3_term = std::exp(log_prod + expo) - 2.0 * std::exp(0.5 * log_prod) + 1.0;

  rep.bound = std::sqrt(2.0 / mc.m_u) *
              std::max(rep.a1_term, std::sqrt(std::max(0.0, rep.a3_term)));
  rep.applicable = true;
  return rep;
}

MixingBudget mixing_budget(const std::vector<PotentialSpec>& specs,
                           const HyperParams& hyper, double eps) {
  check_sizes(specs, hyper);
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const std::size_t b = specs.size();
  const int dim = global_dim(specs);

  const double m = specs[0].m_lower;
  const double m_upper = specs[0].m_upper;
  for (const PotentialSpec& s : specs) {
    if (std::abs(s.m_lower - m) > 1e-12 * std::max(1.0, m) ||
        std::abs(s.m_upper - m_upper) > 1e-12 * std::max(1.0, m_upper))
      throw std::invalid_argument(
          "mixing_budget requires homogeneous worker constants");
  }
  const double rho0 = hyper.rho[0], gamma0 = hyper.gamma[0];
  const int n0 = hyper.n_local[0];
  for (Eigen::Index k = 0; k < hyper.rho.size(); ++k) {
    if (hyper.rho[k] != rho0 || hyper.gamma[k] != gamma0 ||
        hyper.n_local[k] != n0)
      throw std::invalid_argument(
          "mixing_budget requires homogeneous hyperparameters");
  }
  if (!(m > 0.0))
    throw std::invalid_argument(
        "mixing_budget requires strongly convex local potentials");

  const ModelConstants mc = model_constants(specs, hyper.rho);
  const double sig2 = mc.sigma_u_sq;

  // Worker-level minimizer offsets.
  const VectorXd theta_star = posterior_mode(specs);
  double sum_m2d = 0.0, sum_m3d = 0.0, sum_dm = 0.0, u_star_sq = 0.0;
  double sum_di = 0.0, max_di = 0.0;
  for (const PotentialSpec& s : specs) {
    const VectorXd z_star = local_minimizer(s);
    const VectorXd anchor = s.matrix_a * theta_star;
    const double delta = (anchor - z_star).squaredNorm();
    sum_m2d += s.m_upper * s.m_upper * delta;
    sum_m3d += std::pow(s.m_upper, 3) * delta;
    sum_dm += s.dim_out * s.m_upper;
    u_star_sq += anchor.squaredNorm();
    sum_di += s.dim_out;
    max_di = std::max(max_di, static_cast<double>(s.dim_out));
  }

  // Tolerance budget: four upper bounds, the smallest wins.
  const double r0 = 2.0 * sig2 * (dim * sig2 + sum_m2d) + 2.0 * sig2 * sig2;
  const double r1 = dim * sig2 + sum_m2d + sum_dm / 2.0;
  const double r2 = 2.0 * dim * m_upper * sig2 + 2.0 * sum_m3d +
                    8.0 * sig2 * sig2 +
                    8.0 * sig2 * (2.0 * dim * sig2 + 2.0 * sum_m2d);
  const double eps_scale = eps * std::sqrt(mc.m_u) / (3.0 * std::sqrt(2.0));
  const double branch1 =
      (-r1 + std::sqrt(r1 * r1 + 4.0 * r0 * eps_scale)) / (2.0 * r0);
  const double branch2 =
      eps_scale /
      std::sqrt(r2 + std::pow(r2 / (12.0 * sig2) + sum_dm, 2));
  const double branch3 = 1.0 / (12.0 * sig2);
  const double branch4 =
      (-sum_dm + std::sqrt(sum_dm * sum_dm + 6.0 * r2)) / (2.0 * r2);

  MixingBudget out;
  out.rho_eps = std::min(std::min(branch1, branch2), std::min(branch3, branch4));

  const double m_tilde = m_upper + 1.0 / out.rho_eps;
  const double m_tilde_lo = m + 1.0 / out.rho_eps;
  const double norm_sq = 1.0 / min_eigenvalue_sum_gram(specs);

  // Step-size budget, smooth route.
  const double c_rho = 4.0 * m_tilde * m_tilde * (1.0 + norm_sq) / (5.0 * m);
  const double c0 =
      0.5 * m_tilde * m_tilde * (m_tilde / m_tilde_lo + 1.0 / 6.0) * sum_di;
  const double c1 = sum_di;
  const double c2 = eps * eps / (9.0 * c_rho);
  const double gamma_cap = m / (40.0 * m_tilde * m_tilde);
  out.gamma_smooth = std::min(
      (-c1 + std::sqrt(c1 * c1 + 4.0 * c0 * c2)) / (2.0 * c0), gamma_cap);

  // Step-size budget, Hessian-Lipschitz route (when every worker has a
  // finite constant); the larger admissible step wins.
  bool have_l = true;
  double l_max = 0.0;
  for (const PotentialSpec& s : specs) {
    if (std::isnan(s.l_hess)) {
      have_l = false;
      break;
    }
    l_max = std::max(l_max, s.l_hess);
  }
  out.gamma_eps = out.gamma_smooth;
  if (have_l) {
    const double inner =
        5.0 * max_di * c_rho * m_tilde * m_tilde *
        (4.0 + max_di * l_max * l_max * m / (20.0 * std::pow(m_tilde, 4)));
    const double alt1 = eps / (6.0 * b * std::sqrt(inner));
    const double alt2 =
        eps / (6.0 * b * (5.0 * c_rho * max_di * std::pow(m, 3) /
                          (m_tilde * m_tilde)));
    out.gamma_hess_lip = std::min(std::min(alt1, gamma_cap), alt2);
    out.gamma_eps = std::max(out.gamma_smooth, out.gamma_hess_lip);
  }

  out.n_local_eps = std::max(
      1L, static_cast<long>(std::floor(m / (20.0 * out.gamma_eps * m_tilde *
                                            m_tilde))));

  // Initial transport scale at the budget point, for the iteration count.
  {
    const double gamma = out.gamma_eps;
    const double rho = out.rho_eps;
    const double n = static_cast<double>(out.n_local_eps);
    const double kappa =
        std::max(std::abs(1.0 - gamma * m), std::abs(1.0 - gamma * m_tilde));
    const double k2 = kappa * kappa;
    const double inner =
        (2.0 / (n * (1.0 - k2))) *
            (((1.0 + k2) / (1.0 - k2)) * gamma * m_upper * m_upper * u_star_sq +
             gamma * dim / rho + 2.0 * sum_di) +
        2.0 * b * gamma * n * (1.0 + dim / rho) + 4.0 * sum_di;
    out.e0 = 3.0 * std::sqrt((1.0 + norm_sq) * 2.0 * n * gamma * inner);
  }

  if (std::isinf(eps) || out.e0 <= eps) {
    out.n_eps = 1;
  } else {
    out.n_eps = std::max(
        1L, static_cast<long>(std::ceil(2.0 * std::log(out.e0 / eps) /
                                        (out.n_local_eps * out.gamma_eps * m))));
  }
  out.gradient_evals = static_cast<long long>(out.n_eps) * out.n_local_eps *
                       static_cast<long long>(b);
  out.applicable = true;
  return out;
}

std::string to_flat_text(const BoundReport& report) {
  std::ostringstream out;
  out << "kappa_gamma = " << format_g17(report.kappa_gamma) << "\n"
      << "r_term = " << format_g17(report.r_term) << "\n"
      << "contraction_ok = " << (report.contraction_ok ? "true" : "false")
      << "\n"
      << "w2_bias_axda = " << format_g17(report.w2_bias_axda) << "\n"
      << "rho_eps = " << format_g17(report.rho_eps) << "\n"
      << "gamma_eps = " << format_g17(report.gamma_eps) << "\n"
      << "n_local_eps = " << report.n_local_eps << "\n"
      << "n_eps = " << report.n_eps << "\n"
      << "gradient_evals = " << report.gradient_evals << "\n"
      << "reason = " << report.reason << "\n";
  return out.str();
}

}  // namespace dglmc
