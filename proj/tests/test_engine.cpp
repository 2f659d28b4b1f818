#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "dglmc/diagnostics.hpp"
#include "dglmc/engine.hpp"
#include "dglmc/kernels.hpp"
#include "dglmc/model.hpp"
#include "dglmc/tuning.hpp"
#include "oracles.hpp"

using namespace dglmc;

namespace {

struct ThreadsEnvGuard {
  explicit ThreadsEnvGuard(const char* value) {
    const char* old = std::getenv("DGLMC_THREADS");
    had_old_ = old != nullptr;
    if (had_old_) old_ = old;
    if (value == nullptr)
      unsetenv("DGLMC_THREADS");
    else
      setenv("DGLMC_THREADS", value, 1);
  }
  ~ThreadsEnvGuard() {
    if (had_old_)
      setenv("DGLMC_THREADS", old_.c_str(), 1);
    else
      unsetenv("DGLMC_THREADS");
  }
  bool had_old_ = false;
  std::string old_;
};

ClusterProfile uniform_profile(int b, double tau = 1.0, double comm = 0.0) {
  ClusterProfile profile;
  profile.tau = VectorXd::Constant(b, tau);
  profile.comm_cost = comm;
  return profile;
}

std::vector<PotentialSpec> toy_specs() {
  return {quadratic_potential(1, 1.0), quadratic_potential(1, 2.0)};
}

HyperParams toy_hyper(int n1 = 2, int n2 = 3) {
  VectorXd rho(2), gamma(2);
  rho << 0.2, 0.1;
  gamma << 0.25 * 0.2 / 1.2, 0.25 * 0.1 / 1.2;
  Eigen::VectorXi n_local(2);
  n_local << n1, n2;
  std::vector<PotentialSpec> specs = toy_specs();
  HyperParams hp = make_hyperparams(specs, rho, gamma, n_local);
  hp.validated = check_contraction(specs, hp).contraction_ok;
  return hp;
}

}  // namespace

TEST_CASE("requested_threads parses the environment variable") {
  {
    ThreadsEnvGuard guard(nullptr);
    CHECK(requested_threads() == 0);
  }
  {
    ThreadsEnvGuard guard("0");
    CHECK(requested_threads() == 0);
  }
  {
    ThreadsEnvGuard guard("8");
    CHECK(requested_threads() == 8);
  }
  {
    ThreadsEnvGuard guard("100000");
    CHECK(requested_threads() == 256);
  }
  {
    ThreadsEnvGuard guard("junk");
    CHECK(requested_threads() == 0);
  }
}

TEST_CASE("workload allocation follows inverse compute cost") {
  ClusterProfile profile;
  profile.tau = VectorXd(2);
  profile.tau << 1.0, 3.0;
  Eigen::VectorXi n = allocate_local_iters(profile, 4);
  CHECK(n[0] == 6);
  CHECK(n[1] == 2);
  CHECK((n[0] + n[1]) / 2 == 4);

  // Homogeneous costs: everyone gets n_avg.
  Eigen::VectorXi even = allocate_local_iters(uniform_profile(5), 3);
  for (int i = 0; i < 5; ++i) CHECK(even[i] == 3);

  // Extreme skew still leaves at least one step per worker.
  ClusterProfile skew;
  skew.tau = VectorXd(2);
  skew.tau << 1.0, 1000.0;
  Eigen::VectorXi clamped = allocate_local_iters(skew, 1);
  CHECK(clamped.minCoeff() >= 1);
}

TEST_CASE("kept sample bookkeeping") {
  RunConfig config;
  config.total_iters = 10;
  config.burn_in = 9;
  config.thin = 1;
  CHECK(kept_samples(config) == 1);

  config.burn_in = 3;
  config.thin = 2;
  CHECK(kept_samples(config) == 4);

  config.burn_in = 10;
  CHECK_THROWS_AS(kept_samples(config), std::invalid_argument);
  config.burn_in = 0;
  config.thin = 0;
  CHECK_THROWS_AS(kept_samples(config), std::invalid_argument);
}

TEST_CASE("run_dglmc records the right iterations") {
  auto specs = toy_specs();
  HyperParams hp = toy_hyper();
  RunConfig config;
  config.total_iters = 10;
  config.burn_in = 3;
  config.thin = 2;
  config.seed = 5;
  RunReport report =
      run_dglmc(specs, hp, config, uniform_profile(2), true);
  REQUIRE(report.theta_samples.rows() == 4);
  REQUIRE(report.kept_iterations.size() == 4);
  CHECK(report.kept_iterations[0] == 4);
  CHECK(report.kept_iterations[1] == 6);
  CHECK(report.kept_iterations[2] == 8);
  CHECK(report.kept_iterations[3] == 10);
  CHECK(report.iter_count == 10);
  CHECK(std::isnan(report.acceptance_rate));
}

TEST_CASE("run_dglmc requires the contraction certificate or an override") {
  auto specs = toy_specs();
  HyperParams hp = toy_hyper();
  REQUIRE_FALSE(hp.validated);  // multi-step workload, certificate declines
  RunConfig config;
  config.total_iters = 5;
  config.burn_in = 0;
  CHECK_THROWS_AS(run_dglmc(specs, hp, config, uniform_profile(2)),
                  std::invalid_argument);
  CHECK_NOTHROW(run_dglmc(specs, hp, config, uniform_profile(2), true));

  // Single-step workload passes the certificate and needs no override.
  HyperParams single = toy_hyper(1, 1);
  CHECK(single.validated);
  CHECK_NOTHROW(run_dglmc(specs, single, config, uniform_profile(2)));
}

TEST_CASE("run_dglmc wall-clock model") {
  auto specs = toy_specs();
  HyperParams hp = toy_hyper(2, 3);
  RunConfig config;
  config.total_iters = 7;
  config.burn_in = 0;
  ClusterProfile profile;
  profile.tau = VectorXd(2);
  profile.tau << 0.5, 2.0;
  profile.comm_cost = 0.25;
  RunReport report = run_dglmc(specs, hp, config, profile, true);
  // Per round: 2 * comm + max(2 * 0.5, 3 * 2.0) = 0.5 + 6.
  CHECK(report.wall_model == doctest::Approx(7 * 6.5));
}

TEST_CASE("run_dglmc is deterministic and thread-count invariant") {
  auto specs = toy_specs();
  HyperParams hp = toy_hyper();
  RunConfig config;
  config.total_iters = 200;
  config.burn_in = 50;
  config.seed = 99;
  config.record_z = true;

  RunReport serial;
  {
    ThreadsEnvGuard guard(nullptr);
    serial = run_dglmc(specs, hp, config, uniform_profile(2), true);
    RunReport again = run_dglmc(specs, hp, config, uniform_profile(2), true);
    CHECK((serial.theta_samples.array() == again.theta_samples.array()).all());
  }
  {
    ThreadsEnvGuard guard("2");
    RunReport threaded = run_dglmc(specs, hp, config, uniform_profile(2), true);
    CHECK((serial.theta_samples.array() == threaded.theta_samples.array())
              .all());
    REQUIRE(serial.z_samples.has_value());
    REQUIRE(threaded.z_samples.has_value());
    CHECK((serial.z_samples->array() == threaded.z_samples->array()).all());
  }
}

TEST_CASE("run_dglmc records z when asked") {
  auto specs = toy_specs();
  HyperParams hp = toy_hyper();
  RunConfig config;
  config.total_iters = 6;
  config.burn_in = 2;
  config.record_z = true;
  RunReport report = run_dglmc(specs, hp, config, uniform_profile(2), true);
  REQUIRE(report.z_samples.has_value());
  CHECK(report.z_samples->rows() == 4);
  CHECK(report.z_samples->cols() == 2);  // two scalar workers
}

TEST_CASE("run_dglmc reports divergence with the iteration index") {
  std::vector<PotentialSpec> specs = {quadratic_potential(1, 1.0)};
  VectorXd rho = VectorXd::Constant(1, 0.2);
  VectorXd gamma = VectorXd::Constant(1, 50.0);  // way past stability
  Eigen::VectorXi n_local = Eigen::VectorXi::Ones(1);
  HyperParams hp;
  hp.rho = rho;
  hp.gamma = gamma;
  hp.n_local = n_local;
  RunConfig config;
  config.total_iters = 2000;
  config.burn_in = 0;

  auto expect_divergence = [&] {
    try {
      run_dglmc(specs, hp, config, uniform_profile(1), true);
      FAIL("expected ChainDivergence");
    } catch (const ChainDivergence& e) {
      CHECK(e.iteration >= 1);
      CHECK(std::string(e.what()).find("diverged") != std::string::npos);
    }
  };
  expect_divergence();
  {
    // The threaded path must surface the same failure without deadlocking.
    ThreadsEnvGuard guard("2");
    std::vector<PotentialSpec> two = {quadratic_potential(1, 1.0),
                                      quadratic_potential(1, 1.0)};
    HyperParams hp2;
    hp2.rho = VectorXd::Constant(2, 0.2);
    hp2.gamma = VectorXd::Constant(2, 50.0);
    hp2.n_local = Eigen::VectorXi::Ones(2);
    try {
      run_dglmc(two, hp2, config, uniform_profile(2), true);
      FAIL("expected ChainDivergence");
    } catch (const ChainDivergence& e) {
      CHECK(e.iteration >= 1);
    }
  }
}

TEST_CASE("coupled pair: identical states stay identical") {
  auto specs = toy_specs();
  HyperParams hp = toy_hyper();
  PrecisionFactor factor = build_precision(specs, hp.rho);
  VectorXd mode = posterior_mode(specs);
  ChainState state =
      initial_state(specs, hp.rho, factor, mode, VectorXd::Zero(1));
  RunConfig config;
  config.total_iters = 50;
  config.seed = 3;
  std::vector<double> dist =
      run_coupled_pair(specs, hp, config, state, state);
  REQUIRE(dist.size() == 50);
  for (double v : dist) CHECK(v == 0.0);
}

TEST_CASE("coupled pair contracts single-step rounds by kappa") {
  std::vector<PotentialSpec> specs = {quadratic_potential(2, 1.0),
                                      quadratic_potential(2, 2.0)};
  ClusterProfile profile = uniform_profile(2);
  HyperParams hp = guideline_hyperparams(specs, 0.25, profile);
  hp.n_local = Eigen::VectorXi::Ones(2);  // single-step coupling bound
  double kappa = kappa_gamma(specs, hp);
  REQUIRE(kappa < 1.0);

  PrecisionFactor factor = build_precision(specs, hp.rho);
  VectorXd mode = posterior_mode(specs);
  ChainState a = initial_state(specs, hp.rho, factor, mode, VectorXd::Zero(2));
  ChainState b = a;
  // The contraction factor is attained exactly here (uniform isotropic
  // workers put the top of the coupling operator's spectrum at kappa), so
  // start the pair far apart: the measured ratio then sits at kappa with
  // roundoff relative to the gap, not to the O(1) chain states.
  b.theta = a.theta + VectorXd::Constant(2, 1.0e6);
  b.z[0] = a.z[0] - VectorXd::Constant(2, 5.0e5);

  RunConfig config;
  config.total_iters = 200;
  config.seed = 11;
  std::vector<double> dist = run_coupled_pair(specs, hp, config, a, b);
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t t = 0; t < dist.size(); ++t) {
    if (t > 0 && previous > 0.0)
      CHECK(dist[t] <= previous * kappa * (1.0 + 1e-12) + 1e-300);
    previous = dist[t];
  }
  CHECK(dist.back() < dist.front());
}

TEST_CASE("theta chain matches the exact stationary law") {
  // Heterogeneous two-worker quadratic model with multi-step workloads: the
  // invariant law of the discretized sampler is computable in closed form
  // through the linear round map.
  auto specs = toy_specs();
  HyperParams hp = toy_hyper(2, 3);

  std::vector<MatrixXd> p = {MatrixXd::Constant(1, 1, 1.0),
                             MatrixXd::Constant(1, 1, 2.0)};
  std::vector<VectorXd> h = {VectorXd::Zero(1), VectorXd::Zero(1)};
  std::vector<MatrixXd> a = {MatrixXd::Identity(1, 1),
                             MatrixXd::Identity(1, 1)};
  GaussianLaw law = oracle::stationary_theta_law(p, h, a, hp);
  CHECK(std::abs(law.mean[0]) < 1e-12);

  RunConfig config;
  config.total_iters = 200000;
  config.burn_in = 20000;
  config.seed = 17;
  RunReport report = run_dglmc(specs, hp, config, uniform_profile(2), true);
  Moments m = moments_with_se(report.theta_samples);

  CHECK(std::abs(m.mean[0] - law.mean[0]) < 4 * m.se[0]);
  const double t_eff =
      report.theta_samples.rows() / std::max(1.0, m.iat[0]);
  const double var_se = law.cov(0, 0) * std::sqrt(2.0 / t_eff);
  CHECK(std::abs(m.cov(0, 0) - law.cov(0, 0)) < 4 * var_se);
}
