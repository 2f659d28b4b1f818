#include "dglmc/cli.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "dglmc/baselines.hpp"
#include "dglmc/csv.hpp"
#include "dglmc/diagnostics.hpp"
#include "dglmc/engine.hpp"
#include "dglmc/synthetic.hpp"
#include "dglmc/tuning.hpp"

namespace dglmc {

namespace {

namespace fs = std::filesystem;

const std::set<std::string> kGenerateKeys = {
    "model.kind", "model.dim",     "model.n",   "model.shards",
    "model.like_var", "run.seed",  "output.dir"};

const std::set<std::string> kRunKeys = {
    "model.kind",        "model.data_dir",  "model.prior_var",
    "model.like_var",    "model.prior_prec", "cluster.workers",
    "cluster.tau",       "cluster.comm_cost", "sampler.kind",
    "sampler.c_gamma",   "sampler.n_local", "sampler.rho",
    "sampler.gamma",     "sampler.step",    "sampler.batch_frac",
    "run.iters",         "run.burn_in",     "run.thin",
    "run.seed",          "run.record_z",    "output.dir"};

const std::set<std::string> kBoundsKeys = {
    "bounds.dims", "bounds.eps", "bounds.workers", "bounds.c_gamma",
    "run.seed",    "output.dir"};

const std::set<std::string> kCompareKeys = {
    "model.kind",      "model.data_dir",   "model.prior_var",
    "model.like_var",  "model.prior_prec", "cluster.workers",
    "cluster.tau",     "cluster.comm_cost", "compare.samplers",
    "compare.alpha",   "dglmc.c_gamma",    "dglmc.n_local",
    "dsgld.step",      "dsgld.batch_frac", "dsgld.n_local",
    "mala.step",       "run.iters",        "run.burn_in",
    "run.thin",        "run.seed",         "run.record_z",
    "output.dir"};

struct BuiltModel {
  std::string kind;
  std::vector<PotentialSpec> specs;
  SyntheticDataset dataset;
  int dim = 0;
  int workers = 0;
};

BuiltModel build_model(const ExperimentConfig& config) {
  BuiltModel out;
  out.kind = config.get_string("model.kind");
  out.dataset = load_dataset(config.get_string("model.data_dir"));
  if (out.dataset.kind != out.kind)
    throw std::invalid_argument("model.kind is '" + out.kind +
                                "' but the dataset on disk is '" +
                                out.dataset.kind + "'");
  out.dim = out.dataset.dim;

  if (out.kind == "gaussian") {
    const long workers = config.get_long("cluster.workers",
                                         out.dataset.n_shards);
    if (workers != out.dataset.n_shards)
      throw std::invalid_argument(
          "cluster.workers must match the shard files for the gaussian model");
    const double prior_var = config.get_double("model.prior_var", 1.0);
    const double like_var =
        config.get_double("model.like_var", out.dataset.like_var);
    if (!(prior_var > 0.0) || !(like_var > 0.0))
      throw std::invalid_argument("variances must be positive");
    out.specs = gaussian_model(
        VectorXd::Zero(out.dim),
        prior_var * MatrixXd::Identity(out.dim, out.dim),
        like_var * MatrixXd::Identity(out.dim, out.dim), out.dataset.data);
    out.workers = out.dataset.n_shards;
  } else if (out.kind == "logistic") {
    const int workers = static_cast<int>(
        config.get_long("cluster.workers", out.dataset.n_shards));
    MatrixXd features(out.dataset.n, out.dim);
    VectorXd labels(out.dataset.n);
    Eigen::Index at = 0;
    for (const DataShard& shard : out.dataset.data.shards) {
      features.middleRows(at, shard.size()) = shard.rows;
      labels.segment(at, shard.size()) = shard.labels;
      at += shard.size();
    }
    out.specs = logistic_model(features, labels,
                               config.get_double("model.prior_prec", 1.0),
                               workers);
    out.workers = workers;
  } else {
    throw std::invalid_argument("unknown model.kind '" + out.kind + "'");
  }
  return out;
}

ClusterProfile build_profile(const ExperimentConfig& config, int workers) {
  ClusterProfile profile;
  if (config.has("cluster.tau")) {
    const std::vector<double> tau = config.get_double_list("cluster.tau");
    if (tau.size() == 1) {
      profile.tau = VectorXd::Constant(workers, tau[0]);
    } else if (static_cast<int>(tau.size()) == workers) {
      profile.tau =
          Eigen::Map<const VectorXd>(tau.data(),
                                     static_cast<Eigen::Index>(tau.size()));
    } else {
      throw std::invalid_argument(
          "cluster.tau must be a scalar or one entry per worker");
    }
  } else {
    profile.tau = VectorXd::Ones(workers);
  }
  profile.comm_cost = config.get_double("cluster.comm_cost", 0.0);
  return profile;
}

RunConfig build_run_config(const ExperimentConfig& config) {
  RunConfig rc;
  rc.total_iters = config.get_long("run.iters");
  rc.burn_in = config.get_long("run.burn_in", 0);
  rc.thin = config.get_long("run.thin", 1);
  rc.seed = config.get_u64("run.seed", 0);
  rc.record_z = config.get_bool("run.record_z", false);
  return rc;
}

std::string output_dir(const ExperimentConfig& config) {
  const std::string dir = config.get_string("output.dir");
  fs::create_directories(dir);
  return dir;
}

void write_theta_chain(const std::string& path, const RunReport& report) {
  CsvTable table;
  table.header.push_back("iter");
  for (Eigen::Index j = 0; j < report.theta_samples.cols(); ++j)
    table.header.push_back("theta_" + std::to_string(j + 1));
  table.rows.reserve(report.kept_iterations.size());
  for (std::size_t r = 0; r < report.kept_iterations.size(); ++r) {
    std::vector<std::string> row;
    row.reserve(table.header.size());
    row.push_back(std::to_string(report.kept_iterations[r]));
    for (Eigen::Index j = 0; j < report.theta_samples.cols(); ++j)
      row.push_back(format_g17(report.theta_samples(
          static_cast<Eigen::Index>(r), j)));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

void write_z_chain(const std::string& path, const RunReport& report) {
  CsvTable table;
  table.header.push_back("iter");
  for (Eigen::Index j = 0; j < report.z_samples->cols(); ++j)
    table.header.push_back("z_" + std::to_string(j + 1));
  for (std::size_t r = 0; r < report.kept_iterations.size(); ++r) {
    std::vector<std::string> row;
    row.push_back(std::to_string(report.kept_iterations[r]));
    for (Eigen::Index j = 0; j < report.z_samples->cols(); ++j)
      row.push_back(
          format_g17((*report.z_samples)(static_cast<Eigen::Index>(r), j)));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

void write_report_csv(const std::string& path, const BuiltModel& model,
                      const std::string& sampler, const RunConfig& rc,
                      const RunReport& report) {
  CsvTable table;
  table.header = {"key", "value"};
  auto add = [&](const std::string& k, const std::string& v) {
    table.rows.push_back({k, v});
  };
  add("model.kind", model.kind);
  add("model.dim", std::to_string(model.dim));
  add("model.n", std::to_string(model.dataset.n));
  add("cluster.workers", std::to_string(model.workers));
  add("sampler.kind", sampler);
  add("run.iters", std::to_string(rc.total_iters));
  add("run.burn_in", std::to_string(rc.burn_in));
  add("run.thin", std::to_string(rc.thin));
  add("run.seed", std::to_string(rc.seed));
  add("kept", std::to_string(report.kept_iterations.size()));
  add("wall_model", format_g17(report.wall_model));
  if (!std::isnan(report.acceptance_rate))
    add("acceptance_rate", format_g17(report.acceptance_rate));
  if (report.diagnostics) {
    const ChainDiagnostics& diag = *report.diagnostics;
    for (Eigen::Index j = 0; j < diag.mean.size(); ++j)
      add("mean_theta_" + std::to_string(j + 1), format_g17(diag.mean[j]));
    for (Eigen::Index j = 0; j < diag.se.size(); ++j)
      add("se_theta_" + std::to_string(j + 1), format_g17(diag.se[j]));
    for (Eigen::Index j = 0; j < diag.iat.size(); ++j)
      add("iat_theta_" + std::to_string(j + 1), format_g17(diag.iat[j]));
    for (Eigen::Index j = 0; j < diag.cov.rows(); ++j)
      for (Eigen::Index k = j; k < diag.cov.cols(); ++k)
        add("cov_" + std::to_string(j + 1) + "_" + std::to_string(k + 1),
            format_g17(diag.cov(j, k)));
  }
  write_csv(path, table);
}

HyperParams dglmc_hyper_from_config(const ExperimentConfig& config,
                                    const BuiltModel& model,
                                    const ClusterProfile& profile,
                                    bool override_validation,
                                    bool* engine_override) {
  const int b = model.workers;
  if (config.has("sampler.rho") || config.has("sampler.gamma")) {
    // Explicit hyperparameters: scalar rho/gamma broadcast to every worker.
    const double rho = config.get_double("sampler.rho");
    const double gamma = config.get_double("sampler.gamma");
    const int n_local =
        static_cast<int>(config.get_long("sampler.n_local", 1));
    HyperParams hyper;
    hyper.rho = VectorXd::Constant(b, rho);
    hyper.gamma = VectorXd::Constant(b, gamma);
    hyper.n_local = Eigen::VectorXi::Constant(b, n_local);
    if (!stability_ok(model.specs, hyper)) {
      if (!override_validation)
        throw std::invalid_argument(
            "sampler.gamma violates the stability constraint "
            "gamma <= rho/(1 + rho M); pass --override-validation to force");
      *engine_override = true;
    } else {
      hyper = make_hyperparams(model.specs, hyper.rho, hyper.gamma,
                               hyper.n_local);
      hyper.validated =
          check_contraction(model.specs, hyper).contraction_ok;
      *engine_override = true;  // stability holds; run even without the
                                // stronger contraction certificate
    }
    return hyper;
  }

  HyperParams hyper = guideline_hyperparams(
      model.specs, config.get_double("sampler.c_gamma", 0.25), profile);
  if (config.has("sampler.n_local")) {
    const int n_local = static_cast<int>(config.get_long("sampler.n_local"));
    if (n_local < 1)
      throw std::invalid_argument("sampler.n_local must be at least 1");
    hyper.n_local.setConstant(n_local);
    hyper.validated = check_contraction(model.specs, hyper).contraction_ok;
  }
  *engine_override = true;  // guideline satisfies stability by construction
  return hyper;
}

// Stable fallback when no step is configured: the guideline's mean local
// step shrunk by the worker count, so one full-gradient-scale SGLD step has
// about the same drift as one DG-LMC local step. Accuracy-matched
// comparisons should set the step explicitly (see calibrate_dsgld_step).
double default_dsgld_step(const BuiltModel& model,
                          const ClusterProfile& profile) {
  const HyperParams guide = guideline_hyperparams(model.specs, 0.25, profile);
  return guide.gamma.mean() / static_cast<double>(model.workers);
}

}  // namespace

void cmd_generate(const ExperimentConfig& config) {
  config.require_known_keys(kGenerateKeys);
  const SyntheticDataset ds = generate_dataset(
      config.get_string("model.kind"),
      static_cast<int>(config.get_long("model.dim")),
      config.get_long("model.n"),
      static_cast<int>(config.get_long("model.shards")),
      config.get_u64("run.seed", 0), config.get_double("model.like_var", 1.0));
  write_dataset(ds, output_dir(config));
}

void cmd_run(const ExperimentConfig& config, bool override_validation) {
  config.require_known_keys(kRunKeys);
  const BuiltModel model = build_model(config);
  const ClusterProfile profile = build_profile(config, model.workers);
  const RunConfig rc = build_run_config(config);
  const std::string sampler = config.get_string("sampler.kind", "dglmc");

  RunReport report;
  if (sampler == "dglmc") {
    bool engine_override = false;
    const HyperParams hyper = dglmc_hyper_from_config(
        config, model, profile, override_validation, &engine_override);
    report = run_dglmc(model.specs, hyper, rc, profile,
                       engine_override || override_validation);
  } else if (sampler == "dsgld") {
    const int n_local = static_cast<int>(config.get_long("sampler.n_local", 10));
    const double batch_frac = config.get_double("sampler.batch_frac", 0.1);
    double step = config.get_double("sampler.step", 0.0);
    if (step <= 0.0) step = default_dsgld_step(model, profile);
    report = run_dsgld(model.specs, step, batch_frac, n_local, rc, &profile);
  } else if (sampler == "mala") {
    double step = config.get_double("sampler.step", 0.0);
    if (step <= 0.0) step = calibrate_mala_step(model.specs, rc.seed);
    report = run_mala(model.specs, step, rc, &profile);
  } else {
    throw std::invalid_argument("unknown sampler.kind '" + sampler + "'");
  }

  const Moments mo = moments_with_se(report.theta_samples);
  report.diagnostics = ChainDiagnostics{mo.mean, mo.cov, mo.se, mo.iat};

  const std::string dir = output_dir(config);
  write_theta_chain(dir + "/theta_chain.csv", report);
  write_report_csv(dir + "/report.csv", model, sampler, rc, report);
  write_text_file(dir + "/wall.txt", format_g17(report.wall_model) + "\n");
  if (report.z_samples) write_z_chain(dir + "/z_chain.csv", report);
}

void cmd_bounds(const ExperimentConfig& config) {
  config.require_known_keys(kBoundsKeys);
  std::vector<double> dims = {8, 16, 32, 64};
  if (config.has("bounds.dims")) dims = config.get_double_list("bounds.dims");
  std::vector<double> eps_list = {0.4, 0.2, 0.1, 0.05};
  if (config.has("bounds.eps")) eps_list = config.get_double_list("bounds.eps");
  const int workers = static_cast<int>(config.get_long("bounds.workers", 1));
  const double c_gamma = config.get_double("bounds.c_gamma", 0.25);

  CsvTable table;
  table.header = {"d",       "eps",         "kappa_gamma", "r_term",
                  "contraction_ok", "w2_bias_axda", "rho_eps",     "gamma_eps",
                  "n_local_eps",    "n_eps",        "gradient_evals", "reason"};

  for (double dim_real : dims) {
    const int dim = static_cast<int>(dim_real);
    if (dim < 1 || dim_real != dim)
      throw std::invalid_argument("bounds.dims entries must be positive integers");
    std::vector<PotentialSpec> specs;
    specs.reserve(workers);
    for (int i = 0; i < workers; ++i)
      specs.push_back(quadratic_potential(dim, 1.0));
    ClusterProfile profile;
    profile.tau = VectorXd::Ones(workers);
    const HyperParams hyper = guideline_hyperparams(specs, c_gamma, profile);
    const ContractionReport contraction = check_contraction(specs, hyper);

    for (double eps : eps_list) {
      BoundReport rep;
      rep.kappa_gamma = contraction.kappa_gamma;
      rep.r_term = contraction.r_term;
      rep.contraction_ok = contraction.contraction_ok;

      const MixingBudget budget = mixing_budget(specs, hyper, eps);
      rep.rho_eps = budget.rho_eps;
      rep.gamma_eps = budget.gamma_eps;
      rep.n_local_eps = budget.n_local_eps;
      rep.n_eps = budget.n_eps;
      rep.gradient_evals = budget.gradient_evals;

      const BiasBoundReport bias = axda_bias_bound(
          specs, VectorXd::Constant(workers, budget.rho_eps));
      std::string reason;
      if (bias.applicable) {
        rep.w2_bias_axda = bias.bound;
      } else {
        reason = bias.reason;
      }
      if (!budget.applicable) {
        if (!reason.empty()) reason += "; ";
        reason += budget.reason;
      }
      rep.reason = reason;

      std::vector<std::string> row;
      row.push_back(std::to_string(dim));
      row.push_back(format_g17(eps));
      row.push_back(format_g17(rep.kappa_gamma));
      row.push_back(format_g17(rep.r_term));
      row.push_back(rep.contraction_ok ? "true" : "false");
      row.push_back(bias.applicable ? format_g17(rep.w2_bias_axda) : "");
      row.push_back(format_g17(rep.rho_eps));
      row.push_back(format_g17(rep.gamma_eps));
      row.push_back(std::to_string(rep.n_local_eps));
      row.push_back(std::to_string(rep.n_eps));
      row.push_back(std::to_string(rep.gradient_evals));
      row.push_back(rep.reason);
      table.rows.push_back(std::move(row));
    }
  }
  write_csv(output_dir(config) + "/bounds.csv", table);
}

void cmd_compare(const ExperimentConfig& config) {
  config.require_known_keys(kCompareKeys);
  const BuiltModel model = build_model(config);
  const ClusterProfile profile = build_profile(config, model.workers);
  const RunConfig rc = build_run_config(config);
  const double alpha = config.get_double("compare.alpha", 0.05);

  std::vector<std::string> samplers;
  {
    const std::string raw =
        config.get_string("compare.samplers", "dglmc,dsgld,mala");
    std::size_t start = 0;
    while (start <= raw.size()) {
      const std::size_t comma = raw.find(',', start);
      const std::string piece = comma == std::string::npos
                                    ? raw.substr(start)
                                    : raw.substr(start, comma - start);
      if (!piece.empty()) samplers.push_back(piece);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (samplers.empty())
      throw std::invalid_argument("compare.samplers is empty");
  }

  auto potential = [&](const VectorXd& theta) {
    return posterior_potential(model.specs, theta);
  };

  // The HPD reference always comes from a MALA chain, run on demand when
  // MALA is not among the requested samplers.
  double mala_step = config.get_double("mala.step", 0.0);
  if (mala_step <= 0.0) mala_step = calibrate_mala_step(model.specs, rc.seed);
  const RunReport mala_report = run_mala(model.specs, mala_step, rc, &profile);
  VectorXd ref_vals(mala_report.theta_samples.rows());
  for (Eigen::Index r = 0; r < mala_report.theta_samples.rows(); ++r)
    ref_vals[r] = potential(mala_report.theta_samples.row(r).transpose());
  const double eta_ref = quantile_type7(ref_vals, 1.0 - alpha);

  CsvTable table;
  table.header = {"sampler", "step", "acceptance_rate"};
  for (int j = 1; j <= model.dim; ++j)
    table.header.push_back("iat_theta_" + std::to_string(j));
  table.header.push_back("hpd_rel_error");
  table.header.push_back("wall_model");

  for (const std::string& sampler : samplers) {
    RunReport report;
    std::string step_str;
    if (sampler == "dglmc") {
      HyperParams hyper = guideline_hyperparams(
          model.specs, config.get_double("dglmc.c_gamma", 0.25), profile);
      if (config.has("dglmc.n_local")) {
        hyper.n_local.setConstant(
            static_cast<int>(config.get_long("dglmc.n_local")));
        hyper.validated =
            check_contraction(model.specs, hyper).contraction_ok;
      }
      report = run_dglmc(model.specs, hyper, rc, profile, true);
      step_str = format_g17(hyper.gamma.mean());
    } else if (sampler == "dsgld") {
      const int n_local =
          static_cast<int>(config.get_long("dsgld.n_local", 10));
      const double batch_frac = config.get_double("dsgld.batch_frac", 0.1);
      double step = config.get_double("dsgld.step", 0.0);
      if (step <= 0.0) step = default_dsgld_step(model, profile);
      report =
          run_dsgld(model.specs, step, batch_frac, n_local, rc, &profile);
      step_str = format_g17(step);
    } else if (sampler == "mala") {
      report = mala_report;
      step_str = format_g17(mala_step);
    } else {
      throw std::invalid_argument("unknown sampler '" + sampler +
                                  "' in compare.samplers");
    }

    const Moments mo = moments_with_se(report.theta_samples);
    const HpdSummary hpd =
        hpd_error(report.theta_samples, potential, alpha, eta_ref);

    std::vector<std::string> row;
    row.push_back(sampler);
    row.push_back(step_str);
    row.push_back(std::isnan(report.acceptance_rate)
                      ? ""
                      : format_g17(report.acceptance_rate));
    for (Eigen::Index j = 0; j < mo.iat.size(); ++j)
      row.push_back(format_g17(mo.iat[j]));
    row.push_back(format_g17(hpd.rel_error));
    row.push_back(format_g17(report.wall_model));
    table.rows.push_back(std::move(row));
  }
  write_csv(output_dir(config) + "/compare.csv", table);
}

ExperimentConfig load_cli_config(const CliInvocation& invocation) {
  ExperimentConfig config =
      invocation.config_path.empty()
          ? ExperimentConfig{}
          : ExperimentConfig::parse_file(invocation.config_path);
  if (invocation.seed) config.set("run.seed", std::to_string(*invocation.seed));
  if (invocation.out_dir) config.set("output.dir", *invocation.out_dir);
  return config;
}

int run_cli(const CliInvocation& invocation) {
  try {
    const ExperimentConfig config = load_cli_config(invocation);
    if (invocation.command == "generate") {
      cmd_generate(config);
    } else if (invocation.command == "run") {
      cmd_run(config, invocation.override_validation);
    } else if (invocation.command == "bounds") {
      cmd_bounds(config);
    } else if (invocation.command == "compare") {
      cmd_compare(config);
    } else {
      std::cerr << "unknown command '" << invocation.command << "'\n";
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace dglmc
