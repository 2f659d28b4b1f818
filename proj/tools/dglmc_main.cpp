#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dglmc/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"distributed Langevin-within-Gibbs sampling harness"};
  app.require_subcommand(1);

  dglmc::CliInvocation inv;
  std::uint64_t seed = 0;
  std::string out_dir;

  const std::vector<std::pair<std::string, std::string>> subcommands = {
      {"generate", "draw a synthetic sharded dataset"},
      {"run", "run one sampler and write its chain"},
      {"bounds", "tabulate contraction certificates and mixing budgets"},
      {"compare", "run several samplers and compare their diagnostics"}};

  std::map<std::string, CLI::Option*> seed_opts, out_opts;
  for (const auto& [name, description] : subcommands) {
    CLI::App* cmd = app.add_subcommand(name, description);
    cmd->add_option("--config", inv.config_path, "experiment config file")
        ->check(CLI::ExistingFile);
    seed_opts[name] = cmd->add_option("--seed", seed, "override run.seed");
    out_opts[name] = cmd->add_option("--out", out_dir, "override output.dir");
    if (name == "run")
      cmd->add_flag("--override-validation", inv.override_validation,
                    "run even when hyperparameters fail validation");
  }

  CLI11_PARSE(app, argc, argv);

  CLI::App* parsed = app.get_subcommands().front();
  inv.command = parsed->get_name();
  if (seed_opts[inv.command]->count() > 0) inv.seed = seed;
  if (out_opts[inv.command]->count() > 0) inv.out_dir = out_dir;
  return dglmc::run_cli(inv);
}
