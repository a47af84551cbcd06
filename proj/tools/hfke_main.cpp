#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "hfke/config.hpp"
#include "hfke/experiments.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool have_seed = false;
  bool parallel_offline = false;
};

void add_experiment_command(CLI::App& app, hfke::ExperimentKind kind,
                            const std::string& description, int& exit_code) {
  auto args = std::make_shared<CommonArgs>();
  CLI::App* cmd = app.add_subcommand(hfke::to_string(kind), description);
  cmd->add_option("--config", args->config_path, "experiment config file")->required();
  cmd->add_option("--out", args->out_override, "override the output directory");
  cmd->add_option("--seed", args->seed_override, "override the seed")
      ->each([args](const std::string&) { args->have_seed = true; });
  cmd->add_flag("--parallel-offline", args->parallel_offline,
                "build window propagators concurrently");
  cmd->callback([args, kind, &exit_code]() {
    try {
      hfke::ExperimentConfig cfg = hfke::ExperimentConfig::parse_file(args->config_path);
      if (cfg.experiment != kind)
        throw std::invalid_argument("config section [" + hfke::to_string(cfg.experiment) +
                                    "] does not match the subcommand");
      if (!args->out_override.empty()) cfg.out_dir = args->out_override;
      if (args->have_seed) cfg.seed = args->seed_override;
      if (args->parallel_offline) cfg.parallel_offline = true;
      hfke::run_experiment(cfg, std::cout);
      exit_code = 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      exit_code = 1;
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hermite spectral solver for the 1D forward Kolmogorov equation and a "
               "spectral nonlinear filter with a particle-filter baseline"};
  app.require_subcommand(1);

  int exit_code = 0;
  add_experiment_command(app, hfke::ExperimentKind::scaling_demo,
                         "truncation error vs mode for several scaling factors", exit_code);
  add_experiment_command(app, hfke::ExperimentKind::convergence,
                         "L2 error of the Galerkin solver vs truncation mode", exit_code);
  add_experiment_command(app, hfke::ExperimentKind::translate_table,
                         "truncation error vs peak offset for two translation factors",
                         exit_code);
  add_experiment_command(app, hfke::ExperimentKind::filter_almost_linear,
                         "moving-window spectral filter on the almost-linear sensor", exit_code);
  add_experiment_command(app, hfke::ExperimentKind::filter_cubic,
                         "single-window spectral filter on the cubic sensor", exit_code);
  add_experiment_command(app, hfke::ExperimentKind::filter_custom,
                         "spectral filter on a named model", exit_code);
  add_experiment_command(app, hfke::ExperimentKind::compare_pf,
                         "spectral filter against a bootstrap particle filter", exit_code);

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}
