#pragma once

#include <iosfwd>
#include <string>

#include "hfke/config.hpp"
#include "hfke/filter.hpp"
#include "hfke/particle.hpp"

namespace hfke {

/// Named signal models used by the filter experiments.
struct NamedModel {
  ObservationModel model;
  AsymptoticProfile profile;   // stationary-density envelope for the basis guideline
  InitialState x0;
  double default_domain = 0.0; // [-L, L]
};

NamedModel make_named_model(const std::string& name);

/// Runs one experiment, writing its CSV artifacts into cfg.out_dir.
/// Everything written to the output directory is deterministic for a fixed
/// config; wall-clock timings go to `log` only.
void run_experiment(const ExperimentConfig& cfg, std::ostream& log);

void run_scaling_demo(const ExperimentConfig& cfg, std::ostream& log);
void run_convergence(const ExperimentConfig& cfg, std::ostream& log);
void run_translate_table(const ExperimentConfig& cfg, std::ostream& log);
void run_filter(const ExperimentConfig& cfg, std::ostream& log);   // filter_* experiments
void run_compare(const ExperimentConfig& cfg, std::ostream& log);  // compare_pf

}  // namespace hfke
