#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace hfke {

enum class ExperimentKind {
  scaling_demo,
  convergence,
  translate_table,
  filter_almost_linear,
  filter_cubic,
  filter_custom,
  compare_pf,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(const std::string& name);

/// Flat key = value configuration with one [experiment] section.
/// Unset optionals fall back to the documented per-experiment defaults;
/// every field that is set serializes back verbatim (round-trip safe).
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::scaling_demo;
  std::string out_dir = "out";

  std::optional<double> alpha, beta;
  std::optional<int> n_modes;
  std::optional<double> dt, dt_obs, horizon;
  std::optional<double> tolerance, overlap, domain, shift_threshold;
  std::optional<int> n_particles;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;   // filter_custom / compare_pf: linear | cubic | almost_linear
  std::optional<std::string> scheme;  // cn | explicit
  std::optional<double> snapshot_interval;
  std::optional<int> snapshot_points;
  std::optional<int> sim_substeps;    // path steps per observation interval
  std::optional<bool> recover_density;
  std::optional<bool> parallel_offline;

  bool operator==(const ExperimentConfig&) const = default;

  std::string serialize() const;
  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig parse_file(const std::string& path);

  /// Throws with a descriptive message if required keys for the experiment
  /// are missing or durations are not positive.
  void validate() const;
};

}  // namespace hfke
