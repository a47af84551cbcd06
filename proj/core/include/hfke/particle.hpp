#pragma once

#include <cstdint>
#include <vector>

#include "hfke/filter.hpp"
#include "hfke/rng.hpp"

namespace hfke {

/// Initial state distribution used by the path simulator and the particle
/// filter. `quartic` samples the density proportional to exp(-x^4/4) by
/// rejection from a Gaussian envelope.
struct InitialState {
  enum class Kind { fixed, gaussian, quartic };
  Kind kind = Kind::fixed;
  double value = 0.0;
  double mean = 0.0;
  double sd = 1.0;

  double sample(RngStream& rng) const;
};

struct SimConfig {
  ObservationModel model;
  InitialState x0;
  double dt = 1e-3;     // simulation step, <= dt_obs of any consuming filter
  double horizon = 1.0; // T
  std::uint64_t seed = 0;
};

/// Simulated signal/observation path; observations are cumulative with y[0] = 0.
struct Path {
  std::vector<double> times, states, observations;
};

/// Euler-Maruyama discretization of the signal model, fully deterministic
/// given the seed (see rng.hpp for the stream layout).
Path simulate_path(const SimConfig& cfg);

/// Keep every stride-th sample (including index 0).
Path downsample(const Path& path, int stride);

struct ParticleCloud {
  std::vector<double> positions;
  std::vector<double> weights;  // nonnegative, summing to 1
};

double effective_sample_size(const ParticleCloud& cloud);

/// Systematic resampling with the given uniform offset in [0,1): n_p evenly
/// spaced pointers over the cumulative weights; weights reset to 1/n_p.
void systematic_resample(ParticleCloud& cloud, double offset01);

struct PfStepInfo {
  double ess = 0.0;
  bool resampled = false;
};

/// Bootstrap step: Euler-Maruyama propagation over dt_obs, reweighting by
/// the continuous-observation likelihood increment
/// exp(h(x) dy / S - h(x)^2 dt_obs / (2S)), normalization, and systematic
/// resampling when ESS < n_p/2. Propagation noise and the resampling offset
/// come from separate streams.
PfStepInfo pf_step(ParticleCloud& cloud, double y_new, double y_prev,
                   const ObservationModel& model, double t, double dt_obs,
                   RngStream& propagation_rng, RngStream& resample_rng);

struct PfResult {
  std::vector<double> t, mean, ess;
  std::vector<int> resampled;
};

/// Full bootstrap particle filter over a path sampled at dt_obs spacing.
PfResult run_pf(const ObservationModel& model, const Path& path, int n_particles,
                double dt_obs, std::uint64_t seed, const InitialState& x0);

/// Root-mean-square error of an estimate series against the truth.
double rmse(const std::vector<double>& estimate, const std::vector<double>& truth);

}  // namespace hfke
