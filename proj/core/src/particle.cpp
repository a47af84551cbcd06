#include "hfke/particle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hfke {

double InitialState::sample(RngStream& rng) const {
  switch (kind) {
    case Kind::fixed:
      return value;
    case Kind::gaussian:
      return mean + sd * rng.normal();
    case Kind::quartic: {
      // Density proportional to exp(-x^4/4), rejection from N(0, 1.2^2);
      // the envelope constant covers the ratio everywhere.
      for (int tries = 0; tries < 10000; ++tries) {
        const double x = 1.2 * rng.normal();
        const double log_target = -0.25 * x * x * x * x;
        const double log_proposal = -x * x / (2.0 * 1.44);
        if (std::log(std::max(rng.uniform(), 1e-300)) < log_target - log_proposal - 0.3)
          return x;
      }
      throw std::runtime_error("InitialState: rejection sampler stalled");
    }
  }
  throw std::logic_error("InitialState: unknown kind");
}

Path simulate_path(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0) || !(cfg.horizon > 0.0))
    throw std::invalid_argument("simulate_path: dt and horizon must be positive");
  const double raw = cfg.horizon / cfg.dt;
  const int steps = static_cast<int>(std::lround(raw));
  if (std::abs(steps * cfg.dt - cfg.horizon) > 1e-9 * std::max(1.0, cfg.horizon))
    throw std::invalid_argument("simulate_path: dt must divide the horizon");

  RngStream init_rng(derive_stream(cfg.seed, kStreamPathInit));
  RngStream state_rng(derive_stream(cfg.seed, kStreamPathState));
  RngStream obs_rng(derive_stream(cfg.seed, kStreamPathObs));

  Path path;
  path.times.resize(static_cast<std::size_t>(steps) + 1);
  path.states.resize(static_cast<std::size_t>(steps) + 1);
  path.observations.resize(static_cast<std::size_t>(steps) + 1);

  double x = cfg.x0.sample(init_rng);
  double y = 0.0;
  path.times[0] = 0.0;
  path.states[0] = x;
  path.observations[0] = 0.0;  // y_0 = 0

  const auto& m = cfg.model;
  for (int k = 0; k < steps; ++k) {
    const double t = k * cfg.dt;
    const double xi = state_rng.normal();
    const double eta = obs_rng.normal();
    const double x_next =
        x + m.f(x, t) * cfg.dt + m.g(x, t) * std::sqrt(m.Q(t) * cfg.dt) * xi;
    const double y_next = y + m.h(x, t) * cfg.dt + std::sqrt(m.S(t) * cfg.dt) * eta;
    if (!std::isfinite(x_next) || !std::isfinite(y_next)) {
      std::ostringstream msg;
      msg << "simulate_path: blow-up at step " << k + 1 << " (t = " << t + cfg.dt << ")";
      throw std::runtime_error(msg.str());
    }
    x = x_next;
    y = y_next;
    path.times[static_cast<std::size_t>(k) + 1] = (k + 1) * cfg.dt;
    path.states[static_cast<std::size_t>(k) + 1] = x;
    path.observations[static_cast<std::size_t>(k) + 1] = y;
  }
  return path;
}

Path downsample(const Path& path, int stride) {
  if (stride < 1) throw std::invalid_argument("downsample: stride must be >= 1");
  Path out;
  for (std::size_t i = 0; i < path.times.size(); i += static_cast<std::size_t>(stride)) {
    out.times.push_back(path.times[i]);
    out.states.push_back(path.states[i]);
    out.observations.push_back(path.observations[i]);
  }
  return out;
}

double effective_sample_size(const ParticleCloud& cloud) {
  double sum_sq = 0.0;
  for (double w : cloud.weights) sum_sq += w * w;
  if (sum_sq <= 0.0) return 0.0;
  return 1.0 / sum_sq;
}

void systematic_resample(ParticleCloud& cloud, double offset01) {
  const std::size_t n = cloud.positions.size();
  std::vector<double> cumulative(n);
  std::partial_sum(cloud.weights.begin(), cloud.weights.end(), cumulative.begin());
  cumulative.back() = 1.0;  // guard against roundoff in the last bin

  std::vector<double> resampled(n);
  std::size_t bin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pointer = (offset01 + static_cast<double>(i)) / static_cast<double>(n);
    while (cumulative[bin] < pointer) ++bin;
    resampled[i] = cloud.positions[bin];
  }
  cloud.positions = std::move(resampled);
  std::fill(cloud.weights.begin(), cloud.weights.end(), 1.0 / static_cast<double>(n));
}

PfStepInfo pf_step(ParticleCloud& cloud, double y_new, double y_prev,
                   const ObservationModel& model, double t, double dt_obs,
                   RngStream& propagation_rng, RngStream& resample_rng) {
  const std::size_t n = cloud.positions.size();
  if (n == 0) throw std::invalid_argument("pf_step: empty cloud");
  const double dy = y_new - y_prev;
  const double s = model.S(t);

  // Propagate, then accumulate the Girsanov log-weight increment at the new
  // position: h*dy/S - h^2*dt/(2S).
  std::vector<double> logw(n);
  double max_logw = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double& x = cloud.positions[i];
    x += model.f(x, t) * dt_obs +
         model.g(x, t) * std::sqrt(model.Q(t) * dt_obs) * propagation_rng.normal();
    const double hv = model.h(x, t + dt_obs);
    logw[i] = std::log(std::max(cloud.weights[i], 1e-300)) + hv * dy / s -
              0.5 * hv * hv * dt_obs / s;
    max_logw = std::max(max_logw, logw[i]);
  }
  if (!std::isfinite(max_logw)) throw std::runtime_error("pf_step: weight degeneracy");

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cloud.weights[i] = std::exp(logw[i] - max_logw);
    total += cloud.weights[i];
  }
  if (!(total > 0.0)) throw std::runtime_error("pf_step: all weights vanished");
  for (double& w : cloud.weights) w /= total;

  PfStepInfo info;
  info.ess = effective_sample_size(cloud);
  if (info.ess < 0.5 * static_cast<double>(n)) {
    systematic_resample(cloud, resample_rng.uniform());
    info.resampled = true;
  }
  return info;
}

PfResult run_pf(const ObservationModel& model, const Path& path, int n_particles,
                double dt_obs, std::uint64_t seed, const InitialState& x0) {
  if (n_particles < 1) throw std::invalid_argument("run_pf: need at least one particle");
  if (path.times.size() < 2) throw std::invalid_argument("run_pf: path too short");
  const double spacing = path.times[1] - path.times[0];
  if (std::abs(spacing - dt_obs) > 1e-9 * std::max(1.0, dt_obs))
    throw std::invalid_argument("run_pf: path observation spacing must equal dt_obs");

  RngStream init_rng(derive_stream(seed, kStreamPfInit));
  RngStream prop_rng(derive_stream(seed, kStreamPfPropagation));
  RngStream resample_rng(derive_stream(seed, kStreamPfResample));

  ParticleCloud cloud;
  cloud.positions.resize(static_cast<std::size_t>(n_particles));
  cloud.weights.assign(static_cast<std::size_t>(n_particles), 1.0 / n_particles);
  for (auto& x : cloud.positions) x = x0.sample(init_rng);

  PfResult result;
  for (std::size_t k = 1; k < path.times.size(); ++k) {
    const double t = path.times[k - 1];
    PfStepInfo info;
    try {
      info = pf_step(cloud, path.observations[k], path.observations[k - 1], model, t, dt_obs,
                     prop_rng, resample_rng);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "run_pf: step " << k << ": " << e.what();
      throw std::runtime_error(msg.str());
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < cloud.positions.size(); ++i)
      mean += cloud.weights[i] * cloud.positions[i];
    result.t.push_back(path.times[k]);
    result.mean.push_back(mean);
    result.ess.push_back(info.ess);
    result.resampled.push_back(info.resampled ? 1 : 0);
  }
  return result;
}

double rmse(const std::vector<double>& estimate, const std::vector<double>& truth) {
  if (estimate.empty() || estimate.size() != truth.size())
    throw std::invalid_argument("rmse: series must be non-empty and equally sized");
  double acc = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double d = estimate[i] - truth[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(estimate.size()));
}

}  // namespace hfke
