#include "hfke/filter.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>

namespace hfke {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
const double kSqrtPi = std::sqrt(kPi);
constexpr double kExpOverflowGuard = 700.0;  // exp() overflows just above this

Eigen::VectorXd integral_weights(const BasisSpec& spec, const QuadratureRule& rule,
                                 const Eigen::MatrixXd& node_basis) {
  // int H_n dx = (1/alpha) sum_j mw_j H_n(x_j); exact for n <= 2M-1.
  const Eigen::Map<const Eigen::VectorXd> mw(rule.modified_weights.data(), rule.size());
  return node_basis * mw / spec.alpha;
}

}  // namespace

GeneralFke ObservationModel::fke() const {
  GeneralFke out = nlf_coefficients(f, g, h, Q, S, f_x, g_x, g_xx);
  out.time_dependent = time_dependent;
  return out;
}

const Eigen::MatrixXd& Window::propagator(int interval) const {
  if (propagators.empty()) throw std::logic_error("Window: no propagator");
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(std::max(interval, 0)),
                                         propagators.size() - 1);
  return propagators[idx];
}

int WindowBank::n_modes() const { return windows.front().spec.n_modes; }
int WindowBank::window_count() const { return static_cast<int>(windows.size()); }

std::size_t WindowBank::storage_entries() const {
  std::size_t total = 0;
  for (const auto& w : windows) {
    const auto n1 = static_cast<std::size_t>(w.spec.size());
    total += w.propagators.size() * n1 * n1;
  }
  return total;
}

int WindowBank::nearest_window(double x) const {
  int best = 0;
  double best_dist = std::abs(x - windows[0].spec.beta);
  for (int j = 1; j < window_count(); ++j) {
    const double d = std::abs(x - windows[static_cast<std::size_t>(j)].spec.beta);
    if (d < best_dist) {
      best_dist = d;
      best = j;
    }
  }
  return best;
}

Eigen::MatrixXd precompute_propagator(const BasisSpec& spec, const CanonicalFke& fke,
                                      double dt_obs, const StepperConfig& substeps) {
  if (fke.time_dependent_potential)
    throw std::invalid_argument("precompute_propagator: operator must be time-invariant");
  if (dt_obs == 0.0) return Eigen::MatrixXd::Identity(spec.size(), spec.size());
  const QuadratureRule rule = projection_rule(spec);
  const Eigen::MatrixXd a = assemble_generator(spec, fke, rule, 0.0);
  return propagator_from_generator(a, dt_obs, substeps);
}

Eigen::MatrixXd precompute_propagator(const BasisSpec& spec, const GeneralFke& fke,
                                      double dt_obs, const StepperConfig& substeps) {
  if (fke.time_dependent)
    throw std::invalid_argument("precompute_propagator: operator must be time-invariant");
  if (dt_obs == 0.0) return Eigen::MatrixXd::Identity(spec.size(), spec.size());
  const QuadratureRule rule = projection_rule(spec);
  const Eigen::MatrixXd a = assemble_generator(spec, fke, rule, 0.0);
  return propagator_from_generator(a, dt_obs, substeps);
}

WindowBank build_window_bank(const ObservationModel& model, const AsymptoticProfile& profile,
                             double domain_half_width, const BankBuildOptions& options) {
  profile.validate();
  if (!(domain_half_width > 0.0))
    throw std::invalid_argument("build_window_bank: domain half-width must be positive");
  if (!(options.tolerance > 0.0))
    throw std::invalid_argument("build_window_bank: tolerance must be positive");
  options.substeps.validate();

  const ScalingChoice scaling = choose_scaling(profile);
  const double alpha = options.alpha_override.value_or(scaling.alpha);
  const int n_modes = options.n_modes_override.value_or(scaling.n_modes);

  WindowBank bank;
  bank.overlap = options.overlap;
  bank.dt_obs = options.dt_obs;
  bank.substeps = options.substeps;
  bank.domain_half_width = domain_half_width;
  bank.tolerance = options.tolerance;

  const BasisSpec origin_spec{alpha, 0.0, n_modes};
  const QuadratureRule ref = reference_rule(origin_spec);

  std::vector<double> centers;
  if (domain_half_width <= scaling.half_width) {
    // The whole state domain already sits inside the guideline coverage
    // interval (-L, L); a single untranslated window suffices.
    bank.half_width = scaling.half_width;
    centers = {0.0};
  } else {
    // Window width from the translation-error scan: the largest integer peak
    // offset whose truncation error stays below the tolerance.
    auto offset_error = [&](double p0) {
      auto shifted = [&](double x) { return profile.density(x, p0); };
      return truncation_error(shifted, origin_spec, ref);
    };
    if (offset_error(0.0) > options.tolerance)
      throw std::runtime_error(
          "build_window_bank: tolerance unreachable at offset 0 (n_modes too small)");
    int width = 0;
    while (offset_error(static_cast<double>(width + 1)) < options.tolerance) ++width;
    if (width == 0)
      throw std::runtime_error("build_window_bank: window width collapsed to zero");
    bank.half_width = static_cast<double>(width);

    const double spacing = 2.0 * bank.half_width - options.overlap;
    if (!(spacing > 0.0))
      throw std::invalid_argument("build_window_bank: overlap exceeds the window width");
    int jmax = 0;
    while (jmax * spacing + bank.half_width < domain_half_width) ++jmax;
    for (int j = -jmax; j <= jmax; ++j) centers.push_back(j * spacing);
  }
  bank.shift_threshold = options.shift_threshold.value_or(bank.half_width);

  bank.rule = projection_rule(origin_spec);
  bank.node_basis = basis_node_matrix(origin_spec, bank.rule);
  bank.mass_weights = integral_weights(origin_spec, bank.rule, bank.node_basis);

  const GeneralFke fke = model.fke();
  const int n_intervals = model.time_dependent ? std::max(options.n_intervals, 1) : 1;

  auto build_window = [&](double beta) {
    Window w;
    w.spec = BasisSpec{alpha, beta, n_modes};
    w.propagators.reserve(static_cast<std::size_t>(n_intervals));
    if (n_intervals == 1) {
      GeneralFke frozen = fke;
      frozen.time_dependent = false;
      w.propagators.push_back(
          precompute_propagator(w.spec, frozen, options.dt_obs, options.substeps));
    } else {
      // Time-varying operator: one matrix per observation interval, each with
      // the coefficients frozen at the interval midpoint.
      for (int i = 0; i < n_intervals; ++i) {
        const double t_mid = (i + 0.5) * options.dt_obs;
        GeneralFke frozen;
        frozen.p = [&fke, t_mid](double x, double) { return fke.p(x, t_mid); };
        frozen.q = [&fke, t_mid](double x, double) { return fke.q(x, t_mid); };
        frozen.r = [&fke, t_mid](double x, double) { return fke.r(x, t_mid); };
        w.propagators.push_back(
            precompute_propagator(w.spec, frozen, options.dt_obs, options.substeps));
      }
    }
    return w;
  };

  bank.windows.resize(centers.size());
  if (options.parallel && centers.size() > 1) {
    std::vector<std::future<Window>> jobs;
    jobs.reserve(centers.size());
    for (double c : centers)
      jobs.push_back(std::async(std::launch::async, build_window, c));
    for (std::size_t i = 0; i < jobs.size(); ++i) bank.windows[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < centers.size(); ++i) bank.windows[i] = build_window(centers[i]);
  }

  // Coverage invariant: the union of (beta_j - L_w, beta_j + L_w) must
  // contain the declared domain.
  const double outer = bank.windows.back().spec.beta + bank.half_width;
  if (outer < domain_half_width || -outer > -domain_half_width)
    throw std::logic_error("build_window_bank: window layout does not cover the domain");
  return bank;
}

FilterState init_filter(const WindowBank& bank, const ObservationModel& model) {
  if (!model.sigma0) throw std::invalid_argument("init_filter: model.sigma0 is required");

  // Mean of sigma0 by composite Simpson over the covered domain.
  const double lo = bank.windows.front().spec.beta - 2.0 * bank.half_width;
  const double hi = bank.windows.back().spec.beta + 2.0 * bank.half_width;
  const int cells = 2000;
  const double h = (hi - lo) / cells;
  double mass = 0.0, first = 0.0;
  for (int i = 0; i <= cells; ++i) {
    const double x = lo + i * h;
    const double w = (i == 0 || i == cells) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double v = model.sigma0(x);
    mass += w * v;
    first += w * v * x;
  }
  if (!(mass > 0.0)) throw std::runtime_error("init_filter: sigma0 has non-positive mass");
  const double mean0 = first / mass;

  FilterState state;
  state.window_index = bank.nearest_window(mean0);
  const Window& win = bank.windows[static_cast<std::size_t>(state.window_index)];
  state.coeffs = project(model.sigma0, win.spec, bank.rule);

  // Reject initial densities the window cannot represent.
  const QuadratureRule ref = reference_rule(win.spec);
  const double loss = truncation_error(model.sigma0, win.spec, ref);
  const double scale = l2_norm(state.coeffs);
  if (!(scale > 0.0) || loss / scale > std::max(bank.tolerance, 1e-12)) {
    std::ostringstream msg;
    msg << "init_filter: sigma0 projection loses " << loss / std::max(scale, 1e-300)
        << " relative mass (tolerance " << bank.tolerance << ")";
    throw std::runtime_error(msg.str());
  }
  state.last_y = 0.0;  // y_0 = 0 by the observation convention
  state.time = 0.0;
  state.shift_count = 0;
  return state;
}

FilterState predict(const FilterState& state, const WindowBank& bank, int interval) {
  const Window& win = bank.windows[static_cast<std::size_t>(state.window_index)];
  FilterState next = state;
  next.coeffs.values = win.propagator(interval) * state.coeffs.values;
  next.time = state.time + bank.dt_obs;
  if (!next.coeffs.values.allFinite())
    throw std::runtime_error("predict: non-finite coefficients (corrupted bank?)");
  return next;
}

FilterState correct(const FilterState& state, double y_new, const WindowBank& bank,
                    const ObservationModel& model) {
  const Window& win = bank.windows[static_cast<std::size_t>(state.window_index)];
  const double dy = y_new - state.last_y;
  const double t = state.time;
  const double s_inv = 1.0 / model.S(t);

  const int m = bank.rule.size();
  Eigen::VectorXd vals = bank.node_basis.transpose() * state.coeffs.values;
  for (int j = 0; j < m; ++j) {
    const double x = win.spec.beta + bank.rule.nodes[static_cast<std::size_t>(j)] / win.spec.alpha;
    const double exponent = model.h(x, t) * s_inv * dy;
    if (std::abs(exponent) > kExpOverflowGuard) {
      std::ostringstream msg;
      msg << "correct: observation outlier, |h*dy/S| = " << std::abs(exponent) << " at x = " << x;
      throw std::runtime_error(msg.str());
    }
    vals[j] *= std::exp(exponent);
  }

  FilterState next = state;
  next.coeffs = project_values(vals, win.spec, bank.rule);
  const double mass = bank.mass_weights.dot(next.coeffs.values);
  if (!(mass > 0.0)) throw std::runtime_error("correct: non-positive quadrature mass");
  next.coeffs.values /= mass;  // estimates are scale-invariant; keep mass = 1
  next.log_normalizers.push_back(std::log(mass));
  next.last_y = y_new;
  return next;
}

Estimate estimate_state(const FilterState& state, const WindowBank& bank) {
  const Window& win = bank.windows[static_cast<std::size_t>(state.window_index)];
  const Eigen::VectorXd vals = bank.node_basis.transpose() * state.coeffs.values;
  const int m = bank.rule.size();
  double mass = 0.0, first = 0.0;
  for (int j = 0; j < m; ++j) {
    const double x = win.spec.beta + bank.rule.nodes[static_cast<std::size_t>(j)] / win.spec.alpha;
    const double w = bank.rule.modified_weights[static_cast<std::size_t>(j)] / win.spec.alpha;
    mass += w * vals[j];
    first += w * vals[j] * x;
  }
  if (!(mass > 0.0)) throw std::runtime_error("estimate_state: filter divergence (mass <= 0)");
  return {first / mass, mass};
}

ShiftDecision maybe_shift_window(const FilterState& state, const WindowBank& bank) {
  ShiftDecision decision;
  decision.state = state;
  decision.from_window = state.window_index;
  decision.to_window = state.window_index;

  const Estimate est = estimate_state(state, bank);
  decision.mean_before = est.mean;
  decision.mean_after = est.mean;
  const double beta_cur = bank.beta(state.window_index);
  if (std::abs(est.mean - beta_cur) <= bank.shift_threshold) return decision;

  const double covered = bank.windows.back().spec.beta + bank.half_width;
  if (std::abs(est.mean) > covered)
    throw std::runtime_error("maybe_shift_window: estimate left the covered domain");

  const int target = bank.nearest_window(est.mean);
  if (target == state.window_index) return decision;

  const Window& win = bank.windows[static_cast<std::size_t>(target)];
  const double norm_before = l2_norm(state.coeffs);
  FilterState shifted = state;
  shifted.coeffs = rebase(state.coeffs, win.spec, bank.rule);
  shifted.window_index = target;
  shifted.shift_count = state.shift_count + 1;

  decision.state = std::move(shifted);
  decision.shifted = true;
  decision.to_window = target;
  decision.l2_loss = std::abs(norm_before - l2_norm(decision.state.coeffs));
  decision.mean_after = estimate_state(decision.state, bank).mean;
  return decision;
}

OnlineResult run_online(const WindowBank& bank, const ObservationModel& model,
                        const std::vector<double>& observations, const OnlineOptions& options) {
  OnlineResult result;
  FilterState state = init_filter(bank, model);
  const auto n1 = static_cast<std::uint64_t>(bank.n_modes() + 1);
  const std::uint64_t per_step = n1 * n1;

  double next_snapshot = 0.0;
  auto take_snapshot = [&](const FilterState& s) {
    DensitySnapshot snap;
    snap.t = s.time;
    const int pts = std::max(options.snapshot_points, 2);
    const double lo = -bank.domain_half_width - 0.5;
    const double hi = bank.domain_half_width + 0.5;
    snap.x.resize(static_cast<std::size_t>(pts));
    snap.u.resize(static_cast<std::size_t>(pts));
    double peak = 0.0;
    for (int i = 0; i < pts; ++i) {
      const double x = lo + (hi - lo) * i / (pts - 1);
      snap.x[static_cast<std::size_t>(i)] = x;
      const double v = evaluate(s.coeffs, x);
      snap.u[static_cast<std::size_t>(i)] = v;
      peak = std::max(peak, std::abs(v));
    }
    if (peak > 0.0)
      for (auto& v : snap.u) v /= peak;
    result.snapshots.push_back(std::move(snap));
  };
  if (options.recover_density) {
    take_snapshot(state);
    next_snapshot = options.snapshot_interval;
  }

  for (std::size_t i = 0; i < observations.size(); ++i) {
    const int step_index = static_cast<int>(i);
    try {
      state = predict(state, bank, step_index);
      result.matvec_flops += per_step;
      state = correct(state, observations[i], bank, model);

      const Estimate est = estimate_state(state, bank);
      result.t.push_back(state.time);
      result.mean.push_back(est.mean);
      result.mass.push_back(est.mass);
      result.window_index.push_back(state.window_index);

      ShiftDecision decision = maybe_shift_window(state, bank);
      if (decision.shifted) {
        result.matvec_flops += per_step;  // rebase costs one matrix-vector product
        result.shifts.push_back({step_index, decision.from_window, decision.to_window,
                                 decision.mean_before, decision.mean_after, decision.l2_loss});
        state = std::move(decision.state);
      }
      result.shift_count.push_back(state.shift_count);

      if (options.recover_density && state.time >= next_snapshot - 1e-12) {
        take_snapshot(state);
        next_snapshot += options.snapshot_interval;
      }
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "run_online: step " << i + 1 << ": " << e.what();
      throw std::runtime_error(msg.str());
    }
  }
  return result;
}

}  // namespace hfke
