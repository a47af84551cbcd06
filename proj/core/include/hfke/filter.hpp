#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "hfke/basis.hpp"
#include "hfke/fke.hpp"

namespace hfke {

/// Signal/observation model
///   dx = f(x,t) dt + g(x,t) dv,   E[dv^2] = Q(t) dt,
///   dy = h(x,t) dt + dw,          E[dw^2] = S(t) dt,  y_0 = 0,
/// with initial density sigma0.
struct ObservationModel {
  SpaceTimeFn f, g, h;
  TimeFn Q, S;
  std::function<double(double)> sigma0;
  bool time_dependent = false;
  SpaceTimeFn f_x, g_x, g_xx;  // optional analytic derivatives

  GeneralFke fke() const;  // via nlf_coefficients
};

/// One translated basis with its precomputed one-step propagator(s).
/// propagators.size() == 1 for time-invariant operators; otherwise one
/// matrix per observation interval.
struct Window {
  BasisSpec spec;
  std::vector<Eigen::MatrixXd> propagators;

  const Eigen::MatrixXd& propagator(int interval) const;
};

struct WindowBank {
  std::vector<Window> windows;     // ordered by center beta
  double half_width = 0.0;         // L_w
  double overlap = 0.0;
  double shift_threshold = 0.0;
  double dt_obs = 0.0;             // observation interval
  StepperConfig substeps;
  double domain_half_width = 0.0;  // declared state domain [-L, L]
  double tolerance = 0.0;

  QuadratureRule rule;             // shared scaled-variable rule, M = 2*(N+1)
  Eigen::MatrixXd node_basis;      // (N+1) x M, basis values at the nodes
  Eigen::VectorXd mass_weights;    // integral of each basis function

  int n_modes() const;
  int window_count() const;        // J+1
  std::size_t storage_entries() const;  // (J+1) * (N+1)^2 * intervals
  int nearest_window(double x) const;
  double beta(int j) const { return windows[static_cast<std::size_t>(j)].spec.beta; }
};

struct BankBuildOptions {
  double tolerance = 1e-5;
  double overlap = 0.5;
  double dt_obs = 0.01;
  StepperConfig substeps;
  std::optional<double> shift_threshold;  // default: L_w
  std::optional<double> alpha_override;
  std::optional<int> n_modes_override;
  int n_intervals = 1;   // > 1 builds a per-interval propagator table (time-varying case)
  bool parallel = false; // compute windows concurrently (deterministic result)
};

/// Offline preparation: pick (alpha, N) from the scaling guideline applied to
/// `profile`, size the window from the translation-error scan, place centers
/// at spacing 2*L_w - overlap until [-L, L] is covered, and precompute one
/// propagator per window. When the domain already fits inside the guideline
/// coverage interval a single window at beta = 0 is used.
WindowBank build_window_bank(const ObservationModel& model, const AsymptoticProfile& profile,
                             double domain_half_width, const BankBuildOptions& options);

/// Matrix of the FKE solution operator over [0, dt_obs] on the truncated
/// space: column l holds the coefficients at t = dt_obs of the solve with
/// initial data e_l. dt_obs = 0 returns the identity.
Eigen::MatrixXd precompute_propagator(const BasisSpec& spec, const CanonicalFke& fke,
                                      double dt_obs, const StepperConfig& substeps);
Eigen::MatrixXd precompute_propagator(const BasisSpec& spec, const GeneralFke& fke,
                                      double dt_obs, const StepperConfig& substeps);

struct FilterState {
  int window_index = 0;
  CoeffVector coeffs;
  double last_y = 0.0;
  double time = 0.0;
  int shift_count = 0;                  // P
  std::vector<double> log_normalizers;  // one entry per correct step
};

struct Estimate {
  double mean = 0.0;
  double mass = 0.0;
};

FilterState init_filter(const WindowBank& bank, const ObservationModel& model);

/// coeffs <- Phi * coeffs; time += dt_obs. One dense (N+1)^2 matrix-vector
/// product, which is the whole per-step online propagation cost.
FilterState predict(const FilterState& state, const WindowBank& bank, int interval = 0);

/// Multiply pointwise by exp(h(x,t)/S(t) * (y_new - last_y)) at the window's
/// nodes, re-project, then rescale to unit quadrature mass (the log of the
/// normalizer is appended to the state history).
FilterState correct(const FilterState& state, double y_new, const WindowBank& bank,
                    const ObservationModel& model);

/// mean = int x u / int u via the window quadrature.
Estimate estimate_state(const FilterState& state, const WindowBank& bank);

struct ShiftDecision {
  FilterState state;
  bool shifted = false;
  int from_window = 0, to_window = 0;
  double mean_before = 0.0, mean_after = 0.0;
  double l2_loss = 0.0;  // |l2 before - l2 after| of the rebase
};

/// Shift to the window nearest the current mean when
/// |mean - beta_current| > shift_threshold, rebasing the coefficients.
ShiftDecision maybe_shift_window(const FilterState& state, const WindowBank& bank);

struct ShiftEvent {
  int step = 0;
  int from_window = 0, to_window = 0;
  double mean_before = 0.0, mean_after = 0.0;
  double l2_loss = 0.0;
};

struct DensitySnapshot {
  double t = 0.0;
  std::vector<double> x, u;  // u normalized by its maximum
};

struct OnlineOptions {
  bool recover_density = false;
  double snapshot_interval = 1.0;
  int snapshot_points = 201;
};

struct OnlineResult {
  std::vector<double> t, mean, mass;
  std::vector<int> window_index, shift_count;
  std::vector<ShiftEvent> shifts;
  std::uint64_t matvec_flops = 0;  // (k + P) * (N+1)^2
  std::vector<DensitySnapshot> snapshots;
};

/// Full online loop over equally spaced observations y_{tau_1..tau_k}
/// (y_0 = 0): init, then per observation predict / correct / estimate /
/// maybe-shift.
OnlineResult run_online(const WindowBank& bank, const ObservationModel& model,
                        const std::vector<double>& observations,
                        const OnlineOptions& options = {});

}  // namespace hfke
