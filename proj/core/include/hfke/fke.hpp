#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hfke/basis.hpp"

namespace hfke {

using SpaceTimeFn = std::function<double(double, double)>;  // (x, t)
using TimeFn = std::function<double(double)>;               // (t)

/// Canonical 1D forward Kolmogorov equation
///   u_t = nu * u_xx + V(x,t) * u + F(x,t).
struct CanonicalFke {
  double nu = 1.0;       // diffusion coefficient, > 0
  SpaceTimeFn potential;  // V(x,t); required
  SpaceTimeFn source;     // F(x,t); empty means identically zero
  bool time_dependent_potential = false;
  bool time_dependent_source = false;
  std::optional<double> potential_growth_gamma;  // diagnostic only

  void validate() const;
};

/// General 1D forward Kolmogorov equation
///   u_t = p(x,t) u_xx + q(x,t) u_x + r(x,t) u.
/// Spatial derivatives of p and q may be supplied analytically; when the
/// callbacks are empty they are formed by central finite differences.
struct GeneralFke {
  SpaceTimeFn p, q, r;
  SpaceTimeFn p_x, p_xx, q_x;  // optional
  bool time_dependent = false;

  double eval_p_x(double x, double t) const;
  double eval_p_xx(double x, double t) const;
  double eval_q_x(double x, double t) const;
};

enum class TimeScheme { explicit_central, crank_nicolson };

struct StepperConfig {
  TimeScheme scheme = TimeScheme::crank_nicolson;
  double dt = 1e-4;  // seconds, > 0

  void validate() const;
};

/// Derivative Gram matrix <H_n', H_m'>: diagonal sqrt(pi)*alpha*(n + 1/2),
/// entries -(alpha/2)*sqrt(pi*(l+1)*(l+2)) at |n-m| = 2 with l = min(n,m).
Eigen::MatrixXd assemble_stiffness(const BasisSpec& spec);

/// Potential Gram matrix <V(.,t) H_n, H_m> by quadrature; symmetric.
Eigen::MatrixXd assemble_potential(const BasisSpec& spec, const SpaceTimeFn& V,
                                   const QuadratureRule& rule, double t);

/// Galerkin generator A with the (diagonal) mass matrix inverted:
/// A = (alpha/sqrt(pi)) * (-nu * stiffness + potential_gram).
Eigen::MatrixXd assemble_generator(const BasisSpec& spec, const CanonicalFke& fke,
                                   const QuadratureRule& rule, double t);

/// Generator for the general form, assembled from pointwise application of
/// p u_xx + q u_x + r u at the quadrature nodes (no integration by parts).
Eigen::MatrixXd assemble_generator(const BasisSpec& spec, const GeneralFke& fke,
                                   const QuadratureRule& rule, double t);

/// One time step of the Galerkin ODE  a' = A a + f_hat.
/// explicit_central: a_next = a_prev + 2*dt*(A*a + f_hat); requires a_prev.
/// crank_nicolson:   (I - dt/2*A) a_next = (I + dt/2*A) a + dt*f_hat,
/// where f_hat is expected at mid-step for second order.
Eigen::VectorXd step(const Eigen::VectorXd& a, const std::optional<Eigen::VectorXd>& a_prev,
                     const Eigen::MatrixXd& A, const Eigen::VectorXd& f_hat,
                     const StepperConfig& cfg);

/// Matrix of the solution operator over [0, dt_obs] for a frozen generator A,
/// i.e. the per-column result of advancing each unit vector with the chosen
/// scheme. dt_obs = 0 returns the identity.
Eigen::MatrixXd propagator_from_generator(const Eigen::MatrixXd& A, double dt_obs,
                                          const StepperConfig& substeps);

using SolveObserver = std::function<void(double t, const Eigen::VectorXd& a)>;

/// Advance the Galerkin ODE from t0 to t1. The potential matrix and source
/// projection are reassembled per step only for time-dependent problems.
/// The observer, when given, is called after every sample_every-th step.
CoeffVector solve(const CanonicalFke& fke, const CoeffVector& u0, double t0, double t1,
                  const StepperConfig& cfg, const SolveObserver& observer = {},
                  int sample_every = 1);

/// Tabulated change of variables produced by canonicalize():
/// y(x) = int_{x_min}^x sqrt(p), amplitude(x) = exp(1/2 * int_{x_min}^x q_tilde).
struct CoordinateMap {
  std::vector<double> x, y, amplitude;

  double to_canonical(double x) const;    // y(x), linear extrapolation outside the grid
  double from_canonical(double y) const;  // x(y)
  double amplitude_at(double x) const;
};

struct CanonicalizeResult {
  CanonicalFke fke;  // nu = 1, potential in the canonical coordinate
  CoordinateMap map;
};

/// Transform a time-invariant general FKE to unit diffusion with no
/// convection term: q_tilde = p^{-1/2} (q - 1/2 p^{-1/2} p_x),
/// V = -q_tilde^2/4 - q_tilde_x/2 + r, evaluated through the coordinate map
/// tabulated on the grid by composite trapezoidal quadrature.
/// Rejects time-varying inputs and p <= 0 anywhere on the grid.
CanonicalizeResult canonicalize(const GeneralFke& g, const std::vector<double>& grid, double t);

/// Coefficient mapping for the nonlinear-filtering FKE:
/// p = Q g^2 / 2, q = Q (g^2)_x - f, r = -h^2/(2S) + Q (g_x^2 + g g_xx) - f_x.
/// Missing derivative callbacks fall back to central finite differences.
GeneralFke nlf_coefficients(const SpaceTimeFn& f, const SpaceTimeFn& g, const SpaceTimeFn& h,
                            const TimeFn& Q, const TimeFn& S, const SpaceTimeFn& f_x = {},
                            const SpaceTimeFn& g_x = {}, const SpaceTimeFn& g_xx = {});

struct ConditionReport {
  bool pass = false;
  double value = 0.0;      // the bound / extremum found
  double witness_x = 0.0;  // where it is attained
  double witness_t = 0.0;
  std::string label;
};

/// Runtime diagnostics mirroring the existence / uniqueness hypotheses:
/// (1) inf p > 0, (2) S > 0 (checked when S is supplied), (3) sup r = C with
/// the boundary trend examined, (4) fitted growth exponent gamma of the
/// zeroth-order coefficient, -r ~ (1+x^2)^gamma in the tail.
struct WellPosednessReport {
  ConditionReport diffusion_positive;  // (1)
  ConditionReport noise_positive;      // (2)
  ConditionReport zeroth_order_bound;  // (3)
  double fitted_gamma = 0.0;           // (4)
  double growth_constant = 0.0;        // c with -r <= c (1+x^2)^gamma on the grid
  bool gamma_fit_valid = false;

  bool all_pass() const;
};

WellPosednessReport well_posedness_check(const GeneralFke& g, const std::vector<double>& grid,
                                         const std::vector<double>& t_grid,
                                         const TimeFn& S = {});

}  // namespace hfke
