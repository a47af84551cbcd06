#include "hfke/fke.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hfke {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
const double kSqrtPi = std::sqrt(kPi);

double central_diff(const SpaceTimeFn& f, double x, double t) {
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return (f(x + h, t) - f(x - h, t)) / (2.0 * h);
}

int matrix_bandwidth(const Eigen::MatrixXd& a) {
  const double cutoff = 1e-14 * a.cwiseAbs().maxCoeff();
  int bw = 0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (std::abs(a(i, j)) > cutoff) bw = std::max(bw, std::abs(i - j));
  return bw;
}

// LU factorization without pivoting restricted to a band; the Crank-Nicolson
// left-hand side I - dt/2*A is strongly diagonally dominant for the step
// sizes in use, so pivoting is not needed.
class BandedLU {
 public:
  BandedLU(const Eigen::MatrixXd& a, int bw) : lu_(a), bw_(bw) {
    const int n = static_cast<int>(a.rows());
    for (int k = 0; k < n; ++k) {
      const double pivot = lu_(k, k);
      if (std::abs(pivot) < 1e-300) throw std::runtime_error("banded LU: zero pivot");
      const int iend = std::min(n - 1, k + bw_);
      const int jend = std::min(n - 1, k + bw_);
      for (int i = k + 1; i <= iend; ++i) {
        const double l = lu_(i, k) / pivot;
        lu_(i, k) = l;
        for (int j = k + 1; j <= jend; ++j) lu_(i, j) -= l * lu_(k, j);
      }
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const int n = static_cast<int>(lu_.rows());
    Eigen::VectorXd x = b;
    for (int i = 0; i < n; ++i) {
      const int j0 = std::max(0, i - bw_);
      for (int j = j0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    }
    for (int i = n - 1; i >= 0; --i) {
      const int j1 = std::min(n - 1, i + bw_);
      for (int j = i + 1; j <= j1; ++j) x[i] -= lu_(i, j) * x[j];
      x[i] /= lu_(i, i);
    }
    return x;
  }

 private:
  Eigen::MatrixXd lu_;
  int bw_;
};

// One Crank-Nicolson step with the factorization of (I - dt/2*A) cached;
// banded elimination is used when the generator is banded with bandwidth <= 8.
class CrankNicolsonStepper {
 public:
  CrankNicolsonStepper(const Eigen::MatrixXd& a, double dt) {
    const int n = static_cast<int>(a.rows());
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
    rhs_ = identity + 0.5 * dt * a;
    const Eigen::MatrixXd lhs = identity - 0.5 * dt * a;
    const int bw = matrix_bandwidth(lhs);
    if (bw <= 8) {
      banded_.emplace(lhs, bw);
    } else {
      dense_.emplace(lhs);
      if (dense_->determinant() == 0.0)
        throw std::runtime_error("crank_nicolson: singular system");
    }
    dt_ = dt;
  }

  Eigen::VectorXd advance(const Eigen::VectorXd& a, const Eigen::VectorXd& f_mid) const {
    Eigen::VectorXd b = rhs_ * a + dt_ * f_mid;
    return banded_ ? banded_->solve(b) : dense_->solve(b);
  }

  Eigen::MatrixXd one_step_matrix() const {
    const int n = static_cast<int>(rhs_.rows());
    Eigen::MatrixXd r(n, n);
    for (int l = 0; l < n; ++l) {
      const Eigen::VectorXd col = rhs_.col(l);
      r.col(l) = banded_ ? banded_->solve(col) : dense_->solve(col);
    }
    return r;
  }

 private:
  Eigen::MatrixXd rhs_;
  std::optional<BandedLU> banded_;
  std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> dense_;
  double dt_ = 0.0;
};

Eigen::VectorXd project_source(const SpaceTimeFn& source, const BasisSpec& spec,
                               const QuadratureRule& rule, const Eigen::MatrixXd& psi,
                               double t) {
  Eigen::VectorXd vals(rule.size());
  for (int j = 0; j < rule.size(); ++j)
    vals[j] = source(spec.beta + rule.nodes[static_cast<std::size_t>(j)] / spec.alpha, t);
  const Eigen::Map<const Eigen::VectorXd> mw(rule.modified_weights.data(), rule.size());
  return psi * mw.cwiseProduct(vals) / kSqrtPi;
}

int checked_step_count(double t0, double t1, double dt) {
  const double span = t1 - t0;
  const double raw = span / dt;
  const int steps = static_cast<int>(std::lround(raw));
  if (steps < 1 || std::abs(steps * dt - span) > 1e-9 * std::max(1.0, std::abs(span)))
    throw std::invalid_argument("solve: dt must divide the time span");
  return steps;
}

}  // namespace

void CanonicalFke::validate() const {
  if (!(nu > 0.0)) throw std::invalid_argument("CanonicalFke: nu must be positive");
  if (!potential) throw std::invalid_argument("CanonicalFke: potential is required");
}

void StepperConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("StepperConfig: dt must be positive");
}

double GeneralFke::eval_p_x(double x, double t) const {
  return p_x ? p_x(x, t) : central_diff(p, x, t);
}
double GeneralFke::eval_p_xx(double x, double t) const {
  if (p_xx) return p_xx(x, t);
  const double h = 1e-4 * std::max(1.0, std::abs(x));
  return (p(x + h, t) - 2.0 * p(x, t) + p(x - h, t)) / (h * h);
}
double GeneralFke::eval_q_x(double x, double t) const {
  return q_x ? q_x(x, t) : central_diff(q, x, t);
}

Eigen::MatrixXd assemble_stiffness(const BasisSpec& spec) {
  spec.validate();
  const int n = spec.size();
  const double a = spec.alpha;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    s(i, i) = kSqrtPi * a * (i + 0.5);
    if (i + 2 < n) {
      const double v = -0.5 * a * std::sqrt(kPi * (i + 1) * (i + 2));
      s(i, i + 2) = v;
      s(i + 2, i) = v;
    }
  }
  return s;
}

Eigen::MatrixXd assemble_potential(const BasisSpec& spec, const SpaceTimeFn& V,
                                   const QuadratureRule& rule, double t) {
  spec.validate();
  if (rule.size() < spec.size())
    throw std::invalid_argument("assemble_potential: rule must have at least N+1 nodes");
  const Eigen::MatrixXd psi = basis_node_matrix(spec, rule);
  Eigen::VectorXd scaled(rule.size());
  for (int j = 0; j < rule.size(); ++j) {
    const double x = spec.beta + rule.nodes[static_cast<std::size_t>(j)] / spec.alpha;
    const double v = V(x, t);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "assemble_potential: non-finite potential at x = " << x;
      throw std::runtime_error(msg.str());
    }
    scaled[j] = rule.modified_weights[static_cast<std::size_t>(j)] * v / spec.alpha;
  }
  return psi * scaled.asDiagonal() * psi.transpose();
}

Eigen::MatrixXd assemble_generator(const BasisSpec& spec, const CanonicalFke& fke,
                                   const QuadratureRule& rule, double t) {
  fke.validate();
  const Eigen::MatrixXd s = assemble_stiffness(spec);
  const Eigen::MatrixXd p = assemble_potential(spec, fke.potential, rule, t);
  return spec.alpha / kSqrtPi * (-fke.nu * s + p);
}

Eigen::MatrixXd assemble_generator(const BasisSpec& spec, const GeneralFke& fke,
                                   const QuadratureRule& rule, double t) {
  spec.validate();
  if (rule.size() < spec.size())
    throw std::invalid_argument("assemble_generator: rule must have at least N+1 nodes");
  const int n = spec.size();
  const int m = rule.size();
  const double a = spec.alpha;

  // Basis values up to N+2 give exact pointwise first and second derivatives.
  BasisSpec ext = spec;
  ext.n_modes = spec.n_modes + 2;
  const Eigen::MatrixXd psi_ext = basis_node_matrix(ext, rule);
  const auto psi = psi_ext.topRows(n);

  Eigen::MatrixXd lop(n, m);  // row n: (p Hn'' + q Hn' + r Hn) at the nodes
  Eigen::VectorXd pv(m), qv(m), rv(m);
  for (int j = 0; j < m; ++j) {
    const double x = spec.beta + rule.nodes[static_cast<std::size_t>(j)] / a;
    pv[j] = fke.p(x, t);
    qv[j] = fke.q(x, t);
    rv[j] = fke.r(x, t);
    if (!std::isfinite(pv[j]) || !std::isfinite(qv[j]) || !std::isfinite(rv[j]))
      throw std::runtime_error("assemble_generator: non-finite coefficient");
  }
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd d1(m), d2(m);
    for (int j = 0; j < m; ++j) {
      const double lo = k >= 1 ? psi_ext(k - 1, j) : 0.0;
      const double lo2 = k >= 2 ? psi_ext(k - 2, j) : 0.0;
      d1[j] = a * (std::sqrt(0.5 * k) * lo - std::sqrt(0.5 * (k + 1)) * psi_ext(k + 1, j));
      d2[j] = a * a *
              (0.5 * std::sqrt(double(k) * (k - 1)) * lo2 - (k + 0.5) * psi_ext(k, j) +
               0.5 * std::sqrt(double(k + 1) * (k + 2)) * psi_ext(k + 2, j));
    }
    lop.row(k) = (pv.cwiseProduct(d2) + qv.cwiseProduct(d1) + rv.cwiseProduct(psi.row(k).transpose())).transpose();
  }

  const Eigen::Map<const Eigen::VectorXd> mw(rule.modified_weights.data(), m);
  // A(m,n) = (alpha/sqrt(pi)) <L Hn, Hm> with the mass factor sqrt(pi)/alpha
  // already divided out.
  return psi * mw.asDiagonal() * lop.transpose() / kSqrtPi;
}

Eigen::MatrixXd propagator_from_generator(const Eigen::MatrixXd& A, double dt_obs,
                                          const StepperConfig& substeps) {
  const int n = static_cast<int>(A.rows());
  if (dt_obs == 0.0) return Eigen::MatrixXd::Identity(n, n);
  if (dt_obs < 0.0) throw std::invalid_argument("propagator: dt_obs must be non-negative");
  substeps.validate();
  const int steps = checked_step_count(0.0, dt_obs, substeps.dt);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
  if (substeps.scheme == TimeScheme::crank_nicolson) {
    const CrankNicolsonStepper stepper(A, substeps.dt);
    const Eigen::MatrixXd r = stepper.one_step_matrix();
    for (int k = 0; k < steps; ++k) phi = r * phi;
  } else {
    const double dt = substeps.dt;
    Eigen::MatrixXd prev = phi;
    phi += dt * (A * (phi + 0.5 * dt * (A * phi)));  // two-half-step Euler bootstrap
    for (int k = 1; k < steps; ++k) {
      Eigen::MatrixXd next = prev + 2.0 * dt * (A * phi);
      prev.swap(phi);
      phi = std::move(next);
    }
  }
  for (int l = 0; l < n; ++l) {
    if (!phi.col(l).allFinite()) {
      std::ostringstream msg;
      msg << "propagator: column " << l << " blew up (reduce dt or use crank_nicolson)";
      throw std::runtime_error(msg.str());
    }
  }
  return phi;
}

Eigen::VectorXd step(const Eigen::VectorXd& a, const std::optional<Eigen::VectorXd>& a_prev,
                     const Eigen::MatrixXd& A, const Eigen::VectorXd& f_hat,
                     const StepperConfig& cfg) {
  cfg.validate();
  Eigen::VectorXd next;
  if (cfg.scheme == TimeScheme::explicit_central) {
    if (!a_prev)
      throw std::invalid_argument("step: explicit_central requires the previous state");
    next = *a_prev + 2.0 * cfg.dt * (A * a + f_hat);
  } else {
    CrankNicolsonStepper stepper(A, cfg.dt);
    next = stepper.advance(a, f_hat);
  }
  if (!next.allFinite())
    throw std::runtime_error("step: non-finite state (dt too large for the scheme?)");
  return next;
}

CoeffVector solve(const CanonicalFke& fke, const CoeffVector& u0, double t0, double t1,
                  const StepperConfig& cfg, const SolveObserver& observer, int sample_every) {
  fke.validate();
  cfg.validate();
  if (!(t1 > t0)) throw std::invalid_argument("solve: t1 must exceed t0");
  const int steps = checked_step_count(t0, t1, cfg.dt);
  const BasisSpec& spec = u0.spec;
  const QuadratureRule rule = projection_rule(spec);
  const Eigen::MatrixXd psi = basis_node_matrix(spec, rule);
  const double dt = cfg.dt;

  auto generator_at = [&](double t) { return assemble_generator(spec, fke, rule, t); };
  auto source_at = [&](double t) -> Eigen::VectorXd {
    if (!fke.source) return Eigen::VectorXd::Zero(spec.size());
    return project_source(fke.source, spec, rule, psi, t);
  };

  Eigen::MatrixXd A = generator_at(t0);
  Eigen::VectorXd a = u0.values;

  auto fail_at = [](double t) {
    std::ostringstream msg;
    msg << "solve: non-finite solution at t = " << t;
    return std::runtime_error(msg.str());
  };

  if (cfg.scheme == TimeScheme::crank_nicolson) {
    std::optional<CrankNicolsonStepper> cached;
    if (!fke.time_dependent_potential) cached.emplace(A, dt);
    Eigen::VectorXd f_mid = source_at(t0 + 0.5 * dt);
    for (int k = 0; k < steps; ++k) {
      const double t = t0 + k * dt;
      if (fke.time_dependent_potential) {
        A = generator_at(t + 0.5 * dt);
        cached.emplace(A, dt);
      }
      if (fke.time_dependent_source || k == 0) f_mid = source_at(t + 0.5 * dt);
      a = cached->advance(a, f_mid);
      if (!a.allFinite()) throw fail_at(t + dt);
      if (observer && ((k + 1) % sample_every == 0 || k + 1 == steps)) observer(t + dt, a);
    }
  } else {
    // Leapfrog with a two-half-step Euler bootstrap to stay second order.
    Eigen::VectorXd f0 = source_at(t0);
    Eigen::VectorXd half = a + 0.5 * dt * (A * a + f0);
    Eigen::VectorXd a_prev = a;
    a = a + dt * (A * half + source_at(t0 + 0.5 * dt));
    if (!a.allFinite()) throw fail_at(t0 + dt);
    if (observer && (1 % sample_every == 0 || steps == 1)) observer(t0 + dt, a);
    for (int k = 1; k < steps; ++k) {
      const double t = t0 + k * dt;
      if (fke.time_dependent_potential) A = generator_at(t);
      const Eigen::VectorXd f_now =
          fke.time_dependent_source ? source_at(t) : f0;
      Eigen::VectorXd next = a_prev + 2.0 * dt * (A * a + f_now);
      if (!next.allFinite()) throw fail_at(t + dt);
      a_prev.swap(a);
      a = std::move(next);
      if (observer && ((k + 1) % sample_every == 0 || k + 1 == steps)) observer(t + dt, a);
    }
  }
  return {spec, a};
}

double CoordinateMap::to_canonical(double xq) const {
  const auto n = x.size();
  if (xq <= x.front()) {
    const double slope = (y[1] - y[0]) / (x[1] - x[0]);
    return y.front() + slope * (xq - x.front());
  }
  if (xq >= x.back()) {
    const double slope = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
    return y.back() + slope * (xq - x.back());
  }
  const auto it = std::upper_bound(x.begin(), x.end(), xq);
  const auto i = static_cast<std::size_t>(it - x.begin());
  const double w = (xq - x[i - 1]) / (x[i] - x[i - 1]);
  return y[i - 1] + w * (y[i] - y[i - 1]);
}

double CoordinateMap::from_canonical(double yq) const {
  const auto n = y.size();
  if (yq <= y.front()) {
    const double slope = (x[1] - x[0]) / (y[1] - y[0]);
    return x.front() + slope * (yq - y.front());
  }
  if (yq >= y.back()) {
    const double slope = (x[n - 1] - x[n - 2]) / (y[n - 1] - y[n - 2]);
    return x.back() + slope * (yq - y.back());
  }
  const auto it = std::upper_bound(y.begin(), y.end(), yq);
  const auto i = static_cast<std::size_t>(it - y.begin());
  const double w = (yq - y[i - 1]) / (y[i] - y[i - 1]);
  return x[i - 1] + w * (x[i] - x[i - 1]);
}

double CoordinateMap::amplitude_at(double xq) const {
  const auto n = x.size();
  if (xq <= x.front()) return amplitude.front();
  if (xq >= x.back()) return amplitude.back();
  const auto it = std::upper_bound(x.begin(), x.end(), xq);
  const auto i = static_cast<std::size_t>(it - x.begin());
  const double w = (xq - x[i - 1]) / (x[i] - x[i - 1]);
  return amplitude[i - 1] + w * (amplitude[i] - amplitude[i - 1]);
}

CanonicalizeResult canonicalize(const GeneralFke& g, const std::vector<double>& grid, double t) {
  if (g.time_dependent)
    throw std::invalid_argument("canonicalize: only time-invariant coefficients are supported");
  if (grid.size() < 3) throw std::invalid_argument("canonicalize: grid needs at least 3 points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("canonicalize: grid must be strictly increasing");

  std::vector<double> pv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    pv[i] = g.p(grid[i], t);
    if (!(pv[i] > 0.0)) {
      std::ostringstream msg;
      msg << "canonicalize: p must be positive, got " << pv[i] << " at x = " << grid[i];
      throw std::invalid_argument(msg.str());
    }
  }

  auto q_tilde = [g, t](double x) {
    const double p = g.p(x, t);
    return (g.q(x, t) - 0.5 * g.eval_p_x(x, t) / std::sqrt(p)) / std::sqrt(p);
  };
  const bool analytic = static_cast<bool>(g.p_x) && static_cast<bool>(g.p_xx) &&
                        static_cast<bool>(g.q_x);
  auto q_tilde_x = [g, t, analytic, q_tilde](double x) {
    if (analytic) {
      const double p = g.p(x, t);
      const double px = g.p_x(x, t);
      const double sp = std::sqrt(p);
      return -0.5 * px * g.q(x, t) / (p * sp) + g.q_x(x, t) / sp +
             0.5 * px * px / (p * p) - 0.5 * g.p_xx(x, t) / p;
    }
    const double h = 1e-5 * std::max(1.0, std::abs(x));
    return (q_tilde(x + h) - q_tilde(x - h)) / (2.0 * h);
  };
  auto V_original = [g, t, q_tilde, q_tilde_x](double x) {
    const double qt = q_tilde(x);
    return -0.25 * qt * qt - 0.5 * q_tilde_x(x) + g.r(x, t);
  };

  CoordinateMap map;
  map.x = grid;
  map.y.resize(grid.size());
  map.amplitude.resize(grid.size());
  map.y[0] = 0.0;
  map.amplitude[0] = 1.0;
  double log_amp = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double dx = grid[i] - grid[i - 1];
    map.y[i] = map.y[i - 1] + 0.5 * dx * (std::sqrt(pv[i - 1]) + std::sqrt(pv[i]));
    log_amp += 0.25 * dx * (q_tilde(grid[i - 1]) + q_tilde(grid[i]));
    map.amplitude[i] = std::exp(log_amp);
  }

  CanonicalFke fke;
  fke.nu = 1.0;
  fke.potential = [map, V_original](double y, double /*t*/) {
    return V_original(map.from_canonical(y));
  };
  fke.time_dependent_potential = false;
  return {std::move(fke), std::move(map)};
}

GeneralFke nlf_coefficients(const SpaceTimeFn& f, const SpaceTimeFn& g, const SpaceTimeFn& h,
                            const TimeFn& Q, const TimeFn& S, const SpaceTimeFn& f_x,
                            const SpaceTimeFn& g_x, const SpaceTimeFn& g_xx) {
  if (!f || !g || !h || !Q || !S)
    throw std::invalid_argument("nlf_coefficients: f, g, h, Q, S are all required");

  SpaceTimeFn fx = f_x ? f_x : SpaceTimeFn([f](double x, double t) { return central_diff(f, x, t); });
  SpaceTimeFn gx = g_x ? g_x : SpaceTimeFn([g](double x, double t) { return central_diff(g, x, t); });
  SpaceTimeFn gxx = g_xx ? g_xx : SpaceTimeFn([gx](double x, double t) { return central_diff(gx, x, t); });

  GeneralFke out;
  out.p = [Q, g](double x, double t) {
    const double gv = g(x, t);
    return 0.5 * Q(t) * gv * gv;
  };
  out.q = [Q, g, gx, f](double x, double t) {
    return Q(t) * 2.0 * g(x, t) * gx(x, t) - f(x, t);
  };
  out.r = [Q, S, g, gx, gxx, h, fx](double x, double t) {
    const double hv = h(x, t);
    const double gxv = gx(x, t);
    return -0.5 * hv * hv / S(t) + Q(t) * (gxv * gxv + g(x, t) * gxx(x, t)) - fx(x, t);
  };
  out.p_x = [Q, g, gx](double x, double t) { return Q(t) * g(x, t) * gx(x, t); };
  out.p_xx = [Q, g, gx, gxx](double x, double t) {
    const double gxv = gx(x, t);
    return Q(t) * (gxv * gxv + g(x, t) * gxx(x, t));
  };
  out.q_x = [Q, g, gx, gxx, fx](double x, double t) {
    const double gxv = gx(x, t);
    return Q(t) * 2.0 * (gxv * gxv + g(x, t) * gxx(x, t)) - fx(x, t);
  };
  return out;
}

bool WellPosednessReport::all_pass() const {
  return diffusion_positive.pass && noise_positive.pass && zeroth_order_bound.pass;
}

WellPosednessReport well_posedness_check(const GeneralFke& g, const std::vector<double>& grid,
                                         const std::vector<double>& t_grid, const TimeFn& S) {
  if (grid.size() < 5) throw std::invalid_argument("well_posedness_check: grid too small");
  if (t_grid.empty()) throw std::invalid_argument("well_posedness_check: empty time grid");

  WellPosednessReport rep;

  // (1) inf p > 0.
  rep.diffusion_positive.label = "diffusion lower bound p >= lambda > 0";
  rep.diffusion_positive.value = std::numeric_limits<double>::infinity();
  for (double t : t_grid)
    for (double x : grid) {
      const double v = g.p(x, t);
      if (v < rep.diffusion_positive.value) {
        rep.diffusion_positive.value = v;
        rep.diffusion_positive.witness_x = x;
        rep.diffusion_positive.witness_t = t;
      }
    }
  rep.diffusion_positive.pass = rep.diffusion_positive.value > 0.0;

  // (2) S > 0 when available.
  rep.noise_positive.label = "observation noise S > 0";
  if (S) {
    rep.noise_positive.value = std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
      const double v = S(t);
      if (v < rep.noise_positive.value) {
        rep.noise_positive.value = v;
        rep.noise_positive.witness_t = t;
      }
    }
    rep.noise_positive.pass = rep.noise_positive.value > 0.0;
  } else {
    rep.noise_positive.pass = true;  // not supplied, nothing to check
    rep.noise_positive.value = std::numeric_limits<double>::quiet_NaN();
  }

  // (3) sup r = C; the bound is meaningful only if the trend at the grid
  // boundary does not exceed the interior maximum.
  rep.zeroth_order_bound.label = "zeroth-order coefficient bounded above";
  double interior_max = -std::numeric_limits<double>::infinity();
  double boundary_max = -std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double v = g.r(grid[i], t);
      const bool boundary = i == 0 || i + 1 == grid.size();
      if (boundary) {
        boundary_max = std::max(boundary_max, v);
      } else if (v > interior_max) {
        interior_max = v;
        rep.zeroth_order_bound.witness_x = grid[i];
        rep.zeroth_order_bound.witness_t = t;
      }
    }
  }
  rep.zeroth_order_bound.value = std::max(interior_max, boundary_max);
  rep.zeroth_order_bound.pass = boundary_max <= interior_max;

  // (4) tail exponent of -r against |x|: least-squares slope over the outer
  // quartile on each side, gamma = slope / 2 (r plays the canonical potential
  // whenever the convection correction vanishes).
  const double t0 = t_grid.front();
  std::vector<double> lx, lv;
  const double xmax = std::max(std::abs(grid.front()), std::abs(grid.back()));
  for (double x : grid) {
    if (std::abs(x) < 0.75 * xmax || std::abs(x) < 1e-12) continue;
    const double neg_r = -g.r(x, t0);
    if (neg_r <= 0.0) continue;
    lx.push_back(std::log(std::abs(x)));
    lv.push_back(std::log(neg_r));
  }
  if (lx.size() >= 4) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += lv[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * lv[i];
    }
    const double n = static_cast<double>(lx.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.fitted_gamma = 0.5 * slope;
    rep.gamma_fit_valid = true;
    double c = 0.0;
    for (double x : grid) {
      const double neg_r = -g.r(x, t0);
      if (neg_r > 0.0)
        c = std::max(c, neg_r / std::pow(1.0 + x * x, rep.fitted_gamma));
    }
    rep.growth_constant = c;
  }
  return rep;
}

}  // namespace hfke
