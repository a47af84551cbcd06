#include "hfke/basis.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace hfke {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
const double kSqrtPi = std::sqrt(kPi);

// Coverage margin for the mode-selection rule: the zeros of the degree-(N+1)
// Hermite polynomial must reach 1% past alpha*L. The bare >= comparison
// under-resolves the super-Gaussian case by one mode.
constexpr double kCoverageMargin = 1.01;

// Values psi_0..psi_nmax of the weighted normalized Hermite functions at t:
// psi_n(t) = h_n(t)/sqrt(2^n n!) * exp(-t^2/2). Recursing on the weighted
// functions keeps every intermediate bounded.
void weighted_recurrence(int nmax, double t, double* out) {
  out[0] = std::exp(-0.5 * t * t);
  if (nmax >= 1) out[1] = std::sqrt(2.0) * t * out[0];
  for (int n = 1; n < nmax; ++n) {
    out[n + 1] = t * std::sqrt(2.0 / (n + 1)) * out[n] - std::sqrt(double(n) / (n + 1)) * out[n - 1];
  }
}

}  // namespace

void BasisSpec::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("BasisSpec: alpha must be positive");
  if (n_modes < 0) throw std::invalid_argument("BasisSpec: n_modes must be non-negative");
}

void AsymptoticProfile::validate() const {
  if (!(p > 0.0)) throw std::invalid_argument("AsymptoticProfile: p must be positive");
  if (!(k >= 2.0)) throw std::invalid_argument("AsymptoticProfile: k must be >= 2");
}

double AsymptoticProfile::density(double x, double center) const {
  return std::exp(-p * std::pow(std::abs(x - center), k));
}

Eigen::VectorXd eval_functions(const BasisSpec& spec, double x) {
  spec.validate();
  Eigen::VectorXd out(spec.size());
  const double t = spec.alpha * (x - spec.beta);
  weighted_recurrence(spec.n_modes, t, out.data());
  return out;
}

Eigen::MatrixXd basis_node_matrix(const BasisSpec& spec, const QuadratureRule& rule) {
  spec.validate();
  const int m = rule.size();
  Eigen::MatrixXd psi(spec.size(), m);
  std::vector<double> col(static_cast<std::size_t>(spec.size()));
  for (int j = 0; j < m; ++j) {
    weighted_recurrence(spec.n_modes, rule.nodes[static_cast<std::size_t>(j)], col.data());
    for (int n = 0; n < spec.size(); ++n) psi(n, j) = col[static_cast<std::size_t>(n)];
  }
  return psi;
}

QuadratureRule gauss_hermite_rule(int m) {
  if (m < 1) throw std::invalid_argument("gauss_hermite_rule: need at least one node");

  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(m));

  if (m == 1) {
    rule.nodes[0] = 0.0;
  } else {
    // Golub-Welsch: nodes are the eigenvalues of the symmetric tridiagonal
    // Jacobi matrix with off-diagonal sqrt(j/2).
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sub(m - 1);
    for (int j = 1; j < m; ++j) sub[j - 1] = std::sqrt(0.5 * j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("gauss_hermite_rule: eigenvalue solve failed");
    Eigen::VectorXd t = es.eigenvalues();
    std::sort(t.data(), t.data() + m);
    // Enforce exact antisymmetry; Newton preserves it bit-for-bit because the
    // recurrence is parity-exact in floating point.
    for (int j = 0; j < m / 2; ++j) {
      const double v = 0.5 * (t[j] - t[m - 1 - j]);
      t[j] = v;
      t[m - 1 - j] = -v;
    }
    if (m % 2 == 1) t[m / 2] = 0.0;
    // Newton polish on psi_m; derivative from the ladder relation.
    std::vector<double> psi(static_cast<std::size_t>(m) + 2);
    for (int it = 0; it < 4; ++it) {
      for (int j = 0; j < m; ++j) {
        weighted_recurrence(m + 1, t[j], psi.data());
        const double f = psi[static_cast<std::size_t>(m)];
        const double df = std::sqrt(0.5 * m) * psi[static_cast<std::size_t>(m) - 1] -
                          std::sqrt(0.5 * (m + 1)) * psi[static_cast<std::size_t>(m) + 1];
        if (df != 0.0) t[j] -= f / df;
      }
    }
    for (int j = 0; j < m; ++j) rule.nodes[static_cast<std::size_t>(j)] = t[j];
  }

  // w_j e^{t_j^2} = sqrt(pi) / (m * psi_{m-1}(t_j)^2); no exponential blow-up.
  rule.weights.resize(static_cast<std::size_t>(m));
  rule.modified_weights.resize(static_cast<std::size_t>(m));
  std::vector<double> psi(static_cast<std::size_t>(m) + 1);
  for (int j = 0; j < m; ++j) {
    const double tj = rule.nodes[static_cast<std::size_t>(j)];
    weighted_recurrence(m == 1 ? 0 : m - 1, tj, psi.data());
    const double pm1 = psi[static_cast<std::size_t>(m - 1)];
    const double mw = kSqrtPi / (m * pm1 * pm1);
    if (!std::isfinite(mw))
      throw std::runtime_error("gauss_hermite_rule: modified weight overflow");
    rule.modified_weights[static_cast<std::size_t>(j)] = mw;
    rule.weights[static_cast<std::size_t>(j)] = mw * std::exp(-tj * tj);
  }
  return rule;
}

QuadratureRule projection_rule(const BasisSpec& spec) {
  return gauss_hermite_rule(2 * spec.size());
}

QuadratureRule reference_rule(const BasisSpec& spec) {
  return gauss_hermite_rule(4 * spec.size());
}

CoeffVector project_values(const Eigen::VectorXd& values_at_nodes, const BasisSpec& spec,
                           const QuadratureRule& rule) {
  spec.validate();
  if (rule.size() < spec.size())
    throw std::invalid_argument("project: rule must have at least N+1 nodes");
  if (values_at_nodes.size() != rule.size())
    throw std::invalid_argument("project_values: sample count does not match rule");
  const Eigen::MatrixXd psi = basis_node_matrix(spec, rule);
  const Eigen::Map<const Eigen::VectorXd> mw(rule.modified_weights.data(), rule.size());
  CoeffVector out{spec, (psi * mw.cwiseProduct(values_at_nodes)) / kSqrtPi};
  return out;
}

CoeffVector project(const std::function<double(double)>& f, const BasisSpec& spec,
                    const QuadratureRule& rule) {
  Eigen::VectorXd vals(rule.size());
  for (int j = 0; j < rule.size(); ++j)
    vals[j] = f(spec.beta + rule.nodes[static_cast<std::size_t>(j)] / spec.alpha);
  return project_values(vals, spec, rule);
}

double evaluate(const CoeffVector& coeffs, double x) {
  return coeffs.values.dot(eval_functions(coeffs.spec, x));
}

CoeffVector differentiate(const CoeffVector& coeffs) {
  const int n = coeffs.spec.size();
  const double a = coeffs.spec.alpha;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int m = 0; m < n; ++m) {
    double v = 0.0;
    if (m + 1 < n) v += std::sqrt(0.5 * (m + 1)) * coeffs.values[m + 1];
    if (m >= 1) v -= std::sqrt(0.5 * m) * coeffs.values[m - 1];
    out[m] = a * v;  // mode N+1 dropped (Galerkin truncation)
  }
  return {coeffs.spec, out};
}

CoeffVector multiply_by_shifted_x(const CoeffVector& coeffs) {
  const int n = coeffs.spec.size();
  const double inv2a = 0.5 / coeffs.spec.alpha;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int m = 0; m < n; ++m) {
    double v = 0.0;
    if (m + 1 < n) v += std::sqrt(2.0 * (m + 1)) * coeffs.values[m + 1];
    if (m >= 1) v += std::sqrt(2.0 * m) * coeffs.values[m - 1];
    out[m] = inv2a * v;
  }
  return {coeffs.spec, out};
}

double l2_norm(const CoeffVector& coeffs) {
  return std::sqrt(kSqrtPi / coeffs.spec.alpha * coeffs.values.squaredNorm());
}

double sobolev_norm(const CoeffVector& coeffs, int r) {
  if (r < 0) throw std::invalid_argument("sobolev_norm: r must be non-negative");
  double acc = 0.0;
  for (int n = 0; n < coeffs.spec.size(); ++n)
    acc += std::pow(coeffs.spec.eigenvalue(n + 1), r) * coeffs.values[n] * coeffs.values[n];
  return std::sqrt(acc);
}

double truncation_error(const std::function<double(double)>& f, const BasisSpec& spec,
                        const QuadratureRule& ref_rule) {
  Eigen::VectorXd vals(ref_rule.size());
  for (int j = 0; j < ref_rule.size(); ++j)
    vals[j] = f(spec.beta + ref_rule.nodes[static_cast<std::size_t>(j)] / spec.alpha);
  const CoeffVector proj = project_values(vals, spec, ref_rule);
  const Eigen::MatrixXd psi = basis_node_matrix(spec, ref_rule);
  const Eigen::VectorXd res = vals - psi.transpose() * proj.values;
  const Eigen::Map<const Eigen::VectorXd> mw(ref_rule.modified_weights.data(), ref_rule.size());
  return std::sqrt(mw.dot(res.cwiseProduct(res)) / spec.alpha);
}

ScalingChoice choose_scaling(const AsymptoticProfile& profile) {
  profile.validate();
  const double ln10 = std::log(10.0);
  double alpha, half_width;
  if (profile.k <= 2.0 + 1e-12) {
    // Gaussian type: match the envelope, then size L from e^{-2pL^2} ~ 1e-16.
    alpha = std::sqrt(2.0 * profile.p);
    half_width = std::sqrt(8.0 * ln10 / profile.p);
  } else {
    // Super-Gaussian type: e^{-alpha^2 x^2 / 2} ~ 1e-16 at the matching point.
    half_width = std::pow(16.0 * ln10 / profile.p, 1.0 / profile.k);
    alpha = std::pow(2.0, 2.5 - 4.0 / profile.k) * std::pow(profile.p, 1.0 / profile.k) *
            std::pow(ln10, 0.5 - 1.0 / profile.k);
  }
  const double target = kCoverageMargin * alpha * half_width;
  for (int n = 0; n < 400; ++n) {
    const QuadratureRule rule = gauss_hermite_rule(n + 1);
    if (rule.nodes.back() >= target) return {alpha, half_width, n};
  }
  throw std::runtime_error("choose_scaling: no truncation mode below 400 covers the domain");
}

CoeffVector rebase(const CoeffVector& coeffs, const BasisSpec& new_spec,
                   const QuadratureRule& rule) {
  Eigen::VectorXd vals(rule.size());
  for (int j = 0; j < rule.size(); ++j) {
    const double x = new_spec.beta + rule.nodes[static_cast<std::size_t>(j)] / new_spec.alpha;
    vals[j] = evaluate(coeffs, x);
  }
  return project_values(vals, new_spec, rule);
}

}  // namespace hfke
