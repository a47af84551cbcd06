#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace hfke {

/**
 * @brief Scaled and translated Hermite-function basis.
 *
 * The basis functions are H_n(x) = h_n(alpha*(x - beta)) * exp(-alpha^2*(x-beta)^2/2)
 * with h_n the physicists' Hermite polynomial normalized by 1/sqrt(2^n n!).
 * They are orthogonal with <H_n, H_m> = (sqrt(pi)/alpha) * delta_nm and are
 * eigenfunctions of the associated Sturm-Liouville operator with
 * eigenvalue(n) = 2*alpha^2*n.
 */
struct BasisSpec {
  double alpha = 1.0;  // scaling factor, > 0 (dimension 1/length)
  double beta = 0.0;   // translating factor (length)
  int n_modes = 0;     // highest retained index N, >= 0

  int size() const { return n_modes + 1; }
  double eigenvalue(int n) const { return 2.0 * alpha * alpha * n; }
  void validate() const;
};

/// Gauss-Hermite rule for the weight exp(-t^2) on the real line.
///
/// modified_weights[j] = weights[j] * exp(nodes[j]^2); they integrate
/// unweighted functions and are computed from the identity
/// w_j*e^{t_j^2} = sqrt(pi)/(M * psi_{M-1}(t_j)^2) so no large exponential
/// is ever formed.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> modified_weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

QuadratureRule gauss_hermite_rule(int m);

/// Fourier-Hermite coefficients of a function in a given basis.
struct CoeffVector {
  BasisSpec spec;
  Eigen::VectorXd values;  // N+1 entries, u_hat_0 .. u_hat_N
};

/// Asymptotic envelope f ~ exp(-p*|x|^k) used by the scaling guideline.
struct AsymptoticProfile {
  double p = 1.0;  // > 0
  double k = 2.0;  // >= 2

  void validate() const;
  /// The reference density exp(-p*|x - center|^k).
  double density(double x, double center = 0.0) const;
};

/// Result of the scaling-factor guideline.
struct ScalingChoice {
  double alpha;       // basis scaling factor
  double half_width;  // L: half-width of the resolvable interval
  int n_modes;        // truncation mode N
};

/// Values [H_0(x), ..., H_N(x)] via the stabilized weighted recurrence
/// (the Gaussian factor is folded into the three-term recursion, so no
/// intermediate overflows up to N ~ 500 and |alpha*(x-beta)| ~ 40).
Eigen::VectorXd eval_functions(const BasisSpec& spec, double x);

/// Matrix of basis values at the rule's nodes: entry (n, j) = H_n(beta + t_j/alpha).
/// Independent of beta since the nodes follow the basis center.
Eigen::MatrixXd basis_node_matrix(const BasisSpec& spec, const QuadratureRule& rule);

/// L2-orthogonal projection onto the first N+1 basis functions, computed by
/// Gauss-Hermite quadrature in the scaled variable t = alpha*(x - beta).
/// Requires rule.size() >= N+1.
CoeffVector project(const std::function<double(double)>& f, const BasisSpec& spec,
                    const QuadratureRule& rule);

/// Projection from function samples taken at the rule's nodes beta + t_j/alpha.
CoeffVector project_values(const Eigen::VectorXd& values_at_nodes, const BasisSpec& spec,
                           const QuadratureRule& rule);

double evaluate(const CoeffVector& coeffs, double x);

/// Coefficients of u'. The generated mode N+1 is dropped (Galerkin truncation).
CoeffVector differentiate(const CoeffVector& coeffs);

/// Coefficients of (x - beta)*u. The generated mode N+1 is dropped.
CoeffVector multiply_by_shifted_x(const CoeffVector& coeffs);

/// ||u|| with ||u||^2 = (sqrt(pi)/alpha) * sum u_hat_n^2.
double l2_norm(const CoeffVector& coeffs);

/// Eigenvalue-weighted norm, ||u||_r^2 = sum_n eigenvalue(n+1)^r * u_hat_n^2.
double sobolev_norm(const CoeffVector& coeffs, int r);

/// ||f - P_N f|| by quadrature with ref_rule (recommended: 4*(N+1) points).
double truncation_error(const std::function<double(double)>& f, const BasisSpec& spec,
                        const QuadratureRule& ref_rule);

/// Scaling-factor guideline for Gaussian (k = 2) and super-Gaussian (k > 2)
/// envelopes. n_modes is the smallest N whose degree-(N+1) Hermite zeros
/// cover the interval (-alpha*L, alpha*L) with a 1% margin.
ScalingChoice choose_scaling(const AsymptoticProfile& profile);

/// Re-expand the function represented by coeffs in a different basis by
/// sampling at the new rule's nodes and projecting. Lossy: content outside
/// the new basis's resolvable region is truncated.
CoeffVector rebase(const CoeffVector& coeffs, const BasisSpec& new_spec,
                   const QuadratureRule& rule);

/// Default quadrature sizes: 2*(N+1) points for projections and assembly,
/// 4*(N+1) for truncation-error estimates.
QuadratureRule projection_rule(const BasisSpec& spec);
QuadratureRule reference_rule(const BasisSpec& spec);

}  // namespace hfke
