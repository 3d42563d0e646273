#pragma once

#include <Eigen/Dense>

#include "mcp/errors.hpp"

namespace mcp {

/// Curvature bounds (k1, k2) and topological dimension N parametrizing the
/// generalized measure-contraction density. N must be odd and >= 3.
struct ComparisonParams {
  double k1 = 0.0;
  double k2 = 0.0;
  int n_dim = 3;

  void validate() const;
};

/// Parameters of the comparison matrix equation: the constant matrix
/// K = diag(0, k1, k2*I_{2n-2}, 0) of size (2n+1) x (2n+1).
struct ComparisonMatrixSpec {
  double k1 = 0.0;
  double k2 = 0.0;
  int half_dim = 1;

  void validate() const;
};

/// D(k, t) = sqrt(|k|) * (1 - t).
double d_param(double k, double t);

/// First comparison function:
///   k > 0:  (2 - 2 cos D - D sin D) / D^4
///   k = 0:  1/12
///   k < 0:  (2 - 2 cosh D + D sinh D) / D^4
/// Analytic in s = k (1-t)^2; evaluated by series near s = 0.
double m1(double k, double t);

/// Second comparison function: sin(D)/D, 1, or sinh(D)/D by the sign of k.
double m2(double k, double t);

/// True when k > 0 and D(k, t) exceeds 2*pi, i.e. m1's numerator has passed
/// its first zero. The value is still returned by m1; callers that need a
/// positive comparison density must reject this regime.
bool m1_past_first_zero(double k, double t);

/// Full density ratio
///   (1-t)^{N+2} M1(k1 d^2, t) M2^{N-3}(k2 d^2, t)
///   -----------------------------------------------
///        M1(k1 d^2, 0) M2^{N-3}(k2 d^2, 0)
/// Exactly 1 at t = 0 and 0 at t = 1. Throws pole_error when the
/// denominator vanishes (geodesic at or past a conjugate point).
double density_factor(const ComparisonParams& params, double dist_sq, double t);

/// Decoupled trace bound for the 2x2 (a,b) block:
///   sqrt(k1) (sin D - D cos D) / (2 - 2 cos D - D sin D),  D = D(k1, t),
/// with the k1 = 0 limit 4/(1-t) and the hyperbolic continuation for k1 < 0.
/// Pole at D = 2*pi (k1 > 0).
double trace_bound_b(double k1, double t);

/// Decoupled trace bound for the c block of size m:
/// m sqrt(k2) cot(D), m/(1-t), or m sqrt(|k2|) coth(D). Pole at D = pi.
double trace_bound_c(double k2, double t, int block_size);

/// Bound on the trailing scalar block: 1/(1-t).
double trace_bound_last(double t);

/// Explicit solution Lambda(t) of the comparison Riccati equation
///   Lambda' - Lambda K Lambda + C1 Lambda + Lambda C1^T - C2 = 0,
/// as a (2n+1) x (2n+1) symmetric matrix. The k <= 0 branches are the
/// tanh/sech analytic continuations. Throws pole_error near tan/sec poles.
Eigen::MatrixXd lambda_closed_form(const ComparisonMatrixSpec& spec, double t);

/// First pole of lambda_closed_form: pi / (2 sqrt(max(k1, k2))) when some
/// k is positive, +infinity otherwise.
double lambda_first_pole(const ComparisonMatrixSpec& spec);

/// The constant matrix K = diag(0, k1, k2*I_{2n-2}, 0).
Eigen::MatrixXd comparison_matrix_k(const ComparisonMatrixSpec& spec);

}  // namespace mcp
