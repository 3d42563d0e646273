#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mcp/comparison.hpp"
#include "mcp/errors.hpp"

namespace mcp {

/// Constant structure matrices of the canonical frame: C1 has a single 1 at
/// (0, 1); C2 = diag(0, 1, ..., 1). Both of size (2n+1) x (2n+1).
struct StructureMatrices {
  Eigen::MatrixXd c1;
  Eigen::MatrixXd c2;
  int half_dim = 1;
};

StructureMatrices build_structure_matrices(int n);

/// Symmetric curvature matrix in the canonical block form: zero first and
/// last rows/columns, scalar bb entry, coupling row cb and symmetric cc
/// block. Block ordering is (a, b, c_1..c_{2n-2}, c_last).
struct CurvatureMatrix {
  double r_bb = 0.0;
  Eigen::RowVectorXd r_cb;  // length 2n-2
  Eigen::MatrixXd r_cc;     // (2n-2) x (2n-2)
  int half_dim = 1;

  void validate() const;
  Eigen::MatrixXd assemble() const;

  /// Diagonal curvature diag(0, k1, k2 I, 0).
  static CurvatureMatrix diagonal(int n, double k1, double k2);
};

/// Time-dependent curvature R(t) on [0, 1].
struct CurvatureProfile {
  std::function<CurvatureMatrix(double)> eval;
  bool constant = false;
  int half_dim = 1;

  static CurvatureProfile make_constant(CurvatureMatrix r);
  Eigen::MatrixXd assembled(double t) const;
};

/// Solution of the terminal-value matrix Riccati equation
///   S' - S C2 S + C1^T S + S C1 - R(t) = 0,  lim_{t->1} S(t)^{-1} = 0,
/// sampled on a caller grid, together with tr(C2 S(t)) and the volume
/// distortion det B(t) (normalized to det B(0) = 1).
struct RiccatiSolution {
  std::vector<double> grid;
  std::vector<Eigen::MatrixXd> s_values;
  std::vector<double> trace_c2s;
  std::vector<double> det_b;
  std::vector<double> log_det_b;
  int half_dim = 1;
  double max_asymmetry = 0.0;
};

/// Integrates the reversed-time frame pair from the terminal condition and
/// assembles S(t) = B~(1-t)^{-1} A~(1-t) on the grid (ascending, within
/// [0, 1 - 1e-6]). Throws conjugate_point_error if det B vanishes at an
/// interior time and std::invalid_argument on asymmetric profiles.
RiccatiSolution solve_riccati_terminal(const CurvatureProfile& profile, int n,
                                       std::span<const double> grid);

/// The stored (t, det B(t)) pairs of a solution.
std::vector<std::pair<double, double>> volume_distortion(const RiccatiSolution& sol);

/// Forward solution of the linear frame system
///   A' = -A C1 + B R(t),  B' = -A C2 + B C1^T.
struct FrameSolution {
  std::vector<double> grid;
  std::vector<Eigen::MatrixXd> a_values;
  std::vector<Eigen::MatrixXd> b_values;
  int half_dim = 1;

  std::vector<double> det_b() const;
};

FrameSolution solve_frame_forward(const CurvatureProfile& profile, int n,
                                  const Eigen::MatrixXd& a0,
                                  const Eigen::MatrixXd& b0,
                                  std::span<const double> grid);

/// First zero of det B(t) on (0, horizon] for the vertical initial condition
/// (A0 = I, B0 = 0), located by sign bracketing and bisection; nullopt when
/// det B does not vanish after leaving the origin.
std::optional<double> detect_conjugate_time(const CurvatureProfile& profile,
                                            int n, double horizon);

/// Comparison report of tr(C2 S) against the decoupled trace bounds and of
/// det B against the model density.
struct TraceComparisonReport {
  std::vector<double> grid;
  std::vector<double> trace_c2s;
  std::vector<double> trace_bound;
  std::vector<double> det_b;
  std::vector<double> det_bound;
  bool precondition_ok = true;
  int trace_violations = 0;
  int det_violations = 0;
  double max_trace_excess = 0.0;  // max(trace - bound)
  double max_det_deficit = 0.0;   // max(bound - det_b)
};

TraceComparisonReport verify_trace_comparison(const CurvatureProfile& profile,
                                              int n, double k1, double k2,
                                              std::span<const double> grid);

/// Model volume density (1-t)^{2n+3} M1(k1,t) M2^{2n-2}(k2,t) / (values at 0):
/// the exact det B(t) for the diagonal curvature diag(0, k1, k2 I, 0).
double model_density(int n, double k1, double k2, double t);

/// U(tau) = A~(tau)^{-1} B~(tau), the inverse of S(1 - tau); regular initial
/// value U(0) = 0 of the reversed Riccati flow.
Eigen::MatrixXd riccati_u_matrix(const CurvatureProfile& profile, int n, double tau);

/// S at a single time (single-point grid convenience).
Eigen::MatrixXd riccati_s_at(const CurvatureProfile& profile, int n, double t);

/// Cumulative integral of sampled values by piecewise-parabolic quadrature;
/// returns one value per grid point, starting at 0.
std::vector<double> cumulative_integral(std::span<const double> times,
                                        std::span<const double> values);

}  // namespace mcp
