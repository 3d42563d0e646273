#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcp/models.hpp"
#include "mcp/riccati.hpp"

namespace mcp {

/// One contraction comparison along a single geodesic: measured det B(t)
/// from the Riccati engine against the closed-form model density.
struct ContractionRow {
  double two_h = 0.0;
  double u0 = 0.0;
  double k1 = 0.0;  // contraction constants of the geodesic
  double k2 = 0.0;
  std::vector<double> measured;
  std::vector<double> predicted;
  double max_abs_deviation = 0.0;
  int violations = 0;  // measured < predicted - tol (inequality mode)
};

struct ContractionReport {
  std::string space;
  std::string mode;  // "equality" or "inequality"
  std::vector<double> grid;
  std::uint64_t seed = 0;
  int sample_count = 0;
  int rejected = 0;  // non-minimizing covectors filtered out
  double max_abs_deviation = 0.0;
  int violations = 0;
  double aggregate_measured = 0.0;   // mean over samples and grid
  double aggregate_predicted = 0.0;
  double max_hamiltonian_drift = 0.0;
  double max_reeb_drift = 0.0;
  double max_curvature_drift = 0.0;
  std::vector<ContractionRow> rows;
};

/// det B(t) on the grid for the geodesic with this terminal covector,
/// against the model prediction with (k1, k2) = mcp_params. Throws
/// conjugate_point_error when the geodesic stops minimizing inside [0, 1).
ContractionRow contraction_profile(const ModelSpace& space, const PhaseState& state,
                                   std::span<const double> grid);

struct SweepOptions {
  double d_min = 0.2;
  double d_max = 1.0;
  // Conservative shrink of the admissible covector region: det B(t) diverges
  // as the cut boundary is approached, so sampling up to the boundary makes
  // absolute deviation targets meaningless in double precision.
  double guard_margin = 0.9;
  bool check_flow = false;  // integrate each geodesic and record drifts
};

/// Monte Carlo sweep of contraction_profile over admissible covectors;
/// deviation statistics per the exact-equality claims of the model spaces.
ContractionReport equality_sweep(const ModelSpace& space, int sample_count,
                                 std::span<const double> grid, std::uint64_t seed,
                                 const SweepOptions& options = {});

/// Definition-level inequality: measured det B against the density with
/// curvature-bound arguments k1 d^2, k2 d^2. Zero violations expected when
/// the space's Tanaka-Webster curvature satisfies the (k1, k2) bounds.
ContractionReport mcp_inequality_check(const ModelSpace& space, double k1,
                                       double k2, int sample_count,
                                       std::span<const double> grid,
                                       std::uint64_t seed,
                                       const SweepOptions& options = {});

/// User-profile route: wraps verify_trace_comparison for a curvature profile
/// known to satisfy R_bb >= k1 and tr R_cc >= (2n-2) k2.
ContractionReport mcp_inequality_check(const CurvatureProfile& profile, int n,
                                       double k1, double k2,
                                       std::span<const double> grid);

struct DoublingReport {
  int half_dim = 1;
  double radius = 1.0;
  std::uint64_t seed = 0;
  int sample_count = 0;
  double vol_r = 0.0;
  double vol_2r = 0.0;
  double ratio = 0.0;
  double expected_ratio = 0.0;  // 2^{2n+2}
  double rel_error = 0.0;
  double mc_rel_std = 0.0;  // Monte Carlo relative standard error of the ratio
};

/// Estimates vol(B(2R))/vol(B(R)) on the Heisenberg group by Monte Carlo
/// integration of the finite-difference exponential-map Jacobian over the
/// pre-cut covector region {|p^h| <= R, |u0| < 2 pi}. Parallel and serial
/// runs agree bit-exactly.
DoublingReport doubling_check(const ModelSpace& space, double radius,
                              int sample_count, std::uint64_t seed,
                              int threads = 0);

/// |det| of the finite-difference Jacobian of the unit-time exponential map
/// at the given covector coefficients (horizontal coeffs then u0), base x.
double exp_jacobian_det(const ModelSpace& space, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& coeffs, double u0);

}  // namespace mcp
