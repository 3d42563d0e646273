#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "mcp/riccati.hpp"

namespace mcp {

enum class SpaceKind { heisenberg, hopf, anti_de_sitter };

/// One of the three homogeneous model spaces. Heisenberg uses the chart
/// (x_1..x_n, y_1..y_n, z) of dimension 2n+1; the Hopf sphere and the
/// anti-de-Sitter hyperboloid use the ambient chart R^{2n+2} (real pairs of
/// n+1 complex coordinates) with the defining constraint.
struct ModelSpace {
  SpaceKind kind = SpaceKind::heisenberg;
  int half_dim = 1;
  double curv_k1 = 0.0;  // Tanaka-Webster constant for the J p^h direction
  double curv_k2 = 0.0;  // and for the orthogonal block

  int chart_dim() const {
    return kind == SpaceKind::heisenberg ? 2 * half_dim + 1 : 2 * half_dim + 2;
  }

  static ModelSpace heisenberg(int n);
  static ModelSpace hopf(int n);
  static ModelSpace anti_de_sitter(int n);
};

/// A point of the cotangent bundle in the space's chart.
struct PhaseState {
  Eigen::VectorXd x;
  Eigen::VectorXd p;
};

struct GeodesicTrajectory {
  std::vector<double> times;
  std::vector<PhaseState> states;
  std::vector<double> hamiltonian_values;
  std::vector<double> reeb_values;
  double max_hamiltonian_drift = 0.0;  // relative
  double max_reeb_drift = 0.0;         // relative
  double max_constraint_drift = 0.0;
};

enum class FlowMethod { automatic, exact, numeric };

struct FlowOptions {
  double rtol = 1e-12;
  double atol = 1e-14;
  int num_outputs = 64;
  FlowMethod method = FlowMethod::automatic;
};

/// Deviation of the state from the space's chart constraint
/// (|z|^2 - 1 for Hopf, |z|_H^2 - 1 for anti-de-Sitter, 0 for Heisenberg).
double constraint_value(const ModelSpace& space, const Eigen::VectorXd& x);

void validate_state(const ModelSpace& space, const PhaseState& state);

/// Sub-Riemannian kinetic energy H = |p^h|^2 / 2.
double hamiltonian(const ModelSpace& space, const PhaseState& state);

/// Momentum of the Reeb field, u0 = p(v0); a first integral of the flow.
double reeb_momentum(const ModelSpace& space, const PhaseState& state);

/// Integrates the Hamiltonian geodesic flow for time T. Heisenberg uses its
/// closed-form flow unless FlowMethod::numeric is requested; the curved
/// spaces integrate the constrained ambient system with per-step
/// reprojection.
GeodesicTrajectory geodesic_flow(const ModelSpace& space, const PhaseState& state,
                                 double T, const FlowOptions& options = {});

/// Constant curvature matrix along the geodesic through the state:
/// R_bb = K1 * 2H + u0^2, R_cc = (K2 * 2H + u0^2/4) I, R_cb = 0.
/// Requires H > 0.
CurvatureMatrix curvature_matrix(const ModelSpace& space, const PhaseState& state);

/// The exact contraction constants (k1, k2) of the model space for the
/// geodesic through the state: equal to (R_bb, R_cc eigenvalue).
std::pair<double, double> mcp_params(const ModelSpace& space, const PhaseState& state);

/// Frame columns (X_1..X_n, Y_1..Y_n, v0) at a chart point, orthonormal for
/// the space's Riemannian metric, with Y_i = J X_i.
Eigen::MatrixXd frame_vectors(const ModelSpace& space, const Eigen::VectorXd& x);

/// Riemannian pairing g(v, w) of tangent vectors at x.
double metric_pairing(const ModelSpace& space, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& v, const Eigen::VectorXd& w);

/// Contact form and complex structure, for the Sasakian identity checks.
double contact_form(const ModelSpace& space, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& v);
Eigen::VectorXd complex_structure(const ModelSpace& space, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& v);
Eigen::VectorXd reeb_field(const ModelSpace& space, const Eigen::VectorXd& x);

/// Covector with frame coefficients (a_1..a_n on X_i, b_1..b_n on Y_i) and
/// Reeb momentum u0, attached at chart point x.
PhaseState covector_state(const ModelSpace& space, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& horizontal_coeffs, double u0);

/// Pre-cut admissibility of a covector with kinetic energy H and Reeb
/// momentum u0: the model conjugate time must exceed the unit interval.
bool within_minimality_guard(const ModelSpace& space, double two_h, double u0);

using TangentCurvatureFn =
    std::function<CurvatureMatrix(const Eigen::VectorXd& unit_horizontal, double u0)>;

/// Wraps a user-supplied Tanaka-Webster curvature evaluation into a constant
/// profile (fixed direction) for the Riccati engine. Throws on asymmetric
/// callback output.
CurvatureProfile user_curvature_profile(const TangentCurvatureFn& fn,
                                        const Eigen::VectorXd& unit_horizontal,
                                        double u0, int n);

/// Time-dependent variant: the direction along the geodesic is supplied as a
/// curve t -> unit horizontal vector.
CurvatureProfile user_curvature_profile(
    const TangentCurvatureFn& fn,
    const std::function<Eigen::VectorXd(double)>& direction, double u0, int n);

}  // namespace mcp
