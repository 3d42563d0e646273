#include "mcp/models.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "mcp/ode.hpp"

namespace mcp {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kConstraintTol = 1e-10;

// The ambient complex structure J: per complex coordinate (x, y) -> (-y, x).
Eigen::VectorXd apply_j(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index j = 0; j + 1 < v.size(); j += 2) {
    out[j] = -v[j + 1];
    out[j + 1] = v[j];
  }
  return out;
}

// Signature matrix of the anti-de-Sitter ambient form: -1 on the first n
// complex pairs, +1 on the last.
Eigen::VectorXd ads_signature(int dim) {
  Eigen::VectorXd g = -Eigen::VectorXd::Ones(dim);
  g[dim - 2] = 1.0;
  g[dim - 1] = 1.0;
  return g;
}

double indef_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd g = ads_signature(static_cast<int>(a.size()));
  return (a.array() * g.array() * b.array()).sum();
}

// sin(t)/t, (1 - cos(t))/t and (t - sin(t))/t^2, stable near t = 0.
double sinc(double t) {
  if (std::abs(t) < 1e-4) {
    const double s = t * t;
    return 1.0 - s / 6.0 + s * s / 120.0;
  }
  return std::sin(t) / t;
}
double versinc(double t) {
  if (std::abs(t) < 1e-4) {
    const double s = t * t;
    return t * (0.5 - s / 24.0 + s * s / 720.0);
  }
  return (1.0 - std::cos(t)) / t;
}
double cubinc(double t) {
  if (std::abs(t) < 1e-4) {
    const double s = t * t;
    return t * (1.0 / 6.0 - s / 120.0 + s * s / 5040.0);
  }
  return (t - std::sin(t)) / (t * t);
}

struct HeisenbergView {
  int n;
  explicit HeisenbergView(int half_dim) : n(half_dim) {}
  // chart (x_1..x_n, y_1..y_n, z); frame momenta u_i = p(X_i), v_i = p(Y_i)
  double u(const PhaseState& s, int i) const {
    return s.p[i] - 0.5 * s.x[n + i] * s.p[2 * n];
  }
  double v(const PhaseState& s, int i) const {
    return s.p[n + i] + 0.5 * s.x[i] * s.p[2 * n];
  }
};

PhaseState heisenberg_exact_flow(int n, const PhaseState& s0, double t) {
  HeisenbergView hv(n);
  const double u0 = s0.p[2 * n];
  const double theta = u0 * t;
  PhaseState s = s0;
  double z_inc = 0.0;
  const std::complex<double> rot(std::cos(theta), std::sin(theta));
  for (int i = 0; i < n; ++i) {
    const std::complex<double> w0(s0.x[i], s0.x[n + i]);
    const std::complex<double> zeta0(hv.u(s0, i), hv.v(s0, i));
    // integral of e^{i u0 tau} over [0, t]
    const std::complex<double> eint(t * sinc(theta), t * versinc(theta));
    const std::complex<double> w = w0 + eint * zeta0;
    const std::complex<double> zeta = rot * zeta0;
    z_inc += 0.5 * std::imag(std::conj(w0) * zeta0 * eint);
    z_inc += 0.5 * std::norm(zeta0) * t * t * cubinc(theta);
    s.x[i] = w.real();
    s.x[n + i] = w.imag();
    s.p[i] = zeta.real() + 0.5 * s.x[n + i] * u0;
    s.p[n + i] = zeta.imag() - 0.5 * s.x[i] * u0;
  }
  s.x[2 * n] = s0.x[2 * n] + z_inc;
  s.p[2 * n] = u0;
  return s;
}

ode::Rhs heisenberg_rhs(int n) {
  return [n](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const int d = 2 * n + 1;
    dy.resize(2 * d);
    const double pz = y[d + 2 * n];
    double dz = 0.0;
    for (int i = 0; i < n; ++i) {
      const double xi = y[i], yi = y[n + i];
      const double u = y[d + i] - 0.5 * yi * pz;
      const double v = y[d + n + i] + 0.5 * xi * pz;
      dy[i] = u;
      dy[n + i] = v;
      dz += 0.5 * (xi * v - yi * u);
      dy[d + i] = -0.5 * v * pz;
      dy[d + n + i] = 0.5 * u * pz;
    }
    dy[2 * n] = dz;
    dy[d + 2 * n] = 0.0;
  };
}

// Ambient Hamiltonian systems for the curved models. Both conserve the
// constraint exactly at the ODE level; reprojection mops up roundoff.
ode::Rhs hopf_rhs(int dim) {
  return [dim](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const Eigen::VectorXd z = y.head(dim), p = y.tail(dim);
    const Eigen::VectorXd jz = apply_j(z);
    const double q = z.squaredNorm();
    const double a = p.dot(z), b = p.dot(jz);
    dy.resize(2 * dim);
    dy.head(dim) = p - (a * z + b * jz) / q;
    dy.tail(dim) = (a * p - b * apply_j(p)) / q - (a * a + b * b) * z / (q * q);
  };
}

ode::Rhs ads_rhs(int dim) {
  return [dim](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const Eigen::VectorXd g = ads_signature(dim);
    const Eigen::VectorXd z = y.head(dim), p = y.tail(dim);
    const Eigen::VectorXd jz = apply_j(z);
    const double q = indef_dot(z, z);
    const double a = p.dot(z), b = p.dot(jz);
    dy.resize(2 * dim);
    dy.head(dim) = (a * z + b * jz) / q - (g.array() * p.array()).matrix();
    dy.tail(dim) = -(a * p - b * apply_j(p)) / q + (a * a + b * b) * (g.array() * z.array()).matrix() / (q * q);
  };
}

void reproject(const ModelSpace& space, Eigen::VectorXd& y) {
  const int dim = space.chart_dim();
  auto z = y.head(dim);
  auto p = y.tail(dim);
  if (space.kind == SpaceKind::hopf) {
    z /= z.norm();
    p -= p.dot(z) * z;
  } else if (space.kind == SpaceKind::anti_de_sitter) {
    const double q = indef_dot(z, z);
    z /= std::sqrt(q);
    const Eigen::VectorXd g = ads_signature(dim);
    const double c = p.dot(z);  // q = 1 after renormalization
    p -= c * (g.array() * z.array()).matrix();
  }
}

}  // namespace

ModelSpace ModelSpace::heisenberg(int n) {
  if (n < 1) throw std::invalid_argument("half dimension n must be >= 1");
  return {SpaceKind::heisenberg, n, 0.0, 0.0};
}
ModelSpace ModelSpace::hopf(int n) {
  if (n < 1) throw std::invalid_argument("half dimension n must be >= 1");
  return {SpaceKind::hopf, n, 4.0, 1.0};
}
ModelSpace ModelSpace::anti_de_sitter(int n) {
  if (n < 1) throw std::invalid_argument("half dimension n must be >= 1");
  return {SpaceKind::anti_de_sitter, n, -4.0, -1.0};
}

double constraint_value(const ModelSpace& space, const Eigen::VectorXd& x) {
  switch (space.kind) {
    case SpaceKind::heisenberg:
      return 0.0;
    case SpaceKind::hopf:
      return x.squaredNorm() - 1.0;
    case SpaceKind::anti_de_sitter:
      return indef_dot(x, x) - 1.0;
  }
  return 0.0;
}

void validate_state(const ModelSpace& space, const PhaseState& state) {
  const int dim = space.chart_dim();
  if (state.x.size() != dim || state.p.size() != dim)
    throw std::invalid_argument("phase state size does not match the chart");
  if (!state.x.allFinite() || !state.p.allFinite())
    throw std::invalid_argument("phase state has non-finite entries");
  if (std::abs(constraint_value(space, state.x)) > kConstraintTol)
    throw std::domain_error("chart constraint violated beyond tolerance");
}

double hamiltonian(const ModelSpace& space, const PhaseState& state) {
  validate_state(space, state);
  const int n = space.half_dim;
  switch (space.kind) {
    case SpaceKind::heisenberg: {
      HeisenbergView hv(n);
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        const double u = hv.u(state, i), v = hv.v(state, i);
        acc += u * u + v * v;
      }
      return 0.5 * acc;
    }
    case SpaceKind::hopf: {
      const Eigen::VectorXd& z = state.x;
      const Eigen::VectorXd& p = state.p;
      const double q = z.squaredNorm();
      const double a = p.dot(z), b = p.dot(apply_j(z));
      return 0.5 * (p.squaredNorm() - (a * a + b * b) / q);
    }
    case SpaceKind::anti_de_sitter: {
      const Eigen::VectorXd& z = state.x;
      const Eigen::VectorXd& p = state.p;
      const double q = indef_dot(z, z);
      const double a = p.dot(z), b = p.dot(apply_j(z));
      const Eigen::VectorXd g = ads_signature(space.chart_dim());
      const double pgp = (p.array() * g.array() * p.array()).sum();
      return 0.5 * ((a * a + b * b) / q - pgp);
    }
  }
  return 0.0;
}

double reeb_momentum(const ModelSpace& space, const PhaseState& state) {
  validate_state(space, state);
  if (space.kind == SpaceKind::heisenberg) return state.p[2 * space.half_dim];
  return 2.0 * state.p.dot(apply_j(state.x));
}

Eigen::VectorXd reeb_field(const ModelSpace& space, const Eigen::VectorXd& x) {
  if (space.kind == SpaceKind::heisenberg) {
    Eigen::VectorXd v0 = Eigen::VectorXd::Zero(2 * space.half_dim + 1);
    v0[2 * space.half_dim] = 1.0;
    return v0;
  }
  return 2.0 * apply_j(x);
}

double contact_form(const ModelSpace& space, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& v) {
  const int n = space.half_dim;
  switch (space.kind) {
    case SpaceKind::heisenberg: {
      // dz - (1/2) sum x_i dy_i + (1/2) sum y_i dx_i
      double acc = v[2 * n];
      for (int i = 0; i < n; ++i) acc += 0.5 * (x[n + i] * v[i] - x[i] * v[n + i]);
      return acc;
    }
    case SpaceKind::hopf:
      return 0.5 * apply_j(x).dot(v);
    case SpaceKind::anti_de_sitter:
      return 0.5 * indef_dot(apply_j(x), v);
  }
  return 0.0;
}

double metric_pairing(const ModelSpace& space, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  const double av = contact_form(space, x, v);
  const double aw = contact_form(space, x, w);
  switch (space.kind) {
    case SpaceKind::heisenberg: {
      const int n = space.half_dim;
      return v.head(2 * n).dot(w.head(2 * n)) + av * aw;
    }
    case SpaceKind::hopf: {
      // Euclidean on the distribution, alpha0 x alpha0 transversally
      const Eigen::VectorXd jx = apply_j(x);
      const double q = x.squaredNorm();
      auto horiz = [&](const Eigen::VectorXd& u) {
        return (u - (u.dot(x) / q) * x - (u.dot(jx) / q) * jx).eval();
      };
      return horiz(v).dot(horiz(w)) + av * aw;
    }
    case SpaceKind::anti_de_sitter: {
      const Eigen::VectorXd jx = apply_j(x);
      const double q = indef_dot(x, x);
      auto horiz = [&](const Eigen::VectorXd& u) {
        return (u - (indef_dot(u, x) / q) * x - (indef_dot(u, jx) / q) * jx).eval();
      };
      return -indef_dot(horiz(v), horiz(w)) + av * aw;
    }
  }
  return 0.0;
}

Eigen::VectorXd complex_structure(const ModelSpace& space, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& v) {
  const int n = space.half_dim;
  switch (space.kind) {
    case SpaceKind::heisenberg: {
      // J X_i = Y_i, J Y_i = -X_i, J v0 = 0. Horizontal part of v has frame
      // coefficients equal to its (x, y) chart components.
      Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * n + 1);
      for (int i = 0; i < n; ++i) {
        out[i] = -v[n + i];
        out[n + i] = v[i];
      }
      // z-component so that out is horizontal-frame combination:
      // sum a_i X_i + b_i Y_i has z-part sum (-y_i a_i + x_i b_i)/2
      double zc = 0.0;
      for (int i = 0; i < n; ++i)
        zc += 0.5 * (-x[n + i] * out[i] + x[i] * out[n + i]);
      out[2 * n] = zc;
      return out;
    }
    case SpaceKind::hopf: {
      const Eigen::VectorXd jx = apply_j(x);
      const double q = x.squaredNorm();
      const Eigen::VectorXd h = v - (v.dot(x) / q) * x - (v.dot(jx) / q) * jx;
      return -apply_j(h);
    }
    case SpaceKind::anti_de_sitter: {
      const Eigen::VectorXd jx = apply_j(x);
      const double q = indef_dot(x, x);
      const Eigen::VectorXd h =
          v - (indef_dot(v, x) / q) * x - (indef_dot(v, jx) / q) * jx;
      return apply_j(h);
    }
  }
  return v;
}

Eigen::MatrixXd frame_vectors(const ModelSpace& space, const Eigen::VectorXd& x) {
  const int n = space.half_dim;
  const int dim = space.chart_dim();
  Eigen::MatrixXd frame(dim, 2 * n + 1);
  if (space.kind == SpaceKind::heisenberg) {
    frame.setZero();
    for (int i = 0; i < n; ++i) {
      frame(i, i) = 1.0;
      frame(2 * n, i) = -0.5 * x[n + i];  // X_i
      frame(n + i, n + i) = 1.0;
      frame(2 * n, n + i) = 0.5 * x[i];  // Y_i
    }
    frame(2 * n, 2 * n) = 1.0;  // v0
    return frame;
  }

  // Curved models: Gram-Schmidt a J-adapted horizontal frame under the
  // space metric, then append v0.
  std::vector<Eigen::VectorXd> basis;
  basis.reserve(2 * n);
  for (int cand = 0; cand < dim && static_cast<int>(basis.size()) < 2 * n; ++cand) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(dim, cand);
    // project out the constraint normal and the Reeb direction
    if (space.kind == SpaceKind::hopf) {
      const Eigen::VectorXd jx = apply_j(x);
      const double q = x.squaredNorm();
      v -= (v.dot(x) / q) * x + (v.dot(jx) / q) * jx;
    } else {
      const Eigen::VectorXd jx = apply_j(x);
      const double q = indef_dot(x, x);
      v -= (indef_dot(v, x) / q) * x + (indef_dot(v, jx) / q) * jx;
    }
    for (const auto& b : basis) v -= metric_pairing(space, x, v, b) * b;
    const double norm2 = metric_pairing(space, x, v, v);
    if (norm2 < 1e-8) continue;
    v /= std::sqrt(norm2);
    basis.push_back(v);
    if (static_cast<int>(basis.size()) < 2 * n)
      basis.push_back(complex_structure(space, x, v));
  }
  if (static_cast<int>(basis.size()) != 2 * n)
    throw std::runtime_error("failed to build a horizontal frame");
  // order as (X_1..X_n, Y_1..Y_n) with Y_i = J X_i
  for (int i = 0; i < n; ++i) {
    frame.col(i) = basis[2 * i];
    frame.col(n + i) = basis[2 * i + 1];
  }
  frame.col(2 * n) = reeb_field(space, x);
  return frame;
}

PhaseState covector_state(const ModelSpace& space, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& horizontal_coeffs, double u0) {
  const int n = space.half_dim;
  if (horizontal_coeffs.size() != 2 * n)
    throw std::invalid_argument("need 2n horizontal covector coefficients");
  const Eigen::MatrixXd frame = frame_vectors(space, x);
  PhaseState s;
  s.x = x;
  switch (space.kind) {
    case SpaceKind::heisenberg: {
      s.p = Eigen::VectorXd::Zero(2 * n + 1);
      for (int i = 0; i < n; ++i) {
        s.p[i] = horizontal_coeffs[i] + 0.5 * u0 * x[n + i];
        s.p[n + i] = horizontal_coeffs[n + i] - 0.5 * u0 * x[i];
      }
      s.p[2 * n] = u0;
      break;
    }
    case SpaceKind::hopf: {
      s.p = 0.5 * u0 * apply_j(x);
      for (int i = 0; i < 2 * n; ++i) s.p += horizontal_coeffs[i] * frame.col(i);
      break;
    }
    case SpaceKind::anti_de_sitter: {
      const Eigen::VectorXd g = ads_signature(space.chart_dim());
      Eigen::VectorXd vec = 0.5 * u0 * apply_j(x);
      for (int i = 0; i < 2 * n; ++i) vec -= horizontal_coeffs[i] * frame.col(i);
      s.p = (g.array() * vec.array()).matrix();
      break;
    }
  }
  return s;
}

GeodesicTrajectory geodesic_flow(const ModelSpace& space, const PhaseState& state,
                                 double T, const FlowOptions& options) {
  validate_state(space, state);
  if (!(T > 0.0)) throw std::invalid_argument("flow time T must be positive");
  const int steps = std::max(1, options.num_outputs);

  GeodesicTrajectory traj;
  traj.times.resize(steps + 1);
  for (int i = 0; i <= steps; ++i) traj.times[i] = T * i / steps;

  const bool exact = space.kind == SpaceKind::heisenberg &&
                     options.method != FlowMethod::numeric;
  if (exact) {
    for (double t : traj.times)
      traj.states.push_back(heisenberg_exact_flow(space.half_dim, state, t));
  } else {
    const int dim = space.chart_dim();
    Eigen::VectorXd y0(2 * dim);
    y0 << state.x, state.p;
    ode::Rhs rhs;
    ode::PostStep post;
    switch (space.kind) {
      case SpaceKind::heisenberg:
        rhs = heisenberg_rhs(space.half_dim);
        break;
      case SpaceKind::hopf:
        rhs = hopf_rhs(dim);
        post = [space](double, Eigen::VectorXd& y) { reproject(space, y); };
        break;
      case SpaceKind::anti_de_sitter:
        rhs = ads_rhs(dim);
        post = [space](double, Eigen::VectorXd& y) { reproject(space, y); };
        break;
    }
    traj.states.push_back(state);
    std::vector<double> targets(traj.times.begin() + 1, traj.times.end());
    ode::Options opt;
    opt.rtol = options.rtol;
    opt.atol = options.atol;
    ode::integrate(
        rhs, 0.0, y0, T, targets,
        [&](double, const Eigen::VectorXd& y) {
          traj.states.push_back({y.head(dim), y.tail(dim)});
        },
        opt, post);
  }

  const double h0 = hamiltonian(space, traj.states.front());
  const double u0 = reeb_momentum(space, traj.states.front());
  const double h_scale = std::max(std::abs(h0), 1e-12);
  const double u_scale = std::max(std::abs(u0), 1e-12);
  for (const auto& s : traj.states) {
    const double h = hamiltonian(space, s);
    const double u = reeb_momentum(space, s);
    traj.hamiltonian_values.push_back(h);
    traj.reeb_values.push_back(u);
    traj.max_hamiltonian_drift =
        std::max(traj.max_hamiltonian_drift, std::abs(h - h0) / h_scale);
    traj.max_reeb_drift = std::max(traj.max_reeb_drift, std::abs(u - u0) / u_scale);
    traj.max_constraint_drift = std::max(
        traj.max_constraint_drift, std::abs(constraint_value(space, s.x)));
  }
  if (traj.max_constraint_drift > 1e-8)
    throw std::runtime_error("chart constraint drifted beyond tolerance");
  return traj;
}

CurvatureMatrix curvature_matrix(const ModelSpace& space, const PhaseState& state) {
  const double two_h = 2.0 * hamiltonian(space, state);
  if (!(two_h > 0.0))
    throw std::domain_error("curvature matrix undefined without horizontal motion");
  const double u0 = reeb_momentum(space, state);
  const int n = space.half_dim;
  return CurvatureMatrix::diagonal(n, space.curv_k1 * two_h + u0 * u0,
                                   space.curv_k2 * two_h + 0.25 * u0 * u0);
}

std::pair<double, double> mcp_params(const ModelSpace& space, const PhaseState& state) {
  const double two_h = 2.0 * hamiltonian(space, state);
  const double u0 = reeb_momentum(space, state);
  return {space.curv_k1 * two_h + u0 * u0, space.curv_k2 * two_h + 0.25 * u0 * u0};
}

bool within_minimality_guard(const ModelSpace& space, double two_h, double u0) {
  if (!(two_h >= 0.0)) return false;
  const double k1 = space.curv_k1 * two_h + u0 * u0;
  const double k2 = space.curv_k2 * two_h + 0.25 * u0 * u0;
  // det B(t) stays positive on [0, 1) iff the model density has no zero
  // there: sqrt(k1) < 2 pi and sqrt(k2) < pi.
  return k1 < 4.0 * kPi * kPi && k2 < kPi * kPi;
}

CurvatureProfile user_curvature_profile(const TangentCurvatureFn& fn,
                                        const Eigen::VectorXd& unit_horizontal,
                                        double u0, int n) {
  CurvatureMatrix r = fn(unit_horizontal, u0);
  if (r.half_dim != n)
    throw std::invalid_argument("curvature callback returned wrong half_dim");
  r.validate();
  return CurvatureProfile::make_constant(std::move(r));
}

CurvatureProfile user_curvature_profile(
    const TangentCurvatureFn& fn,
    const std::function<Eigen::VectorXd(double)>& direction, double u0, int n) {
  CurvatureProfile p;
  p.half_dim = n;
  p.constant = false;
  p.eval = [fn, direction, u0, n](double t) {
    CurvatureMatrix r = fn(direction(t), u0);
    if (r.half_dim != n)
      throw std::invalid_argument("curvature callback returned wrong half_dim");
    r.validate();
    return r;
  };
  return p;
}

}  // namespace mcp
