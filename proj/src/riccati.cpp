#include "mcp/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcp/ode.hpp"

namespace mcp {
namespace {

constexpr double kMaxGridTime = 1.0 - 1e-6;

struct FrameOde {
  // State layout: [A (m*m), B (m*m)] row-major via Eigen::Map.
  int m;
  Eigen::MatrixXd c1, c2;
  const CurvatureProfile* profile;
  bool reversed;  // reversed: R~(tau) = R(1 - tau), equations of the proof
  mutable Eigen::MatrixXd r_cache;
  bool r_cached = false;

  FrameOde(int n, const CurvatureProfile* p, bool rev)
      : m(2 * n + 1), profile(p), reversed(rev) {
    auto sm = build_structure_matrices(n);
    c1 = std::move(sm.c1);
    c2 = std::move(sm.c2);
    if (profile && profile->constant) {
      r_cache = profile->assembled(0.0);
      r_cached = true;
    }
  }

  Eigen::MatrixXd curvature(double t) const {
    if (r_cached) return r_cache;
    return profile->assembled(reversed ? 1.0 - t : t);
  }

  void operator()(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) const {
    using MapC = Eigen::Map<const Eigen::MatrixXd>;
    using Map = Eigen::Map<Eigen::MatrixXd>;
    MapC a(y.data(), m, m), b(y.data() + m * m, m, m);
    dy.resize(2 * m * m);
    Map da(dy.data(), m, m), db(dy.data() + m * m, m, m);
    const Eigen::MatrixXd r = curvature(t);
    if (reversed) {
      da = a * c1 - b * r;
      db = a * c2 - b * c1.transpose();
    } else {
      da = -a * c1 + b * r;
      db = -a * c2 + b * c1.transpose();
    }
  }
};

Eigen::VectorXd pack(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const int m = static_cast<int>(a.rows());
  Eigen::VectorXd y(2 * m * m);
  Eigen::Map<Eigen::MatrixXd>(y.data(), m, m) = a;
  Eigen::Map<Eigen::MatrixXd>(y.data() + m * m, m, m) = b;
  return y;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> unpack(const Eigen::VectorXd& y, int m) {
  return {Eigen::Map<const Eigen::MatrixXd>(y.data(), m, m),
          Eigen::Map<const Eigen::MatrixXd>(y.data() + m * m, m, m)};
}

double log_abs_det(const Eigen::MatrixXd& mat, double* sign = nullptr) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(mat);
  double s = lu.permutationP().determinant() > 0 ? 1.0 : -1.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    const double d = lu.matrixLU()(i, i);
    if (d == 0.0) {
      if (sign) *sign = 0.0;
      return -std::numeric_limits<double>::infinity();
    }
    if (d < 0) s = -s;
    acc += std::log(std::abs(d));
  }
  if (sign) *sign = s;
  return acc;
}

double signed_det(const Eigen::MatrixXd& mat) {
  return Eigen::PartialPivLU<Eigen::MatrixXd>(mat).determinant();
}

void check_grid(std::span<const double> grid, double upper) {
  if (grid.empty()) throw std::invalid_argument("empty time grid");
  double prev = -1.0;
  for (double t : grid) {
    if (!(t >= 0.0) || !(t <= upper))
      throw std::invalid_argument("grid time outside [0, " + std::to_string(upper) + "]");
    if (!(t > prev)) throw std::invalid_argument("grid must be strictly increasing");
    prev = t;
  }
}

ode::Options riccati_options() {
  ode::Options opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-12;
  return opt;
}

// Locates a zero of det B between two recorded steps by bisection,
// re-integrating from the bracket's left state each time.
double bisect_det_zero(const FrameOde& sys, const ode::StepRecord& lo_rec,
                       double t_hi) {
  const int m = sys.m;
  ode::Options opt = riccati_options();
  double t_lo = lo_rec.t;
  auto det_at = [&](double t) {
    if (t <= t_lo + 1e-15) return signed_det(unpack(lo_rec.y, m).second);
    Eigen::VectorXd y = ode::integrate(std::cref(sys), t_lo, lo_rec.y, t, {}, {}, opt);
    return signed_det(unpack(y, m).second);
  };
  double f_lo = det_at(t_lo);
  double a = t_lo, b = t_hi;
  for (int it = 0; it < 200 && (b - a) > 1e-10 * std::max(1.0, b); ++it) {
    const double mid = 0.5 * (a + b);
    const double f_mid = det_at(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0) == (f_lo > 0)) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

StructureMatrices build_structure_matrices(int n) {
  if (n < 1) throw std::invalid_argument("half dimension n must be >= 1");
  const int m = 2 * n + 1;
  StructureMatrices sm;
  sm.half_dim = n;
  sm.c1 = Eigen::MatrixXd::Zero(m, m);
  sm.c1(0, 1) = 1.0;
  sm.c2 = Eigen::MatrixXd::Identity(m, m);
  sm.c2(0, 0) = 0.0;
  return sm;
}

void CurvatureMatrix::validate() const {
  if (half_dim < 1) throw std::invalid_argument("curvature: half_dim must be >= 1");
  const int c = 2 * half_dim - 2;
  if (r_cb.size() != c || r_cc.rows() != c || r_cc.cols() != c)
    throw std::invalid_argument("curvature: block sizes do not match half_dim");
  if (!std::isfinite(r_bb))
    throw std::invalid_argument("curvature: non-finite entries");
  if (c > 0) {
    if (!r_cb.allFinite() || !r_cc.allFinite())
      throw std::invalid_argument("curvature: non-finite entries");
    const double scale = 1.0 + r_cc.cwiseAbs().maxCoeff();
    if ((r_cc - r_cc.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
      throw std::invalid_argument("curvature: r_cc block is not symmetric");
  }
}

Eigen::MatrixXd CurvatureMatrix::assemble() const {
  validate();
  const int m = 2 * half_dim + 1;
  const int c = 2 * half_dim - 2;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
  r(1, 1) = r_bb;
  if (c > 0) {
    r.block(1, 2, 1, c) = r_cb;
    r.block(2, 1, c, 1) = r_cb.transpose();
    Eigen::MatrixXd sym = 0.5 * (r_cc + r_cc.transpose());
    r.block(2, 2, c, c) = sym;
  }
  return r;
}

CurvatureMatrix CurvatureMatrix::diagonal(int n, double k1, double k2) {
  CurvatureMatrix r;
  r.half_dim = n;
  r.r_bb = k1;
  r.r_cb = Eigen::RowVectorXd::Zero(2 * n - 2);
  r.r_cc = k2 * Eigen::MatrixXd::Identity(2 * n - 2, 2 * n - 2);
  return r;
}

CurvatureProfile CurvatureProfile::make_constant(CurvatureMatrix r) {
  r.validate();
  CurvatureProfile p;
  p.half_dim = r.half_dim;
  p.constant = true;
  p.eval = [r = std::move(r)](double) { return r; };
  return p;
}

Eigen::MatrixXd CurvatureProfile::assembled(double t) const {
  if (!eval) throw std::invalid_argument("curvature profile has no evaluator");
  CurvatureMatrix r = eval(t);
  if (r.half_dim != half_dim)
    throw std::invalid_argument("curvature profile evaluator changed half_dim");
  return r.assemble();
}

RiccatiSolution solve_riccati_terminal(const CurvatureProfile& profile, int n,
                                       std::span<const double> grid) {
  check_grid(grid, kMaxGridTime);
  FrameOde sys(n, &profile, /*reversed=*/true);
  const int m = sys.m;

  // Reversed times tau = 1 - t, ascending; tau = 1 recovers t = 0 and the
  // det B normalization.
  std::vector<double> taus;
  taus.reserve(grid.size() + 1);
  for (auto it = grid.rbegin(); it != grid.rend(); ++it) taus.push_back(1.0 - *it);
  if (taus.empty() || taus.back() < 1.0) taus.push_back(1.0);

  std::vector<Eigen::VectorXd> states(taus.size());
  size_t idx = 0;
  auto observer = [&](double, const Eigen::VectorXd& y) { states[idx++] = y; };

  Eigen::VectorXd y0 =
      pack(Eigen::MatrixXd::Identity(m, m), Eigen::MatrixXd::Zero(m, m));

  std::vector<ode::StepRecord> steps;
  ode::integrate(std::cref(sys), 0.0, std::move(y0), 1.0, taus, observer,
                 riccati_options(), {}, &steps);

  // det B~ must stay positive on (0, 1]; a sign change marks a conjugate
  // point of the contraction at t = 1 - tau.
  double ref_sign = 0.0;
  for (size_t i = 1; i < steps.size(); ++i) {
    const double det = signed_det(unpack(steps[i].y, m).second);
    if (det == 0.0 || (ref_sign != 0.0 && (det > 0) != (ref_sign > 0))) {
      const double tau_zero = bisect_det_zero(sys, steps[i - 1], steps[i].t);
      throw conjugate_point_error(
          "conjugate point encountered inside the contraction interval",
          1.0 - tau_zero);
    }
    if (ref_sign == 0.0 && det != 0.0) ref_sign = det;
  }

  const auto [a_end, b_end] = unpack(states.back(), m);
  double sign_end = 0.0;
  const double log_det_end = log_abs_det(b_end, &sign_end);
  if (!(sign_end > 0.0))
    throw conjugate_point_error("frame determinant not positive at t = 0", 0.0);

  RiccatiSolution sol;
  sol.half_dim = n;
  sol.grid.assign(grid.begin(), grid.end());
  const size_t ng = grid.size();
  sol.s_values.resize(ng);
  sol.trace_c2s.resize(ng);
  sol.det_b.resize(ng);
  sol.log_det_b.resize(ng);

  for (size_t j = 0; j < ng; ++j) {
    // grid index j corresponds to tau index ng - 1 - j
    const auto [a, b] = unpack(states[ng - 1 - j], m);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    Eigen::MatrixXd s = lu.solve(a);
    const double scale = 1.0 + s.cwiseAbs().maxCoeff();
    sol.max_asymmetry = std::max(
        sol.max_asymmetry, (s - s.transpose()).cwiseAbs().maxCoeff() / scale);
    s = 0.5 * (s + s.transpose()).eval();
    sol.s_values[j] = s;
    sol.trace_c2s[j] = s.diagonal().tail(m - 1).sum();
    double sign_b = 0.0;
    const double ld = log_abs_det(unpack(states[ng - 1 - j], m).second, &sign_b);
    if (!(sign_b > 0.0))
      throw conjugate_point_error("det B changed sign on the grid", grid[j]);
    sol.log_det_b[j] = ld - log_det_end;
    sol.det_b[j] = std::exp(sol.log_det_b[j]);
  }
  return sol;
}

std::vector<std::pair<double, double>> volume_distortion(const RiccatiSolution& sol) {
  std::vector<std::pair<double, double>> out;
  out.reserve(sol.grid.size());
  for (size_t i = 0; i < sol.grid.size(); ++i)
    out.emplace_back(sol.grid[i], sol.det_b[i]);
  return out;
}

std::vector<double> FrameSolution::det_b() const {
  std::vector<double> d;
  d.reserve(b_values.size());
  for (const auto& b : b_values) d.push_back(signed_det(b));
  return d;
}

FrameSolution solve_frame_forward(const CurvatureProfile& profile, int n,
                                  const Eigen::MatrixXd& a0,
                                  const Eigen::MatrixXd& b0,
                                  std::span<const double> grid) {
  const int m = 2 * n + 1;
  if (a0.rows() != m || a0.cols() != m || b0.rows() != m || b0.cols() != m)
    throw std::invalid_argument("frame initial matrices must be (2n+1) square");
  check_grid(grid, 1.0);
  FrameOde sys(n, &profile, /*reversed=*/false);

  FrameSolution sol;
  sol.half_dim = n;
  auto observer = [&](double t, const Eigen::VectorXd& y) {
    auto [a, b] = unpack(y, m);
    sol.grid.push_back(t);
    sol.a_values.push_back(std::move(a));
    sol.b_values.push_back(std::move(b));
  };

  std::vector<double> targets(grid.begin(), grid.end());
  if (targets.front() == 0.0) {
    observer(0.0, pack(a0, b0));
    targets.erase(targets.begin());
  }
  if (!targets.empty())
    ode::integrate(std::cref(sys), 0.0, pack(a0, b0), targets.back(), targets,
                   observer, riccati_options());
  return sol;
}

std::optional<double> detect_conjugate_time(const CurvatureProfile& profile,
                                            int n, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  const int m = 2 * n + 1;
  FrameOde sys(n, &profile, /*reversed=*/false);
  Eigen::VectorXd y0 =
      pack(Eigen::MatrixXd::Identity(m, m), Eigen::MatrixXd::Zero(m, m));
  std::vector<ode::StepRecord> steps;
  ode::integrate(std::cref(sys), 0.0, std::move(y0), horizon, {}, {},
                 riccati_options(), {}, &steps);

  // det B(0) = 0 by construction; track the sign once it leaves zero.
  double ref_sign = 0.0;
  for (size_t i = 1; i < steps.size(); ++i) {
    const double det = signed_det(unpack(steps[i].y, m).second);
    if (ref_sign == 0.0) {
      if (det != 0.0) ref_sign = det;
      continue;
    }
    if (det == 0.0 || (det > 0) != (ref_sign > 0))
      return bisect_det_zero(sys, steps[i - 1], steps[i].t);
  }
  return std::nullopt;
}

double model_density(int n, double k1, double k2, double t) {
  ComparisonParams params{k1, k2, 2 * n + 1};
  return density_factor(params, 1.0, t);
}

TraceComparisonReport verify_trace_comparison(const CurvatureProfile& profile,
                                              int n, double k1, double k2,
                                              std::span<const double> grid) {
  constexpr double kTol = 1e-8;
  RiccatiSolution sol = solve_riccati_terminal(profile, n, grid);

  TraceComparisonReport rep;
  rep.grid = sol.grid;
  rep.trace_c2s = sol.trace_c2s;
  rep.det_b = sol.det_b;

  const int c = 2 * n - 2;
  for (double t : rep.grid) {
    const CurvatureMatrix r = profile.eval(t);
    const double tr_cc = (c > 0) ? r.r_cc.trace() : 0.0;
    if (r.r_bb < k1 - kTol || tr_cc < c * k2 - kTol) rep.precondition_ok = false;
  }

  for (size_t i = 0; i < rep.grid.size(); ++i) {
    const double t = rep.grid[i];
    const double bound =
        trace_bound_b(k1, t) + trace_bound_c(k2, t, c) + trace_bound_last(t);
    rep.trace_bound.push_back(bound);
    const double dbound = model_density(n, k1, k2, t);
    rep.det_bound.push_back(dbound);
    rep.max_trace_excess = std::max(rep.max_trace_excess, rep.trace_c2s[i] - bound);
    rep.max_det_deficit = std::max(rep.max_det_deficit, dbound - rep.det_b[i]);
    if (rep.trace_c2s[i] > bound + kTol) ++rep.trace_violations;
    if (rep.det_b[i] < dbound - kTol) ++rep.det_violations;
  }
  return rep;
}

Eigen::MatrixXd riccati_u_matrix(const CurvatureProfile& profile, int n, double tau) {
  if (!(tau > 0.0) || !(tau <= 1.0))
    throw std::invalid_argument("tau must lie in (0, 1]");
  FrameOde sys(n, &profile, /*reversed=*/true);
  const int m = sys.m;
  Eigen::VectorXd y0 =
      pack(Eigen::MatrixXd::Identity(m, m), Eigen::MatrixXd::Zero(m, m));
  Eigen::VectorXd y = ode::integrate(std::cref(sys), 0.0, std::move(y0), tau,
                                     {}, {}, riccati_options());
  auto [a, b] = unpack(y, m);
  Eigen::MatrixXd u = Eigen::PartialPivLU<Eigen::MatrixXd>(a).solve(b);
  return 0.5 * (u + u.transpose());
}

Eigen::MatrixXd riccati_s_at(const CurvatureProfile& profile, int n, double t) {
  const double grid[1] = {t};
  return solve_riccati_terminal(profile, n, grid).s_values.front();
}

std::vector<double> cumulative_integral(std::span<const double> times,
                                        std::span<const double> values) {
  const size_t n = times.size();
  if (values.size() != n || n < 2)
    throw std::invalid_argument("cumulative_integral: need matching grids, n >= 2");
  // Integrate the parabola through three neighboring samples over each
  // subinterval; average the two fits interior intervals admit.
  auto segment = [&](size_t i0, size_t i1, size_t i2, double a, double b) {
    const double t0 = times[i0], t1 = times[i1], t2 = times[i2];
    const double f0 = values[i0], f1 = values[i1], f2 = values[i2];
    const double c1 = (f1 - f0) / (t1 - t0);
    const double c2 = ((f2 - f1) / (t2 - t1) - c1) / (t2 - t0);
    auto anti = [&](double x) {
      // antiderivative of the Newton form f0 + c1 (x-t0) + c2 (x-t0)(x-t1)
      const double u = x - t0;
      return f0 * u + c1 * u * u / 2.0 +
             c2 * (u * u * u / 3.0 - (t1 - t0) * u * u / 2.0);
    };
    return anti(b) - anti(a);
  };

  std::vector<double> out(n, 0.0);
  for (size_t i = 0; i + 1 < n; ++i) {
    double inc;
    if (i == 0) {
      inc = segment(0, 1, 2, times[0], times[1]);
    } else if (i + 2 >= n) {
      inc = segment(i - 1, i, i + 1, times[i], times[i + 1]);
    } else {
      const double left = segment(i - 1, i, i + 1, times[i], times[i + 1]);
      const double right = segment(i, i + 1, i + 2, times[i], times[i + 1]);
      inc = 0.5 * (left + right);
    }
    out[i + 1] = out[i] + inc;
  }
  return out;
}

}  // namespace mcp
