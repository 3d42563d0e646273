#include "mcp/verify.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <thread>

#include "mcp/rng.hpp"

namespace mcp {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kIneqTol = 1e-8;

std::string space_name(const ModelSpace& space) {
  switch (space.kind) {
    case SpaceKind::heisenberg:
      return "heisenberg";
    case SpaceKind::hopf:
      return "hopf";
    case SpaceKind::anti_de_sitter:
      return "anti_de_sitter";
  }
  return "?";
}

Eigen::VectorXd sample_base_point(const ModelSpace& space, const CounterRng& rng,
                                  std::uint64_t counter) {
  const int n = space.half_dim;
  switch (space.kind) {
    case SpaceKind::heisenberg: {
      Eigen::VectorXd x(2 * n + 1);
      for (int i = 0; i < 2 * n + 1; ++i) x[i] = 0.5 * rng.normal(counter, 100 + i);
      return x;
    }
    case SpaceKind::hopf: {
      Eigen::VectorXd z(2 * n + 2);
      for (int i = 0; i < 2 * n + 2; ++i) z[i] = rng.normal(counter, 100 + i);
      z /= z.norm();
      return z;
    }
    case SpaceKind::anti_de_sitter: {
      Eigen::VectorXd z(2 * n + 2);
      double ssq = 0.0;
      for (int i = 0; i < 2 * n; ++i) {
        z[i] = 0.3 * rng.normal(counter, 100 + i);
        ssq += z[i] * z[i];
      }
      const double r = std::sqrt(1.0 + ssq);
      const double phi = rng.uniform(counter, 130, 0.0, 2.0 * kPi);
      z[2 * n] = r * std::cos(phi);
      z[2 * n + 1] = r * std::sin(phi);
      return z;
    }
  }
  return {};
}

struct CovectorSample {
  PhaseState state;
  double d = 0.0;
  double u0 = 0.0;
  int rejections = 0;
};

// Draws (base point, direction, distance, Reeb momentum) until the covector
// passes the pre-cut minimality guard; rejected attempts are counted.
CovectorSample sample_covector(const ModelSpace& space, const CounterRng& rng,
                               std::uint64_t counter, const SweepOptions& opt) {
  const int n = space.half_dim;
  CovectorSample out;
  for (int attempt = 0; attempt < 256; ++attempt) {
    const std::uint64_t base = 1000 * static_cast<std::uint64_t>(attempt);
    const double d = rng.uniform(counter, base + 1, opt.d_min, opt.d_max);
    const double u_cap = 2.0 * kPi * opt.guard_margin;
    const double u0 = rng.uniform(counter, base + 2, -u_cap, u_cap);
    const double two_h = d * d;
    const double k1 = space.curv_k1 * two_h + u0 * u0;
    const double k2 = space.curv_k2 * two_h + 0.25 * u0 * u0;
    const double m2 = opt.guard_margin * opt.guard_margin;
    if (!(k1 < 4.0 * kPi * kPi * m2 && k2 < kPi * kPi * m2)) {
      ++out.rejections;
      continue;
    }
    Eigen::VectorXd dir(2 * n);
    for (int i = 0; i < 2 * n; ++i) dir[i] = rng.normal(counter, base + 10 + i);
    dir.normalize();
    const Eigen::VectorXd x = sample_base_point(space, rng, counter);
    out.state = covector_state(space, x, d * dir, u0);
    out.d = d;
    out.u0 = u0;
    return out;
  }
  throw std::runtime_error("covector sampler exhausted its attempt budget");
}

void flow_diagnostics(const ModelSpace& space, const PhaseState& state,
                      ContractionReport& report) {
  FlowOptions fopt;
  fopt.method = FlowMethod::numeric;
  fopt.num_outputs = 16;
  GeodesicTrajectory traj = geodesic_flow(space, state, 1.0, fopt);
  report.max_hamiltonian_drift =
      std::max(report.max_hamiltonian_drift, traj.max_hamiltonian_drift);
  report.max_reeb_drift = std::max(report.max_reeb_drift, traj.max_reeb_drift);
  const Eigen::MatrixXd r0 = curvature_matrix(space, traj.states.front()).assemble();
  const double scale = 1.0 + r0.cwiseAbs().maxCoeff();
  for (const auto& s : traj.states) {
    const Eigen::MatrixXd r = curvature_matrix(space, s).assemble();
    report.max_curvature_drift = std::max(
        report.max_curvature_drift, (r - r0).cwiseAbs().maxCoeff() / scale);
  }
}

struct McAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
  }
};

// Deterministic parallel reduction: samples are partitioned into fixed
// chunks, each chunk is summed in index order, and chunks are combined in
// chunk order, so the result is independent of the thread count.
McAccumulator parallel_mc(int sample_count, int threads,
                          const std::function<double(std::uint64_t)>& value) {
  const int n_chunks = 256;
  std::vector<McAccumulator> chunk_acc(n_chunks);
  std::atomic<int> next_chunk{0};
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n_chunks));
  auto worker = [&] {
    for (;;) {
      const int c = next_chunk.fetch_add(1);
      if (c >= n_chunks) return;
      const std::uint64_t lo = static_cast<std::uint64_t>(c) * sample_count / n_chunks;
      const std::uint64_t hi =
          static_cast<std::uint64_t>(c + 1) * sample_count / n_chunks;
      McAccumulator acc;
      for (std::uint64_t i = lo; i < hi; ++i) acc.add(value(i));
      chunk_acc[c] = acc;
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  McAccumulator total;
  for (const auto& acc : chunk_acc) {
    total.sum += acc.sum;
    total.sum_sq += acc.sum_sq;
  }
  return total;
}

double ball_volume(int dim, double radius) {
  // pi^{d/2} / Gamma(d/2 + 1) * r^d
  return std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0) *
         std::pow(radius, dim);
}

}  // namespace

ContractionRow contraction_profile(const ModelSpace& space, const PhaseState& state,
                                   std::span<const double> grid) {
  ContractionRow row;
  row.two_h = 2.0 * hamiltonian(space, state);
  row.u0 = reeb_momentum(space, state);
  std::tie(row.k1, row.k2) = mcp_params(space, state);

  const auto profile = CurvatureProfile::make_constant(curvature_matrix(space, state));
  RiccatiSolution sol = solve_riccati_terminal(profile, space.half_dim, grid);
  row.measured = sol.det_b;
  row.predicted.reserve(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    row.predicted.push_back(model_density(space.half_dim, row.k1, row.k2, grid[i]));
    const double dev = std::abs(row.measured[i] - row.predicted[i]);
    row.max_abs_deviation = std::max(row.max_abs_deviation, dev);
    if (row.measured[i] < row.predicted[i] - kIneqTol) ++row.violations;
  }
  return row;
}

ContractionReport equality_sweep(const ModelSpace& space, int sample_count,
                                 std::span<const double> grid, std::uint64_t seed,
                                 const SweepOptions& options) {
  CounterRng rng(seed);
  ContractionReport report;
  report.space = space_name(space);
  report.mode = "equality";
  report.grid.assign(grid.begin(), grid.end());
  report.seed = seed;
  report.sample_count = sample_count;

  double acc_measured = 0.0, acc_predicted = 0.0;
  for (int i = 0; i < sample_count; ++i) {
    CovectorSample cv = sample_covector(space, rng, i, options);
    report.rejected += cv.rejections;
    ContractionRow row = contraction_profile(space, cv.state, grid);
    report.max_abs_deviation =
        std::max(report.max_abs_deviation, row.max_abs_deviation);
    for (size_t j = 0; j < grid.size(); ++j) {
      acc_measured += row.measured[j];
      acc_predicted += row.predicted[j];
    }
    if (options.check_flow) flow_diagnostics(space, cv.state, report);
    report.rows.push_back(std::move(row));
  }
  const double cells = static_cast<double>(sample_count) * grid.size();
  report.aggregate_measured = acc_measured / cells;
  report.aggregate_predicted = acc_predicted / cells;
  return report;
}

ContractionReport mcp_inequality_check(const ModelSpace& space, double k1,
                                       double k2, int sample_count,
                                       std::span<const double> grid,
                                       std::uint64_t seed,
                                       const SweepOptions& options) {
  CounterRng rng(seed);
  ContractionReport report;
  report.space = space_name(space);
  report.mode = "inequality";
  report.grid.assign(grid.begin(), grid.end());
  report.seed = seed;
  report.sample_count = sample_count;

  ComparisonParams params{k1, k2, 2 * space.half_dim + 1};
  double acc_measured = 0.0, acc_predicted = 0.0;
  for (int i = 0; i < sample_count; ++i) {
    CovectorSample cv = sample_covector(space, rng, i, options);
    report.rejected += cv.rejections;

    const auto profile =
        CurvatureProfile::make_constant(curvature_matrix(space, cv.state));
    RiccatiSolution sol = solve_riccati_terminal(profile, space.half_dim, grid);

    ContractionRow row;
    row.two_h = cv.d * cv.d;
    row.u0 = cv.u0;
    row.k1 = k1;
    row.k2 = k2;
    row.measured = sol.det_b;
    for (size_t j = 0; j < grid.size(); ++j) {
      const double pred = density_factor(params, cv.d * cv.d, grid[j]);
      row.predicted.push_back(pred);
      row.max_abs_deviation =
          std::max(row.max_abs_deviation, std::abs(row.measured[j] - pred));
      if (row.measured[j] < pred - kIneqTol) ++row.violations;
      acc_measured += row.measured[j];
      acc_predicted += pred;
    }
    report.violations += row.violations;
    report.rows.push_back(std::move(row));
  }
  const double cells = static_cast<double>(sample_count) * grid.size();
  report.aggregate_measured = acc_measured / cells;
  report.aggregate_predicted = acc_predicted / cells;
  return report;
}

ContractionReport mcp_inequality_check(const CurvatureProfile& profile, int n,
                                       double k1, double k2,
                                       std::span<const double> grid) {
  TraceComparisonReport tr = verify_trace_comparison(profile, n, k1, k2, grid);
  ContractionReport report;
  report.space = "profile";
  report.mode = "inequality";
  report.grid = tr.grid;
  report.sample_count = 1;
  report.violations = tr.det_violations + tr.trace_violations;
  ContractionRow row;
  row.k1 = k1;
  row.k2 = k2;
  row.measured = tr.det_b;
  row.predicted = tr.det_bound;
  for (size_t i = 0; i < tr.grid.size(); ++i) {
    row.max_abs_deviation = std::max(
        row.max_abs_deviation, std::abs(row.measured[i] - row.predicted[i]));
    if (row.measured[i] < row.predicted[i] - kIneqTol) ++row.violations;
  }
  report.max_abs_deviation = row.max_abs_deviation;
  double am = 0.0, ap = 0.0;
  for (size_t i = 0; i < tr.grid.size(); ++i) {
    am += row.measured[i];
    ap += row.predicted[i];
  }
  report.aggregate_measured = am / tr.grid.size();
  report.aggregate_predicted = ap / tr.grid.size();
  report.rows.push_back(std::move(row));
  return report;
}

double exp_jacobian_det(const ModelSpace& space, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& coeffs, double u0) {
  const int n = space.half_dim;
  const int np = 2 * n + 1;
  Eigen::VectorXd params(np);
  params.head(2 * n) = coeffs;
  params[2 * n] = u0;

  FlowOptions fopt;
  fopt.num_outputs = 1;
  auto endpoint = [&](const Eigen::VectorXd& c) {
    PhaseState s = covector_state(space, x, c.head(2 * n), c[2 * n]);
    return geodesic_flow(space, s, 1.0, fopt).states.back().x;
  };

  Eigen::MatrixXd jac(space.chart_dim(), np);
  for (int k = 0; k < np; ++k) {
    const double h = 1e-5 * (1.0 + std::abs(params[k]));
    Eigen::VectorXd cp = params, cm = params;
    cp[k] += h;
    cm[k] -= h;
    jac.col(k) = (endpoint(cp) - endpoint(cm)) / (2.0 * h);
  }
  if (jac.rows() != np)
    throw std::invalid_argument("exponential Jacobian needs a square chart");
  return std::abs(jac.determinant());
}

DoublingReport doubling_check(const ModelSpace& space, double radius,
                              int sample_count, std::uint64_t seed, int threads) {
  if (space.kind != SpaceKind::heisenberg)
    throw std::invalid_argument("doubling_check is specified on the Heisenberg group");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  const int n = space.half_dim;
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(2 * n + 1);

  auto estimate = [&](double r_ball, std::uint64_t stream) {
    CounterRng rng(seed, stream);
    auto value = [&, r_ball](std::uint64_t i) {
      Eigen::VectorXd dir(2 * n);
      for (int k = 0; k < 2 * n; ++k) dir[k] = rng.normal(i, k);
      dir.normalize();
      const double frac = rng.uniform(i, 40);
      const double r = r_ball * std::pow(frac, 1.0 / (2 * n));
      const double u0 = rng.uniform(i, 41, -2.0 * kPi, 2.0 * kPi);
      return exp_jacobian_det(space, origin, r * dir, u0);
    };
    McAccumulator acc = parallel_mc(sample_count, threads, value);
    const double mean = acc.sum / sample_count;
    const double var =
        std::max(0.0, acc.sum_sq / sample_count - mean * mean);
    const double measure = ball_volume(2 * n, r_ball) * 4.0 * kPi;
    const double rel_std = std::sqrt(var / sample_count) / mean;
    return std::pair<double, double>{measure * mean, rel_std};
  };

  const auto [vol_r, rel1] = estimate(radius, 1);
  const auto [vol_2r, rel2] = estimate(2.0 * radius, 2);

  DoublingReport rep;
  rep.half_dim = n;
  rep.radius = radius;
  rep.seed = seed;
  rep.sample_count = sample_count;
  rep.vol_r = vol_r;
  rep.vol_2r = vol_2r;
  rep.ratio = vol_2r / vol_r;
  rep.expected_ratio = std::pow(2.0, 2 * n + 2);
  rep.rel_error = std::abs(rep.ratio / rep.expected_ratio - 1.0);
  rep.mc_rel_std = std::sqrt(rel1 * rel1 + rel2 * rel2);
  return rep;
}

}  // namespace mcp
