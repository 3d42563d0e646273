#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mcp/riccati.hpp"

using namespace mcp;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> uniform_grid(double t_max, int steps, bool include_zero = true) {
  std::vector<double> g;
  for (int i = include_zero ? 0 : 1; i <= steps; ++i) g.push_back(t_max * i / steps);
  return g;
}

CurvatureProfile flat_profile(int n) {
  return CurvatureProfile::make_constant(CurvatureMatrix::diagonal(n, 0.0, 0.0));
}

// Random constant curvature in the canonical block form with the cc block's
// spectrum inside [-bound, bound].
CurvatureMatrix random_curvature(int n, std::mt19937& gen, double bound) {
  std::uniform_real_distribution<double> u(-bound, bound);
  std::normal_distribution<double> nz(0.0, 0.5);
  const int c = 2 * n - 2;
  CurvatureMatrix r;
  r.half_dim = n;
  r.r_bb = u(gen);
  r.r_cb = Eigen::RowVectorXd::Zero(c);
  for (int i = 0; i < c; ++i) r.r_cb[i] = nz(gen);
  if (c > 0) {
    Eigen::MatrixXd a(c, c);
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < c; ++j) a(i, j) = nz(gen);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd evals(c);
    for (int i = 0; i < c; ++i) evals[i] = u(gen);
    r.r_cc = q * evals.asDiagonal() * q.transpose();
    r.r_cc = 0.5 * (r.r_cc + r.r_cc.transpose()).eval();
  } else {
    r.r_cc = Eigen::MatrixXd::Zero(0, 0);
  }
  return r;
}

double max_scaled_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = 1.0 + std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("structure matrices") {
  const auto sm1 = build_structure_matrices(1);
  CHECK(sm1.c1.rows() == 3);
  CHECK(sm1.c1(0, 1) == 1.0);
  CHECK(sm1.c1.cwiseAbs().sum() == 1.0);
  CHECK(sm1.c2.diagonal().transpose() == Eigen::RowVector3d(0, 1, 1));

  const auto sm2 = build_structure_matrices(2);
  CHECK(sm2.c2.rows() == 5);
  CHECK(sm2.c2.diagonal().sum() == 4.0);

  for (int n : {1, 2, 3, 5}) {
    const auto sm = build_structure_matrices(n);
    CHECK((sm.c1 * sm.c2 - sm.c1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((sm.c2 * sm.c1.transpose() - sm.c1.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((sm.c2 - sm.c2 * sm.c2).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(build_structure_matrices(0), std::invalid_argument);
}

TEST_CASE("flat Riccati closed form") {
  for (int n : {1, 2, 3}) {
    const auto grid = uniform_grid(0.99, 99);
    const RiccatiSolution sol = solve_riccati_terminal(flat_profile(n), n, grid);
    for (size_t i = 0; i < grid.size(); ++i) {
      const double t = grid[i];
      const double expect_trace = (2.0 * n + 3.0) / (1.0 - t);
      CHECK(std::abs(sol.trace_c2s[i] - expect_trace) / expect_trace < 1e-8);
      const double expect_det = std::pow(1.0 - t, 2 * n + 3);
      CHECK(std::abs(sol.det_b[i] - expect_det) < 1e-8 * (1 + expect_det));
    }
    CHECK(sol.det_b.front() == 1.0);
  }
}

TEST_CASE("flat S(0) matches the inverse of the flat comparison matrix") {
  const RiccatiSolution sol =
      solve_riccati_terminal(flat_profile(2), 2, std::vector<double>{0.0});
  Eigen::MatrixXd expect = Eigen::MatrixXd::Identity(5, 5);
  expect(0, 0) = 12.0;
  expect(0, 1) = expect(1, 0) = 6.0;
  expect(1, 1) = 4.0;
  CHECK(max_scaled_diff(sol.s_values.front(), expect) < 1e-9);
}

TEST_CASE("equality case: S equals the inverse comparison solution") {
  // matrix-level comparison needs the comparison solution itself pole-free
  // on tau in (0, 1], i.e. k < (pi/2)^2
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> ku(0.2, 2.2);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + trial % 3;
    const double k1 = ku(gen), k2 = ku(gen);
    const auto profile =
        CurvatureProfile::make_constant(CurvatureMatrix::diagonal(n, k1, k2));
    const auto grid = uniform_grid(0.95, 19);
    const RiccatiSolution sol = solve_riccati_terminal(profile, n, grid);
    const ComparisonMatrixSpec spec{k1, k2, n};
    for (size_t i = 0; i < grid.size(); ++i) {
      const Eigen::MatrixXd lam = lambda_closed_form(spec, 1.0 - grid[i]);
      const Eigen::MatrixXd gamma = lam.inverse();
      CHECK(max_scaled_diff(sol.s_values[i], gamma) < 1e-8);
      const double expected = model_density(n, k1, k2, grid[i]);
      CHECK(std::abs(sol.det_b[i] - expected) < 1e-8);
    }
  }
}

TEST_CASE("equality case: det B beyond the comparison solution's pole") {
  // S(t) degenerates where Lambda(1-t) has its pole, but the contraction
  // determinant still matches the model density on the whole grid.
  std::mt19937 gen(13);
  std::uniform_real_distribution<double> k1u(3.0, 30.0), k2u(0.3, 8.0);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 1 + trial % 3;
    const double k1 = k1u(gen), k2 = k2u(gen);
    const auto profile =
        CurvatureProfile::make_constant(CurvatureMatrix::diagonal(n, k1, k2));
    const auto grid = uniform_grid(0.99, 33);
    const RiccatiSolution sol = solve_riccati_terminal(profile, n, grid);
    for (size_t i = 0; i < grid.size(); ++i)
      CHECK(std::abs(sol.det_b[i] - model_density(n, k1, k2, grid[i])) < 1e-8);
  }
}

TEST_CASE("reversed-flow small-time expansion") {
  // U(tau) = tau C2 - tau^2/2 (C1 + C1^T) + tau^3/3 (C1 C1^T + C2 R(1) C2)
  //          + O(tau^4)
  std::mt19937 gen(17);
  const int n = 2;
  const CurvatureMatrix r = random_curvature(n, gen, 3.0);
  const auto profile = CurvatureProfile::make_constant(r);
  const auto sm = build_structure_matrices(n);
  const Eigen::MatrixXd rmat = r.assemble();
  auto remainder = [&](double tau) {
    const Eigen::MatrixXd model =
        tau * sm.c2 - 0.5 * tau * tau * (sm.c1 + sm.c1.transpose()) +
        (tau * tau * tau / 3.0) *
            (sm.c1 * sm.c1.transpose() + sm.c2 * rmat * sm.c2);
    return (riccati_u_matrix(profile, n, tau) - model).cwiseAbs().maxCoeff();
  };
  const double r2 = remainder(1e-2);
  const double r3 = remainder(1e-3);
  CHECK(r3 < 2e-4 * r2);  // O(tau^4) decay
  CHECK(r3 < 1e-11);
}

TEST_CASE("Riccati residual by finite differences") {
  std::mt19937 gen(23);
  const int n = 2;
  const CurvatureMatrix r = random_curvature(n, gen, 2.0);
  const auto profile = CurvatureProfile::make_constant(r);
  const Eigen::MatrixXd rmat = r.assemble();
  const auto sm = build_structure_matrices(n);
  for (double t : {0.1, 0.45, 0.8}) {
    const double h = 1e-5;
    auto s_at = [&](double tt) { return riccati_s_at(profile, n, tt); };
    const Eigen::MatrixXd sdot =
        (s_at(t - 2 * h) - 8 * s_at(t - h) + 8 * s_at(t + h) - s_at(t + 2 * h)) /
        (12 * h);
    const Eigen::MatrixXd s = s_at(t);
    const Eigen::MatrixXd residual =
        sdot - s * sm.c2 * s + sm.c1.transpose() * s + s * sm.c1 - rmat;
    const double scale = 1.0 + s.squaredNorm();
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-7 * scale);
  }
}

TEST_CASE("symmetry preservation") {
  std::mt19937 gen(29);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 1 + trial % 3;
    const auto profile =
        CurvatureProfile::make_constant(random_curvature(n, gen, 4.0));
    const auto grid = uniform_grid(0.99, 33);
    const RiccatiSolution sol = solve_riccati_terminal(profile, n, grid);
    CHECK(sol.max_asymmetry < 1e-9);
  }
}

TEST_CASE("two-route determinant consistency") {
  // det B from the forward frame ODE against exp(-int tr(C2 S)) from the
  // terminal solve, on random constant profiles.
  std::mt19937 gen(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 3;
    const auto profile =
        CurvatureProfile::make_constant(random_curvature(n, gen, 5.0));
    const auto grid = uniform_grid(0.9, 9);
    const RiccatiSolution sol = solve_riccati_terminal(profile, n, grid);
    const int m = 2 * n + 1;
    const FrameSolution frame = solve_frame_forward(
        profile, n, sol.s_values.front(), Eigen::MatrixXd::Identity(m, m), grid);
    const auto dets = frame.det_b();
    for (size_t i = 0; i < grid.size(); ++i) {
      CHECK(std::abs(dets[i] - sol.det_b[i]) < 1e-6 * (1.0 + sol.det_b[i]));
      // the frame pair stays on the graph of S = B^{-1} A: A(t) = B(t) S(t)
      const Eigen::MatrixXd resid =
          frame.a_values[i] - frame.b_values[i] * sol.s_values[i];
      const double scale = 1.0 + frame.a_values[i].cwiseAbs().maxCoeff();
      CHECK(resid.cwiseAbs().maxCoeff() < 1e-6 * scale);
    }
  }
}

TEST_CASE("volume_distortion returns the stored pairs") {
  const auto grid = uniform_grid(0.9, 9);
  const RiccatiSolution sol = solve_riccati_terminal(flat_profile(1), 1, grid);
  const auto pairs = volume_distortion(sol);
  REQUIRE(pairs.size() == grid.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i].first == grid[i]);
    CHECK(pairs[i].second == sol.det_b[i]);
  }
}

TEST_CASE("stored det_b is the quadrature of the stored traces") {
  const auto grid = uniform_grid(0.9, 200);
  for (int n : {1, 2}) {
    const RiccatiSolution sol = solve_riccati_terminal(flat_profile(n), n, grid);
    const auto cum = cumulative_integral(sol.grid, sol.trace_c2s);
    for (size_t i = 0; i < grid.size(); ++i)
      CHECK(std::abs(std::exp(-cum[i]) - sol.det_b[i]) < 2e-4);
  }
}

TEST_CASE("cumulative quadrature of a constant is exact") {
  // constant trace c integrates to det_b = exp(-c t) exactly
  const double c = 1.37;
  std::vector<double> times, vals;
  for (int i = 0; i <= 20; ++i) {
    times.push_back(i / 20.0);
    vals.push_back(c);
  }
  const auto cum = cumulative_integral(times, vals);
  for (size_t i = 0; i < times.size(); ++i)
    CHECK(std::exp(-cum[i]) == doctest::Approx(std::exp(-c * times[i])).epsilon(1e-14));
}

TEST_CASE("frame forward: flat solutions") {
  const int n = 2, m = 2 * n + 1;
  const auto grid = uniform_grid(1.0, 10);
  const auto sm = build_structure_matrices(n);

  // A0 = 0, B0 = I: A stays zero and B(t) = exp(t C1^T) = I + t C1^T,
  // so det B is identically 1.
  const FrameSolution f1 = solve_frame_forward(
      flat_profile(n), n, Eigen::MatrixXd::Zero(m, m), Eigen::MatrixXd::Identity(m, m),
      grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK(f1.a_values[i].cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd expect =
        Eigen::MatrixXd::Identity(m, m) + grid[i] * sm.c1.transpose();
    CHECK(max_scaled_diff(f1.b_values[i], expect) < 1e-10);
  }
  for (double d : f1.det_b()) CHECK(d == doctest::Approx(1.0).epsilon(1e-10));

  // A0 = S(0), B0 = I reproduces the flat contraction determinant.
  const auto grid2 = uniform_grid(0.99, 20);
  const RiccatiSolution sol = solve_riccati_terminal(flat_profile(n), n, grid2);
  const FrameSolution f2 = solve_frame_forward(
      flat_profile(n), n, sol.s_values.front(), Eigen::MatrixXd::Identity(m, m),
      grid2);
  const auto dets2 = f2.det_b();
  for (size_t i = 0; i < grid2.size(); ++i)
    CHECK(std::abs(dets2[i] - std::pow(1.0 - grid2[i], 2 * n + 3)) < 1e-8);
}

TEST_CASE("conjugate time detection") {
  SUBCASE("flat: no conjugate time") {
    CHECK(!detect_conjugate_time(flat_profile(1), 1, 3.0).has_value());
    CHECK(!detect_conjugate_time(flat_profile(2), 2, 1.5).has_value());
  }
  SUBCASE("Heisenberg vertical condition vanishes at 2 pi / |u0|") {
    for (double u0 : {kPi, 2.0 * kPi, 4.0 * kPi}) {
      const auto profile = CurvatureProfile::make_constant(
          CurvatureMatrix::diagonal(1, u0 * u0, 0.25 * u0 * u0));
      const auto tc = detect_conjugate_time(profile, 1, 2.5);
      REQUIRE(tc.has_value());
      CHECK(std::abs(*tc - 2.0 * kPi / u0) < 1e-8 * (2.0 * kPi / u0));
    }
  }
  SUBCASE("horizon short of the zero") {
    const double u0 = 4.0 * kPi;
    const auto profile = CurvatureProfile::make_constant(
        CurvatureMatrix::diagonal(1, u0 * u0, 0.25 * u0 * u0));
    CHECK(!detect_conjugate_time(profile, 1, 0.45).has_value());
  }
}

TEST_CASE("terminal solve reports conjugate blow-up") {
  // sqrt(k1) = 3 pi puts the contraction's conjugate point at t = 1/3
  const double k1 = 9.0 * kPi * kPi;
  const auto profile =
      CurvatureProfile::make_constant(CurvatureMatrix::diagonal(1, k1, 0.1));
  const auto grid = uniform_grid(0.9, 9);
  try {
    solve_riccati_terminal(profile, 1, grid);
    FAIL("expected conjugate_point_error");
  } catch (const conjugate_point_error& e) {
    CHECK(std::abs(e.time() - 1.0 / 3.0) < 1e-3);
  }
}

TEST_CASE("asymmetric profile is rejected") {
  CurvatureMatrix r = CurvatureMatrix::diagonal(2, 1.0, 1.0);
  r.r_cc(0, 1) = 0.3;  // breaks symmetry
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  CurvatureProfile p;
  p.half_dim = 2;
  p.eval = [r](double) { return r; };
  const auto grid = uniform_grid(0.5, 5);
  CHECK_THROWS_AS(solve_riccati_terminal(p, 2, grid), std::invalid_argument);
}

TEST_CASE("Riccati order preservation") {
  // R1 >= R2 in the quadratic-form order implies S1 <= S2.
  std::mt19937 gen(37);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 3;
    const int c = 2 * n - 2;
    const CurvatureMatrix r2 = random_curvature(n, gen, 3.0);
    CurvatureMatrix r1 = r2;
    // positive semidefinite increment on the (b, c) block
    Eigen::MatrixXd inc(c + 1, c + 1);
    for (int i = 0; i < c + 1; ++i)
      for (int j = 0; j < c + 1; ++j) inc(i, j) = u(gen) - 1.0;
    inc = (inc * inc.transpose()).eval();
    r1.r_bb += inc(0, 0);
    if (c > 0) {
      r1.r_cb += inc.block(0, 1, 1, c);
      r1.r_cc += inc.block(1, 1, c, c);
    }
    const auto grid = uniform_grid(0.9, 6);
    const auto s1 = solve_riccati_terminal(CurvatureProfile::make_constant(r1), n, grid);
    const auto s2 = solve_riccati_terminal(CurvatureProfile::make_constant(r2), n, grid);
    for (size_t i = 0; i < grid.size(); ++i) {
      const Eigen::MatrixXd diff = s2.s_values[i] - s1.s_values[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff);
      const double scale = 1.0 + s2.s_values[i].cwiseAbs().maxCoeff();
      CHECK(es.eigenvalues().minCoeff() > -1e-7 * scale);
    }
  }
}

TEST_CASE("trace comparison: equality case is tight") {
  for (int n : {1, 2, 3}) {
    const double k1 = 1.8, k2 = 0.6;
    const auto profile =
        CurvatureProfile::make_constant(CurvatureMatrix::diagonal(n, k1, k2));
    const auto grid = uniform_grid(0.95, 19);
    const auto rep = verify_trace_comparison(profile, n, k1, k2, grid);
    CHECK(rep.precondition_ok);
    CHECK(rep.trace_violations == 0);
    CHECK(rep.det_violations == 0);
    for (size_t i = 0; i < grid.size(); ++i) {
      CHECK(std::abs(rep.trace_c2s[i] - rep.trace_bound[i]) <
            1e-7 * (1.0 + std::abs(rep.trace_bound[i])));
      CHECK(std::abs(rep.det_b[i] - rep.det_bound[i]) < 1e-8);
    }
  }
}

TEST_CASE("trace comparison: strict inequality for dominated profiles") {
  const int n = 2;
  const double k1 = 0.9, k2 = 0.4;
  CurvatureProfile p;
  p.half_dim = n;
  p.constant = false;
  p.eval = [n, k1, k2](double t) {
    return CurvatureMatrix::diagonal(n, k1 + std::abs(std::sin(t)), k2 + 0.1);
  };
  const auto grid = uniform_grid(0.9, 18, /*include_zero=*/false);
  const auto rep = verify_trace_comparison(p, n, k1, k2, grid);
  CHECK(rep.precondition_ok);
  CHECK(rep.trace_violations == 0);
  CHECK(rep.det_violations == 0);
  for (size_t i = 0; i < grid.size(); ++i)
    CHECK(rep.det_b[i] > rep.det_bound[i] - 1e-8);
}

TEST_CASE("trace comparison: off-diagonal coupling keeps the bound") {
  std::mt19937 gen(41);
  std::uniform_real_distribution<double> u(0.1, 1.5);
  std::normal_distribution<double> nz(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + trial % 2;
    const double k1 = u(gen), k2 = u(gen);
    CurvatureMatrix r = CurvatureMatrix::diagonal(n, k1, k2);
    for (int i = 0; i < r.r_cb.size(); ++i) r.r_cb[i] = nz(gen);
    const auto grid = uniform_grid(0.9, 9);
    const auto rep = verify_trace_comparison(
        CurvatureProfile::make_constant(r), n, k1, k2, grid);
    CHECK(rep.precondition_ok);
    CHECK(rep.trace_violations == 0);
    CHECK(rep.det_violations == 0);
  }
}

TEST_CASE("model density matches the definition-level density factor") {
  // at distance 1 both parametrizations coincide
  CHECK(model_density(2, 1.0, 0.25, 0.5) ==
        doctest::Approx(density_factor({1.0, 0.25, 5}, 1.0, 0.5)).epsilon(1e-15));
}

TEST_CASE("density factor against the engine on the same comparison matrix") {
  // (k1, k2, N, d^2, t) = (1, 1/4, 5, 1, 1/2): the kernel value must agree
  // with exp(-int tr(C2 S)) for R = K = diag(0, 1, (1/4) I, 0)
  const auto profile =
      CurvatureProfile::make_constant(CurvatureMatrix::diagonal(2, 1.0, 0.25));
  const RiccatiSolution sol =
      solve_riccati_terminal(profile, 2, std::vector<double>{0.5});
  const double kernel_value = density_factor({1.0, 0.25, 5}, 1.0, 0.5);
  CHECK(sol.det_b.front() == doctest::Approx(kernel_value).epsilon(1e-9));
}
