#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "mcp/comparison.hpp"
#include "mcp/riccati.hpp"

using namespace mcp;

namespace {

constexpr double kPi = std::numbers::pi;

// Branch formulas written directly from their definitions, as an oracle
// independent of the series evaluation path. Only usable away from k = 0.
double m1_direct(double k, double t) {
  const double d = std::sqrt(std::abs(k)) * (1.0 - t);
  if (k > 0) return (2 - 2 * std::cos(d) - d * std::sin(d)) / (d * d * d * d);
  return (2 - 2 * std::cosh(d) + d * std::sinh(d)) / (d * d * d * d);
}

double m1_numerator(double d, double k_sign) {
  if (k_sign > 0) return 2 - 2 * std::cos(d) - d * std::sin(d);
  if (k_sign < 0) return 2 - 2 * std::cosh(d) + d * std::sinh(d);
  return 1.0;
}

double m2_numerator(double d, double k_sign) {
  if (k_sign > 0) return std::sin(d);
  if (k_sign < 0) return std::sinh(d);
  return 1.0;
}

}  // namespace

TEST_CASE("d_param basic values") {
  CHECK(d_param(0.0, 0.3) == 0.0);
  CHECK(d_param(4.0, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(d_param(-9.0, 0.5) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK_THROWS_AS(d_param(1.0, 1.5), std::domain_error);
  CHECK_THROWS_AS(d_param(std::nan(""), 0.5), std::domain_error);
}

TEST_CASE("m1 branch values") {
  CHECK(m1(0.0, 0.7) == doctest::Approx(1.0 / 12).epsilon(1e-15));
  CHECK(m1(kPi * kPi, 0.0) ==
        doctest::Approx(4.0 / std::pow(kPi, 4)).epsilon(1e-14));
  // frozen from a 30-digit evaluation of 2 - 2 cosh(1) + sinh(1)
  CHECK(m1(-1.0, 0.0) == doctest::Approx(0.0890399240133139).epsilon(1e-13));
  // value at the numerator's first zero is returned, not an error
  const double k_zero = 4.0 * kPi * kPi;
  CHECK(m1(k_zero, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(!m1_past_first_zero(k_zero, 0.0));
  CHECK(m1_past_first_zero(4.2 * kPi * kPi, 0.0));
}

TEST_CASE("m2 branch values") {
  CHECK(m2(0.0, 0.4) == 1.0);
  CHECK(m2(kPi * kPi / 4.0, 0.0) == doctest::Approx(2.0 / kPi).epsilon(1e-14));
  CHECK(m2(-1.0, 0.0) == doctest::Approx(1.1752011936438014).epsilon(1e-14));
}

TEST_CASE("series window matches direct evaluation at its edge") {
  for (double s : {0.26, 0.4, 1.0, 3.0}) {
    for (double sign : {1.0, -1.0}) {
      const double k = sign * s;  // t = 0 so s = k
      CHECK(m1(k, 0.0) == doctest::Approx(m1_direct(k, 0.0)).epsilon(1e-12));
    }
  }
  // inside the window the series must agree with the direct formula to the
  // direct formula's own (reduced) accuracy
  CHECK(m1(0.2, 0.0) == doctest::Approx(m1_direct(0.2, 0.0)).epsilon(1e-9));
  CHECK(m1(-0.2, 0.0) == doctest::Approx(m1_direct(-0.2, 0.0)).epsilon(1e-9));
}

TEST_CASE("continuity in k near zero") {
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0;
    for (double k : {1e-8, -1e-8, 1e-10, -1e-10}) {
      CHECK(std::abs(m1(k, t) - 1.0 / 12) <= 1e-6);
      CHECK(std::abs(m2(k, t) - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("positivity below the first zero") {
  std::mt19937 gen(42);
  std::uniform_real_distribution<double> ku(-30.0, 30.0), tu(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double k = ku(gen);
    const double t = tu(gen);
    if (d_param(k, t) >= kPi) continue;
    CHECK(m1(k, t) > 0.0);
    CHECK(m2(k, t) > 0.0);
  }
}

TEST_CASE("density_factor flat and endpoint values") {
  ComparisonParams flat{0.0, 0.0, 5};
  CHECK(density_factor(flat, 3.7, 0.5) == doctest::Approx(0.0078125).epsilon(1e-15));
  ComparisonParams curved{1.0, 0.25, 5};
  CHECK(density_factor(curved, 1.3, 0.0) == 1.0);
  CHECK(density_factor(curved, 1.3, 1.0) == 0.0);
  CHECK_THROWS_AS(density_factor(curved, -1.0, 0.5), std::domain_error);
  // denominator vanishes when sqrt(k1 d^2) reaches 2 pi
  ComparisonParams past{4.0 * kPi * kPi, 0.0, 5};
  CHECK_THROWS_AS(density_factor(past, 1.0, 0.5), pole_error);
}

TEST_CASE("density_factor strictly decreasing in t for nonnegative k") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> ku(0.0, 4.0), du(0.1, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    ComparisonParams p{ku(gen), ku(gen), (trial % 2) ? 5 : 7};
    const double d2 = du(gen);
    double prev = density_factor(p, d2, 0.0);
    for (int i = 1; i <= 50; ++i) {
      const double cur = density_factor(p, d2, i / 50.0);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("power reconciliation identity") {
  // density_factor == (1-t) * numerator ratios: the (1-t)^{N+2} of the
  // definition cancels against the D-power denominators of M1, M2.
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> ku(-6.0, 6.0), du(0.3, 2.0), tu(0.0, 0.95);
  for (int trial = 0; trial < 200; ++trial) {
    const double k1 = ku(gen), k2 = ku(gen), d2 = du(gen), t = tu(gen);
    const int n_dim = (trial % 3 == 0) ? 3 : ((trial % 3 == 1) ? 5 : 9);
    const double s1 = k1 * d2, s2 = k2 * d2;
    if (s1 > 0 && std::sqrt(s1) > 1.9 * kPi) continue;  // stay below conjugate
    if (s2 > 0 && std::sqrt(s2) > 0.9 * kPi) continue;
    if (std::abs(s1) < 0.3 || std::abs(s2) < 0.3) continue;  // oracle needs the
    // direct branch: numerator ratios lose precision near 0
    ComparisonParams params{k1, k2, n_dim};
    const double lhs = density_factor(params, d2, t);
    const double d1t = d_param(s1, t), d10 = d_param(s1, 0.0);
    const double d2t = d_param(s2, t), d20 = d_param(s2, 0.0);
    const double rhs = (1.0 - t) * (m1_numerator(d1t, s1) / m1_numerator(d10, s1)) *
                       std::pow(m2_numerator(d2t, s2) / m2_numerator(d20, s2),
                                n_dim - 3);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("trace_bound_b values and k -> 0 limit") {
  CHECK(trace_bound_b(0.0, 0.5) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(trace_bound_b(0.0, 0.0) == doctest::Approx(4.0).epsilon(1e-15));
  // k > 0 branch at k = 1e-8 agrees with the flat value
  CHECK(trace_bound_b(1e-8, 0.5) == doctest::Approx(8.0).epsilon(1e-6));
  CHECK(trace_bound_b(1e-8, 0.0) == doctest::Approx(4.0).epsilon(1e-6));
  // hyperbolic branch, frozen from a 30-digit evaluation of
  // (cosh 1 - sinh 1) / (2 - 2 cosh 1 + sinh 1)
  CHECK(trace_bound_b(-1.0, 0.0) ==
        doctest::Approx(4.1316234851731713).epsilon(1e-13));
  CHECK_THROWS_AS(trace_bound_b(1.0, 1.0), std::domain_error);
  // pole window at D = 2 pi
  const double k_pole = 4.0 * kPi * kPi;
  CHECK_THROWS_AS(trace_bound_b(k_pole * (1 + 1e-14), 0.0), pole_error);
}

TEST_CASE("trace_bound_b equals the derivative of the model log density") {
  // In the equality case tr(C2 Gamma) decomposes into the three bounds, so
  // bound_b must equal -d/dt log((1-t)^4 M1(k,t)); check by central
  // differences of the kernel itself.
  for (double k : {2.3, -1.7, 0.8, -12.0, 17.0}) {
    for (double t : {0.01, 0.3, 0.7}) {
      const double h = 1e-6;
      const double fd = -(std::log(std::pow(1 - t - h, 4) * m1(k, t + h)) -
                          std::log(std::pow(1 - t + h, 4) * m1(k, t - h))) /
                        (2 * h);
      CHECK(trace_bound_b(k, t) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("trace_bound_c values") {
  CHECK(trace_bound_c(0.0, 0.0, 2) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(trace_bound_c(3.7, 0.4, 0) == 0.0);
  CHECK(trace_bound_c(kPi * kPi / 16.0, 0.0, 2) ==
        doctest::Approx(kPi / 2.0).epsilon(1e-14));
  CHECK(trace_bound_c(1e-9, 0.5, 3) == doctest::Approx(6.0).epsilon(1e-8));
  CHECK(trace_bound_c(-4.0, 0.0, 1) ==
        doctest::Approx(2.0 / std::tanh(2.0)).epsilon(1e-13));
  CHECK_THROWS_AS(trace_bound_c(kPi * kPi * (1 + 4e-13), 0.0, 2), pole_error);
  // exactly at the pole: the one-sided limit, a signed infinity
  CHECK(trace_bound_c(kPi * kPi, 0.0, 2) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("trace_bound_last") {
  CHECK(trace_bound_last(0.0) == 1.0);
  CHECK(trace_bound_last(0.5) == 2.0);
  CHECK(trace_bound_last(0.9) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK_THROWS_AS(trace_bound_last(1.0), std::domain_error);
}

TEST_CASE("lambda_closed_form flat blocks") {
  ComparisonMatrixSpec spec{0.0, 0.0, 2};
  const Eigen::MatrixXd lam = lambda_closed_form(spec, 1.0);
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(5, 5);
  expect(0, 0) = 1.0 / 3;
  expect(0, 1) = expect(1, 0) = -0.5;
  expect(1, 1) = 1.0;
  expect(2, 2) = expect(3, 3) = 1.0;
  expect(4, 4) = 1.0;
  CHECK((lam - expect).cwiseAbs().maxCoeff() < 1e-15);

  ComparisonMatrixSpec pos{1.4, 2.0, 2};
  CHECK(lambda_closed_form(pos, 0.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lambda_closed_form satisfies the comparison equation") {
  // residual via 5-point finite-difference derivative
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> ku(0.1, 6.0);
  for (int trial = 0; trial < 20; ++trial) {
    ComparisonMatrixSpec spec{ku(gen), ku(gen), 1 + trial % 4};
    const double t_pole = lambda_first_pole(spec);
    const double t = 0.5 * t_pole;
    const double h = 1e-4 * t;
    const auto lam = [&](double s) { return lambda_closed_form(spec, s); };
    const Eigen::MatrixXd deriv =
        (lam(t - 2 * h) - 8 * lam(t - h) + 8 * lam(t + h) - lam(t + 2 * h)) /
        (12 * h);
    const Eigen::MatrixXd l = lam(t);
    const auto sm = build_structure_matrices(spec.half_dim);
    const Eigen::MatrixXd k = comparison_matrix_k(spec);
    const Eigen::MatrixXd residual =
        deriv - l * k * l + sm.c1 * l + l * sm.c1.transpose() - sm.c2;
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("lambda_closed_form small-t expansion") {
  // Lambda(t) = t C2 - t^2/2 (C1 + C1^T) + t^3/3 (C1 C1^T + C2 K C2) + O(t^4);
  // the remainder must shrink like t^4 between t = 1e-2 and t = 1e-3.
  ComparisonMatrixSpec spec{2.0, 0.7, 2};
  const auto sm = build_structure_matrices(spec.half_dim);
  const Eigen::MatrixXd k = comparison_matrix_k(spec);
  auto remainder = [&](double t) {
    const Eigen::MatrixXd model =
        t * sm.c2 - 0.5 * t * t * (sm.c1 + sm.c1.transpose()) +
        (t * t * t / 3.0) *
            (sm.c1 * sm.c1.transpose() + sm.c2 * k * sm.c2);
    return (lambda_closed_form(spec, t) - model).cwiseAbs().maxCoeff();
  };
  const double r2 = remainder(1e-2);
  const double r3 = remainder(1e-3);
  CHECK(r3 < 2e-4 * r2);  // fourth-order decay, with slack
  CHECK(r3 < 1e-11);
}

TEST_CASE("lambda pole guard") {
  ComparisonMatrixSpec spec{4.0, 1.0, 2};
  CHECK(lambda_first_pole(spec) == doctest::Approx(kPi / 4.0));
  CHECK_THROWS_AS(lambda_closed_form(spec, kPi / 4.0 * (1 + 1e-14)), pole_error);
  ComparisonMatrixSpec neg{-1.0, -2.0, 2};
  CHECK(std::isinf(lambda_first_pole(neg)));
  CHECK_NOTHROW(lambda_closed_form(neg, 5.0));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(ComparisonParams({1.0, 1.0, 4}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(ComparisonParams({1.0, 1.0, 1}).validate(), std::invalid_argument);
  CHECK_NOTHROW(ComparisonParams({1.0, 1.0, 3}).validate());
  CHECK_THROWS_AS(ComparisonMatrixSpec({1.0, 1.0, 0}).validate(), std::invalid_argument);
}
