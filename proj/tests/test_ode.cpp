#include <doctest.h>

#include <cmath>

#include "mcp/ode.hpp"

using namespace mcp;

TEST_CASE("adaptive integrator: exponential decay with clamped outputs") {
  ode::Rhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy = -y;
  };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  std::vector<double> outputs{0.25, 0.5, 0.75, 1.0};
  std::vector<std::pair<double, double>> seen;
  ode::Options opt;
  const Eigen::VectorXd yend = ode::integrate(
      rhs, 0.0, y0, 1.0, outputs,
      [&](double t, const Eigen::VectorXd& y) { seen.emplace_back(t, y[0]); },
      opt);
  REQUIRE(seen.size() == outputs.size());
  for (const auto& [t, v] : seen)
    CHECK(v == doctest::Approx(std::exp(-t)).epsilon(1e-10));
  CHECK(yend[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
}

TEST_CASE("adaptive integrator: harmonic oscillator energy") {
  ode::Rhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy.resize(2);
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  Eigen::VectorXd y0(2);
  y0 << 1.0, 0.0;
  ode::Options opt;
  std::vector<ode::StepRecord> trace;
  const Eigen::VectorXd yend =
      ode::integrate(rhs, 0.0, y0, 20.0, {}, {}, opt, {}, &trace);
  CHECK(yend[0] == doctest::Approx(std::cos(20.0)).epsilon(1e-8));
  CHECK(yend[1] == doctest::Approx(-std::sin(20.0)).epsilon(1e-8));
  REQUIRE(trace.size() > 2);
  CHECK(trace.front().t == 0.0);
  CHECK(trace.back().t == 20.0);
  for (const auto& rec : trace) {
    const double energy = rec.y.squaredNorm();
    CHECK(energy == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("adaptive integrator: post-step hook runs on accepted steps") {
  // projection onto the unit circle keeps the state exactly on it
  ode::Rhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy.resize(2);
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  Eigen::VectorXd y0(2);
  y0 << 1.0, 0.0;
  ode::Options opt;
  std::vector<ode::StepRecord> trace;
  ode::integrate(
      rhs, 0.0, y0, 5.0, {}, {}, opt,
      [](double, Eigen::VectorXd& y) { y /= y.norm(); }, &trace);
  for (size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i].y.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("adaptive integrator rejects bad spans") {
  ode::Rhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy = y;
  };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  CHECK_THROWS_AS(ode::integrate(rhs, 1.0, y0, 0.5, {}, {}, {}),
                  std::invalid_argument);
}
