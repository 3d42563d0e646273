#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "mcp/errors.hpp"

namespace mcp::ode {

using Rhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;
using Observer = std::function<void(double, const Eigen::VectorXd&)>;
using PostStep = std::function<void(double, Eigen::VectorXd&)>;

struct Options {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 = choose automatically
  double max_step = 0.0;      // 0 = no cap
};

struct StepRecord {
  double t;
  Eigen::VectorXd y;
};

/// Adaptive Dormand-Prince 5(4) from t0 to t1 (t1 > t0).
///
/// Steps are clamped so that every time in `outputs` (sorted ascending,
/// all within (t0, t1]) is hit exactly; `observer` is called there.
/// `post_step` may adjust the state after each accepted step (projection,
/// symmetrization). When `trace` is non-null every accepted step is
/// recorded, including the initial state. Returns the state at t1.
Eigen::VectorXd integrate(const Rhs& rhs, double t0, Eigen::VectorXd y0,
                          double t1, std::span<const double> outputs,
                          const Observer& observer, const Options& opt,
                          const PostStep& post_step = {},
                          std::vector<StepRecord>* trace = nullptr);

}  // namespace mcp::ode
