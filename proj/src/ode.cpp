#include "mcp/ode.hpp"

#include <algorithm>
#include <cmath>

namespace mcp::ode {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 5th-order minus embedded 4th-order weights (error estimator).
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                 e4 = b4 - 393.0 / 640, e5 = b5 + 92097.0 / 339200,
                 e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                  const Eigen::VectorXd& y1, const Options& opt) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double scale =
        opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / scale;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

double initial_step_guess(const Rhs& rhs, double t0, const Eigen::VectorXd& y0,
                          const Eigen::VectorXd& f0, double span) {
  const double dy = y0.norm();
  const double df = f0.norm();
  double h = (df > 1e-12 && dy > 1e-12) ? 0.01 * dy / df : 1e-6 * span;
  h = std::min(h, 0.1 * span);
  // one Euler probe to bound the second derivative
  Eigen::VectorXd y1 = y0 + h * f0;
  Eigen::VectorXd f1(y0.size());
  rhs(t0 + h, y1, f1);
  const double d2 = (f1 - f0).norm() / h;
  if (d2 > 1e-12) h = std::min(h, std::pow(0.01 / d2, 0.2));
  return std::max(h, 1e-12 * span);
}

}  // namespace

Eigen::VectorXd integrate(const Rhs& rhs, double t0, Eigen::VectorXd y0,
                          double t1, std::span<const double> outputs,
                          const Observer& observer, const Options& opt,
                          const PostStep& post_step,
                          std::vector<StepRecord>* trace) {
  if (!(t1 > t0)) throw std::invalid_argument("integrate: need t1 > t0");
  const Eigen::Index n = y0.size();
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  Eigen::VectorXd ytmp(n), ynew(n), err(n);

  double t = t0;
  const double span = t1 - t0;
  rhs(t, y0, k1);
  double h = opt.initial_step > 0 ? opt.initial_step
                                  : initial_step_guess(rhs, t0, y0, k1, span);
  if (opt.max_step > 0) h = std::min(h, opt.max_step);

  size_t next_out = 0;
  if (trace) trace->push_back({t, y0});

  const double hmin = 1e-14 * span;
  int consecutive_rejects = 0;
  while (t < t1) {
    double target = t1;
    if (next_out < outputs.size()) target = std::min(target, outputs[next_out]);
    bool hit_target = false;
    if (t + h >= target - 1e-14 * span) {
      h = target - t;
      hit_target = true;
    }
    if (h < hmin) throw ode_error("integrate: step size underflow");

    ytmp = y0 + h * (a21 * k1);
    rhs(t + h / 5.0, ytmp, k2);
    ytmp = y0 + h * (a31 * k1 + a32 * k2);
    rhs(t + 3.0 * h / 10.0, ytmp, k3);
    ytmp = y0 + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + 4.0 * h / 5.0, ytmp, k4);
    ytmp = y0 + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + 8.0 * h / 9.0, ytmp, k5);
    ytmp = y0 + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, ytmp, k6);
    ynew = y0 + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + h, ynew, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double enorm = error_norm(err, y0, ynew, opt);
    if (!std::isfinite(enorm)) {
      h *= 0.25;
      if (++consecutive_rejects > 60)
        throw ode_error("integrate: repeated non-finite error estimates");
      continue;
    }
    if (enorm > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(enorm, -0.2));
      if (++consecutive_rejects > 200)
        throw ode_error("integrate: too many rejected steps");
      continue;
    }
    consecutive_rejects = 0;

    const double t_new = hit_target ? target : t + h;
    y0.swap(ynew);
    t = t_new;
    if (post_step) post_step(t, y0);
    if (trace) trace->push_back({t, y0});
    while (next_out < outputs.size() && t >= outputs[next_out] - 1e-14 * span) {
      if (observer) observer(outputs[next_out], y0);
      ++next_out;
    }
    rhs(t, y0, k1);  // state may have been adjusted; no FSAL reuse

    const double factor =
        (enorm > 1e-30) ? std::clamp(0.9 * std::pow(enorm, -0.2), 0.2, 5.0) : 5.0;
    h *= factor;
    if (opt.max_step > 0) h = std::min(h, opt.max_step);
    h = std::min(h, t1 - t + 1e-30);
  }
  return y0;
}

}  // namespace mcp::ode
