#pragma once

#include <stdexcept>
#include <string>

namespace mcp {

/// Evaluation requested too close to a pole of a comparison function
/// (tan/sec/cot singularity or a zero of the M1 numerator in a denominator).
class pole_error : public std::domain_error {
 public:
  pole_error(const std::string& what, double location)
      : std::domain_error(what), location_(location) {}
  double location() const { return location_; }

 private:
  double location_;
};

/// The Riccati / frame flow hit a conjugate point: det B vanished at an
/// interior time, so the solution does not extend over the requested grid.
class conjugate_point_error : public std::runtime_error {
 public:
  conjugate_point_error(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Adaptive integration failed (step-size underflow or non-finite state).
class ode_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mcp
