#include "mcp/comparison.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mcp {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// All comparison functions are entire in s = k (1-t)^2; the direct
// trigonometric forms lose up to ten digits to cancellation for |s| below
// ~0.25, so inside that window we evaluate the power series instead.
constexpr double kSeriesWindow = 0.25;
constexpr int kSeriesTerms = 14;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// M1 as a function of s: sum_j (-1)^j (2j+2)/(2j+4)! s^j.
double m1_series(double s) {
  static const auto coeff = [] {
    std::array<double, kSeriesTerms> c{};
    for (int j = 0; j < kSeriesTerms; ++j)
      c[j] = ((j % 2) ? -1.0 : 1.0) * (2.0 * j + 2.0) / factorial(2 * j + 4);
    return c;
  }();
  double acc = 0.0;
  for (int j = kSeriesTerms - 1; j >= 0; --j) acc = acc * s + coeff[j];
  return acc;
}

// M2 as a function of s: sum_j (-1)^j s^j / (2j+1)!.
double m2_series(double s) {
  static const auto coeff = [] {
    std::array<double, kSeriesTerms> c{};
    for (int j = 0; j < kSeriesTerms; ++j)
      c[j] = ((j % 2) ? -1.0 : 1.0) / factorial(2 * j + 1);
    return c;
  }();
  double acc = 0.0;
  for (int j = kSeriesTerms - 1; j >= 0; --j) acc = acc * s + coeff[j];
  return acc;
}

// f'(D)/D^3 as a function of s: sum_j (-1)^j (2j+2)/(2j+3)! s^j,
// where f(D) = 2 - 2 cos D - D sin D is the M1 numerator.
double m1_num_deriv_series(double s) {
  static const auto coeff = [] {
    std::array<double, kSeriesTerms> c{};
    for (int j = 0; j < kSeriesTerms; ++j)
      c[j] = ((j % 2) ? -1.0 : 1.0) * (2.0 * j + 2.0) / factorial(2 * j + 3);
    return c;
  }();
  double acc = 0.0;
  for (int j = kSeriesTerms - 1; j >= 0; --j) acc = acc * s + coeff[j];
  return acc;
}

double m1_of_s(double s) {
  if (std::abs(s) < kSeriesWindow) return m1_series(s);
  const double d = std::sqrt(std::abs(s));
  const double d4 = s * s;
  if (s > 0) return (2.0 - 2.0 * std::cos(d) - d * std::sin(d)) / d4;
  return (2.0 - 2.0 * std::cosh(d) + d * std::sinh(d)) / d4;
}

double m2_of_s(double s) {
  if (std::abs(s) < kSeriesWindow) return m2_series(s);
  const double d = std::sqrt(std::abs(s));
  return (s > 0) ? std::sin(d) / d : std::sinh(d) / d;
}

double m1_num_deriv_of_s(double s) {
  if (std::abs(s) < kSeriesWindow) return m1_num_deriv_series(s);
  const double d = std::sqrt(std::abs(s));
  const double d3 = d * std::abs(s);
  if (s > 0) return (std::sin(d) - d * std::cos(d)) / d3;
  return (d * std::cosh(d) - std::sinh(d)) / d3;
}

void check_unit_interval(double t, bool closed_right) {
  if (!(t >= 0.0) || (closed_right ? !(t <= 1.0) : !(t < 1.0)))
    throw std::domain_error("time parameter outside the unit interval");
}

void check_finite(double k, const char* name) {
  if (!std::isfinite(k))
    throw std::domain_error(std::string(name) + " must be finite");
}

// Signed infinity exactly at a pole (caller handles), typed error inside
// the guard window or beyond the pole.
bool pole_guard(double d, double pole, const char* what) {
  if (d == pole) return true;
  if (std::abs(d - pole) < 1e-12 * pole) throw pole_error(what, pole);
  if (d > pole) throw pole_error(what, pole);
  return false;
}

// tan(x)/x, (sec(x)-1)/s and ((tan(x)/x)-1)/s as functions of s = x^2,
// with tanh/sech continuation for s < 0.
double tan_over_x(double s) {
  if (std::abs(s) < 1e-2) {
    // 1 + s/3 + 2 s^2/15 + 17 s^3/315 + 62 s^4/2835 + 1382 s^5/155925
    return 1.0 +
           s * (1.0 / 3.0 +
                s * (2.0 / 15.0 +
                     s * (17.0 / 315.0 +
                          s * (62.0 / 2835.0 + s * (1382.0 / 155925.0)))));
  }
  const double x = std::sqrt(std::abs(s));
  return (s > 0) ? std::tan(x) / x : std::tanh(x) / x;
}

double sec_minus_one_over_s(double s) {
  if (std::abs(s) < 1e-2) {
    // 1/2 + 5 s/24 + 61 s^2/720 + 277 s^3/8064 + 50521 s^4/3628800
    return 0.5 +
           s * (5.0 / 24.0 +
                s * (61.0 / 720.0 +
                     s * (277.0 / 8064.0 + s * (50521.0 / 3628800.0))));
  }
  const double x = std::sqrt(std::abs(s));
  return (s > 0) ? (1.0 / std::cos(x) - 1.0) / s : (1.0 / std::cosh(x) - 1.0) / s;
}

double tan_ratio_minus_one_over_s(double s) {
  if (std::abs(s) < 1e-2) {
    return 1.0 / 3.0 +
           s * (2.0 / 15.0 +
                s * (17.0 / 315.0 +
                     s * (62.0 / 2835.0 + s * (1382.0 / 155925.0))));
  }
  return (tan_over_x(s) - 1.0) / s;
}

bool guard_lambda_pole(double k, double t, const char* what) {
  if (k <= 0.0) return false;
  const double x = std::sqrt(k) * t;
  return pole_guard(x, kPi / 2.0, what);
}

}  // namespace

void ComparisonParams::validate() const {
  check_finite(k1, "k1");
  check_finite(k2, "k2");
  if (n_dim < 3 || n_dim % 2 == 0)
    throw std::invalid_argument("n_dim must be odd and >= 3");
}

void ComparisonMatrixSpec::validate() const {
  check_finite(k1, "k1");
  check_finite(k2, "k2");
  if (half_dim < 1) throw std::invalid_argument("half_dim must be >= 1");
}

double d_param(double k, double t) {
  check_finite(k, "k");
  check_unit_interval(t, /*closed_right=*/true);
  return std::sqrt(std::abs(k)) * (1.0 - t);
}

double m1(double k, double t) {
  check_finite(k, "k");
  check_unit_interval(t, /*closed_right=*/true);
  const double omt = 1.0 - t;
  return m1_of_s(k * omt * omt);
}

double m2(double k, double t) {
  check_finite(k, "k");
  check_unit_interval(t, /*closed_right=*/true);
  const double omt = 1.0 - t;
  return m2_of_s(k * omt * omt);
}

bool m1_past_first_zero(double k, double t) {
  return k > 0.0 && d_param(k, t) > 2.0 * kPi;
}

double density_factor(const ComparisonParams& params, double dist_sq, double t) {
  params.validate();
  check_unit_interval(t, /*closed_right=*/true);
  if (!(dist_sq >= 0.0) || !std::isfinite(dist_sq))
    throw std::domain_error("dist_sq must be finite and nonnegative");

  const double s1 = params.k1 * dist_sq;
  const double s2 = params.k2 * dist_sq;
  const double m1_den = m1_of_s(s1);
  const double m2_den = m2_of_s(s2);
  if (!(m1_den > 1e-12) || !(m2_den > 1e-12))
    throw pole_error(
        "comparison denominator vanishes: geodesic at or past a conjugate point",
        t);

  const double omt = 1.0 - t;
  const double m1_ratio = m1_of_s(s1 * omt * omt) / m1_den;
  const double m2_ratio = m2_of_s(s2 * omt * omt) / m2_den;
  return std::pow(omt, params.n_dim + 2) * m1_ratio *
         std::pow(m2_ratio, params.n_dim - 3);
}

double trace_bound_b(double k1, double t) {
  check_finite(k1, "k1");
  check_unit_interval(t, /*closed_right=*/false);
  const double omt = 1.0 - t;
  if (k1 > 0.0 && pole_guard(std::sqrt(k1) * omt, 2.0 * kPi,
                             "trace_bound_b pole at D = 2*pi"))
    return -kInf;  // one-sided limit from D < 2*pi
  const double s = k1 * omt * omt;
  return m1_num_deriv_of_s(s) / (m1_of_s(s) * omt);
}

double trace_bound_c(double k2, double t, int block_size) {
  check_finite(k2, "k2");
  check_unit_interval(t, /*closed_right=*/false);
  if (block_size < 0) throw std::invalid_argument("block_size must be >= 0");
  if (block_size == 0) return 0.0;
  const double omt = 1.0 - t;
  const double d = std::sqrt(std::abs(k2)) * omt;
  double cot_ratio;  // D*cot(D) or D*coth(D)
  if (k2 > 0.0) {
    if (pole_guard(d, kPi, "trace_bound_c pole at D = pi"))
      return -kInf;  // cot -> -inf as D -> pi from below
    const double s = k2 * omt * omt;
    cot_ratio = (s < 1e-3) ? 1.0 - s / 3.0 - s * s / 45.0 - 2.0 * s * s * s / 945.0
                           : d * std::cos(d) / std::sin(d);
  } else if (k2 == 0.0) {
    cot_ratio = 1.0;
  } else {
    const double s = k2 * omt * omt;
    cot_ratio = (s > -1e-3) ? 1.0 - s / 3.0 - s * s / 45.0 - 2.0 * s * s * s / 945.0
                            : d * std::cosh(d) / std::sinh(d);
  }
  return block_size * cot_ratio / omt;
}

double trace_bound_last(double t) {
  check_unit_interval(t, /*closed_right=*/false);
  return 1.0 / (1.0 - t);
}

Eigen::MatrixXd lambda_closed_form(const ComparisonMatrixSpec& spec, double t) {
  spec.validate();
  if (!(t >= 0.0) || !std::isfinite(t))
    throw std::domain_error("t must be finite and nonnegative");
  const bool b_pole =
      guard_lambda_pole(spec.k1, t, "lambda_closed_form pole in the b block");
  const bool c_pole =
      guard_lambda_pole(spec.k2, t, "lambda_closed_form pole in the c block");

  const int m = 2 * spec.half_dim + 1;
  const double s1 = spec.k1 * t * t;
  const double s2 = spec.k2 * t * t;
  Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(m, m);
  if (b_pole) {
    lam(0, 0) = kInf;
    lam(0, 1) = lam(1, 0) = -kInf;
    lam(1, 1) = kInf;
  } else {
    lam(0, 0) = t * t * t * tan_ratio_minus_one_over_s(s1);
    lam(0, 1) = lam(1, 0) = -t * t * sec_minus_one_over_s(s1);
    lam(1, 1) = t * tan_over_x(s1);
  }
  const double c_diag = c_pole ? kInf : t * tan_over_x(s2);
  for (int i = 2; i < m - 1; ++i) lam(i, i) = c_diag;
  lam(m - 1, m - 1) = t;
  return lam;
}

double lambda_first_pole(const ComparisonMatrixSpec& spec) {
  spec.validate();
  const double kmax = std::max(spec.k1, spec.k2);
  if (kmax <= 0.0) return kInf;
  return kPi / (2.0 * std::sqrt(kmax));
}

Eigen::MatrixXd comparison_matrix_k(const ComparisonMatrixSpec& spec) {
  spec.validate();
  const int m = 2 * spec.half_dim + 1;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
  k(1, 1) = spec.k1;
  for (int i = 2; i < m - 1; ++i) k(i, i) = spec.k2;
  return k;
}

}  // namespace mcp
