#include "clab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "clab/error.hpp"

namespace clab {

namespace {

constexpr double kTwoPow32 = 2.0 * std::numbers::sqrt2;  // 2^{3/2}

void validate(const BoundInputs& in, bool need_prop1_shots) {
  if (in.n_way < 2) throw DomainError("bounds need C' >= 2");
  if (in.shots < 1) throw DomainError("bounds need m >= 1");
  if (need_prop1_shots && in.shots < 10) {
    throw DomainError("this bound needs m >= 10 (got m=" + std::to_string(in.shots) + ")");
  }
  if (!(in.dir_cdnv >= 0.0) || !(in.cdnv >= 0.0) || !(in.sqrt_cdnv >= 0.0)) {
    throw DomainError("dispersions must be finite and nonnegative");
  }
}

double linear_coefficient(const BoundInputs& in) {
  const double m = in.shots;
  const double root_m = std::sqrt(m);
  return 0.25 * (2.0 * in.sqrt_cdnv / root_m + 2.0 * in.cdnv / root_m + in.cdnv / m);
}

double tau(double a, double m) { return 0.5 - 2.0 / a - kTwoPow32 / (a * m); }

}  // namespace

BoundInputs bound_inputs(const DispersionSummary& summary, int n_way, int shots) {
  return BoundInputs{n_way, shots, summary.dir_cdnv_avg, summary.cdnv_sym_avg, summary.sqrt_cdnv_avg};
}

double baseline_bound(const BoundInputs& in) {
  validate(in, false);
  return (in.n_way - 1) * (1.0 + 1.0 / in.shots) * in.cdnv;
}

double prop1_bound(const BoundInputs& in) {
  validate(in, true);
  const double m = in.shots;
  const double root_m = std::sqrt(m);
  return (in.n_way - 1) *
         (8.0 * in.dir_cdnv + 8.0 * in.sqrt_cdnv / root_m + 8.0 * in.cdnv / root_m + 4.0 * in.cdnv / m);
}

BoundEvaluation general_bound(const BoundInputs& in, double a) {
  validate(in, false);
  if (!(a >= 5.0)) throw DomainError("general bound needs a >= 5");
  BoundEvaluation out;
  out.a = a;
  out.tau = tau(a, in.shots);
  if (!(out.tau > 0.0)) throw DomainError("tau(a, m) must be positive");
  const double lin = linear_coefficient(in);
  // a = +inf is allowed: tau -> 1/2 and the linear term vanishes only if b_lin = 0.
  const double lin_term = lin == 0.0 ? 0.0 : a * lin;
  out.value = (in.n_way - 1) * (in.dir_cdnv / (out.tau * out.tau) + lin_term);
  return out;
}

double cubic_root_cardano(double f, double a) {
  const double disc = a * a - 8.0 * f / 27.0;
  if (disc < 0.0) throw DomainError("Cardano form needs A^2 >= 8F/27");
  const double root = std::sqrt(disc);
  const double big = a + root;
  // a - root written as (8F/27) / (a + root) to avoid cancellation.
  const double small = (8.0 * f / 27.0) / big;
  return std::cbrt(8.0 * f * big) + std::cbrt(8.0 * f * small);
}

double cubic_root_trigonometric(double f, double a) {
  if (!(f > 0.0)) throw DomainError("trigonometric form needs F > 0");
  const double arg = std::clamp(3.0 * a * std::sqrt(3.0 / (8.0 * f)), -1.0, 1.0);
  return 4.0 * std::sqrt(2.0 * f / 3.0) * std::cos(std::acos(arg) / 3.0);
}

double solve_stationary_cubic(double f, double a) {
  if (!(f >= 0.0) || !std::isfinite(f)) throw DomainError("cubic needs F >= 0");
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("cubic needs A > 0");
  if (f == 0.0) return 0.0;
  return a * a >= 8.0 * f / 27.0 ? cubic_root_cardano(f, a) : cubic_root_trigonometric(f, a);
}

CorSolution cor1_bound(const BoundInputs& in) {
  validate(in, true);
  CorSolution out;
  out.A = 2.0 + kTwoPow32 / in.shots;
  out.b_lin = linear_coefficient(in);
  if (out.b_lin == 0.0) {
    // E(a) = tau(a)^-2 Vt decreases to 4 Vt as a -> infinity.
    out.F = std::numeric_limits<double>::infinity();
    out.y_star = std::numeric_limits<double>::infinity();
    out.a_star = std::numeric_limits<double>::infinity();
    out.a_opt = std::numeric_limits<double>::infinity();
    out.bound = (in.n_way - 1) * 4.0 * in.dir_cdnv;
    return out;
  }
  out.F = 2.0 * in.dir_cdnv * out.A / out.b_lin;
  out.y_star = solve_stationary_cubic(out.F, out.A);
  out.a_star = 2.0 * out.A + out.y_star;
  out.a_opt = std::max(5.0, out.a_star);
  out.bound = general_bound(in, out.a_opt).value;
  return out;
}

}  // namespace clab
