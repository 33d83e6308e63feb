#pragma once

#include "clab/geometry.hpp"

namespace clab {

// Dispersion inputs of the few-shot error bounds. `cdnv` is the symmetric
// (sigma_i^2 + sigma_j^2) / d_ij^2 average, `sqrt_cdnv` the average of its
// square root.
struct BoundInputs {
  int n_way = 2;  // C'
  int shots = 10;  // m
  double dir_cdnv = 0.0;
  double cdnv = 0.0;
  double sqrt_cdnv = 0.0;
};

BoundInputs bound_inputs(const DispersionSummary& summary, int n_way, int shots);

// (C' - 1)(1 + 1/m) V. The prior-work bound hides an unknown constant; this
// fixes it at 1, so the value is a reference curve, not a certified bound.
double baseline_bound(const BoundInputs& in);

// (C' - 1)[8 Vt + 8 Vs / sqrt(m) + 8 V / sqrt(m) + 4 V / m], m >= 10.
double prop1_bound(const BoundInputs& in);

struct BoundEvaluation {
  double a = 0.0;
  double tau = 0.0;  // 1/2 - 2/a - 2^{3/2} / (a m)
  double value = 0.0;
};

// (C' - 1)[tau^-2 Vt + (a/4)(2 Vs / sqrt(m) + 2 V / sqrt(m) + V / m)], a >= 5.
BoundEvaluation general_bound(const BoundInputs& in, double a);

// Positive root of y^3 - 8 F y - 16 F A = 0 (zero when F = 0). Uses the
// Cardano form when A^2 >= 8F/27 and the trigonometric form otherwise.
double solve_stationary_cubic(double f, double a);

// The two closed forms individually, for cross-checking near the switch.
// cubic_root_cardano needs A^2 >= 8F/27; cubic_root_trigonometric needs
// A^2 <= 8F/27 (the arccos argument is clamped to [-1, 1]).
double cubic_root_cardano(double f, double a);
double cubic_root_trigonometric(double f, double a);

struct CorSolution {
  double A = 0.0;
  double b_lin = 0.0;  // (1/4)(2 Vs / sqrt(m) + 2 V / sqrt(m) + V / m)
  double F = 0.0;      // 2 Vt A / b_lin
  double y_star = 0.0;
  double a_star = 0.0;  // 2A + y*
  double a_opt = 0.0;   // max(5, a*); +inf when b_lin = 0
  double bound = 0.0;   // (C' - 1) E(a_opt)
};

// Minimizes general_bound over a >= 5 through its stationary cubic.
CorSolution cor1_bound(const BoundInputs& in);

}  // namespace clab
