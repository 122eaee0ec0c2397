#pragma once

// Spherical-cap geometry and the sample-complexity conversions between the
// cap measure eps, the confidence beta, and the sample count N.

namespace jsrcert {

/// Regularized incomplete beta I(x; a, b), x in [0, 1], a, b > 0.
double reg_inc_beta(double x, double a, double b);

/// Inverse in x of reg_inc_beta: returns x with I(x; a, b) = y.
double inv_reg_inc_beta(double y, double a, double b);

/// Which formula produced delta: a proper cap (eps < 1/2) or the open
/// hemisphere convention delta = 0 (eps >= 1/2).
enum class CapRegime { Cap, Hemisphere };

struct CapParams {
  double epsilon = 0.0;
  double delta = 0.0;  // cap threshold: C(c, eps) = {x : c.x > delta}
  double chord = 0.0;  // sqrt(2 - 2 delta): bound on |x - c| for x in the cap
  CapRegime regime = CapRegime::Cap;
};

/// Cap threshold delta(eps) on the unit sphere of R^n, n >= 2.
double delta_cap(double eps, int n);
CapParams cap_params(double eps, int n);

/// eps = m^l (1 - ((1 - beta) / (d1 + 1))^(1/N)), d1 the free-variable count of
/// the Lyapunov matrix (n(n+1)/2 quadratic, D(D+1)/2 SOS).
double eps_cover(double beta, double modes_power, long d1, long samples);

struct Coverage {
  double beta = 0.0;
  bool vacuous = false;  // raw value was negative and has been clamped to 0
};

/// beta = 1 - (d1 + 1)(1 - eps / m^l)^N, clamped at 0.
Coverage beta_from_eps(double eps, double modes_power, long d1, long samples);

/// eps_1 = m^l / 2 (1 - (1 - beta1)^(1/N)).
double eps_one(double beta1, int modes, int trace_length, long samples);

/// Smallest N with eps_one(beta1, m, l, N) < 1/2, i.e. the first N for which
/// the norm bound, and hence the JSR bound, is finite.
long min_samples_finite(double beta1, int modes, int trace_length);

struct ConfidenceBudget {
  double beta = 0.95;
  double beta1 = 0.95;
  int modes = 1;         // m, upper bound on the number of modes
  int trace_length = 1;  // l
  long samples = 1;      // N
  int dim = 2;           // n
  int degree = 1;        // d

  double modes_power() const;  // m^l
  void validate() const;
};

}  // namespace jsrcert
