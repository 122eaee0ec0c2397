#include "jsrcert/cap_geometry.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "jsrcert/errors.hpp"

namespace jsrcert {

namespace {

constexpr double kTiny = 1e-300;
constexpr int kMaxFractionTerms = 1000;
constexpr int kMaxInverseIterations = 200;

void check_shape(double a, double b, const char* fn) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw InvalidArgument(std::string(fn) + ": shape parameters must be positive and finite");
  }
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Modified Lentz evaluation of the continued fraction for I_x(a, b); valid and
// fast for x < (a + 1) / (a + b + 2).
double beta_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxFractionTerms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) return h;
  }
  throw SolverError("reg_inc_beta: continued fraction did not converge");
}

double front_factor(double x, double a, double b) {
  return std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
}

double beta_density(double x, double a, double b) {
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b));
}

}  // namespace

double reg_inc_beta(double x, double a, double b) {
  check_shape(a, b, "reg_inc_beta");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("reg_inc_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) return front_factor(x, a, b) * beta_fraction(x, a, b) / a;
  return 1.0 - front_factor(x, a, b) * beta_fraction(1.0 - x, b, a) / b;
}

double inv_reg_inc_beta(double y, double a, double b) {
  check_shape(a, b, "inv_reg_inc_beta");
  if (!(y >= 0.0 && y <= 1.0)) throw InvalidArgument("inv_reg_inc_beta: y must lie in [0, 1]");
  if (y == 0.0) return 0.0;
  if (y == 1.0) return 1.0;

  // Bracketed Newton: keep [lo, hi] with I(lo) < y < I(hi) and fall back to
  // bisection whenever the Newton step leaves the bracket.
  double lo = 0.0;
  double hi = 1.0;
  double x = a / (a + b);
  for (int it = 0; it < kMaxInverseIterations; ++it) {
    const double f = reg_inc_beta(x, a, b) - y;
    if (f == 0.0) return x;
    if (f < 0.0) lo = x; else hi = x;
    const double slope = beta_density(x, a, b);
    double next = (slope > 0.0 && std::isfinite(slope)) ? x - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(next, 1e-300)) {
      return next;
    }
    if (hi - lo <= std::numeric_limits<double>::min()) return next;
    x = next;
  }
  return x;
}

double delta_cap(double eps, int n) { return cap_params(eps, n).delta; }

CapParams cap_params(double eps, int n) {
  if (n < 2) throw InvalidArgument("delta_cap: dimension must be >= 2");
  if (!(eps > 0.0)) throw InvalidArgument("delta_cap: eps must be positive");
  CapParams p;
  p.epsilon = eps;
  if (eps >= 0.5) {
    p.delta = 0.0;
    p.regime = CapRegime::Hemisphere;
  } else {
    const double a = 0.5 * (n - 1);
    // delta^2 = 1 - I^{-1}(2 eps; (n-1)/2, 1/2). For small caps solve for
    // the complement directly; for wide caps use the reflected parameters so
    // that the small quantity delta^2 is what the inverse returns.
    if (2.0 * eps <= 0.5) {
      p.delta = std::sqrt(std::max(0.0, 1.0 - inv_reg_inc_beta(2.0 * eps, a, 0.5)));
    } else {
      p.delta = std::sqrt(inv_reg_inc_beta(1.0 - 2.0 * eps, 0.5, a));
    }
    p.regime = CapRegime::Cap;
  }
  p.chord = std::sqrt(2.0 - 2.0 * p.delta);
  return p;
}

double eps_cover(double beta, double modes_power, long d1, long samples) {
  if (!(beta >= 0.0 && beta < 1.0)) throw InvalidArgument("eps_cover: beta must lie in [0, 1)");
  if (d1 < 1 || samples < 1) throw InvalidArgument("eps_cover: d1 and N must be >= 1");
  const double ratio = (1.0 - beta) / (static_cast<double>(d1) + 1.0);
  return -modes_power * std::expm1(std::log(ratio) / static_cast<double>(samples));
}

Coverage beta_from_eps(double eps, double modes_power, long d1, long samples) {
  if (!(eps > 0.0)) throw InvalidArgument("beta_from_eps: eps must be positive");
  if (eps > modes_power) throw InvalidArgument("beta_from_eps: eps exceeds m^l");
  const double miss = std::exp(static_cast<double>(samples) * std::log1p(-eps / modes_power));
  const double raw = 1.0 - (static_cast<double>(d1) + 1.0) * miss;
  if (raw < 0.0) return {0.0, true};
  return {raw, false};
}

double eps_one(double beta1, int modes, int trace_length, long samples) {
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw InvalidArgument("eps_one: beta1 must lie in [0, 1)");
  if (samples < 1) throw InvalidArgument("eps_one: N must be >= 1");
  const double ml = std::pow(static_cast<double>(modes), trace_length);
  return -0.5 * ml * std::expm1(std::log1p(-beta1) / static_cast<double>(samples));
}

long min_samples_finite(double beta1, int modes, int trace_length) {
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw InvalidArgument("min_samples_finite: beta1 must lie in (0, 1)");
  if (modes < 1 || trace_length < 1) throw InvalidArgument("min_samples_finite: m and l must be >= 1");
  const double ml = std::pow(static_cast<double>(modes), trace_length);
  if (ml <= 1.0) return 1;
  // eps_one < 1/2  <=>  (1 - beta1)^(1/N) > 1 - 1/m^l  <=>  N > log(1-beta1) / log(1-1/m^l).
  const double threshold = std::log1p(-beta1) / std::log1p(-1.0 / ml);
  long n = std::max(1L, static_cast<long>(std::floor(threshold)));
  while (n > 1 && eps_one(beta1, modes, trace_length, n - 1) < 0.5) --n;
  while (!(eps_one(beta1, modes, trace_length, n) < 0.5)) ++n;
  return n;
}

double ConfidenceBudget::modes_power() const { return std::pow(static_cast<double>(modes), trace_length); }

void ConfidenceBudget::validate() const {
  if (!(beta >= 0.0 && beta < 1.0)) throw InvalidArgument("--beta must lie in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw InvalidArgument("--beta1 must lie in [0, 1)");
  if (modes < 1) throw InvalidArgument("--modes-upper must be >= 1");
  if (trace_length < 1) throw InvalidArgument("--len must be >= 1");
  if (samples < 1) throw InvalidArgument("sample count must be >= 1");
  if (dim < 2) throw InvalidArgument("state dimension must be >= 2");
  if (degree < 1) throw InvalidArgument("--degree must be >= 1");
}

}  // namespace jsrcert
