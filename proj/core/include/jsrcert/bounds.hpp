#pragma once

// Probabilistic JSR upper bounds assembled from the sampled optima.
//
// With eps_sos the covering measure, eps_1 the norm-bound measure,
// Delta = sqrt(2 - 2 delta(eps_sos)), A = lambda* / delta(eps_1)^{1/l} and
// f(d, Delta) = sqrt(D) ((1 + Delta)^d - 1 - (1 - 1/sqrt(D)) Delta^d):
//
//   rho(M) <= ( gamma*^{dl} + (gamma*^{dl} + A^d) f kappa(P*) )^{1/(dl)}
//
// holds with probability at least beta + beta1 - 1. "gamma*^{dl}" is read as
// (gamma*)^{dl}. For d = 1, f = Delta and this is the quadratic bound.
// +inf is a regular outcome (delta(eps_1) = 0), never an error.

#include <cstdint>
#include <string>

#include "jsrcert/cap_geometry.hpp"

namespace jsrcert {

struct CertificateReport {
  int d = 1;
  int l = 1;
  long N = 0;
  int m = 1;
  int n = 2;
  long D = 2;
  double gamma_star = 0.0;
  double gamma_certified = 0.0;  // gamma at which the reported P satisfies the constraints
  double kappa = 1.0;
  double lambda_star = 0.0;
  double beta = 0.0;
  double beta1 = 0.0;
  double eps = 0.0;
  double eps1 = 0.0;
  double delta_eps = 0.0;
  double delta_eps1 = 0.0;
  double Delta = 0.0;
  double f_value = 0.0;
  double A_value = 0.0;
  double jsr_upper_bound = 0.0;
  double confidence = 0.0;
  bool finite = false;

  // Regime flags.
  bool eps_hemisphere = false;   // delta(eps) = 0
  bool eps1_hemisphere = false;  // delta(eps_1) = 0, bound is +inf
  bool confidence_vacuous = false;
  bool c_bound_active = false;

  // Provenance.
  std::string source;
  std::uint64_t seed = 0;
  std::string generator;
  double c_bound = 0.0;
  double bisection_rel_tol = 0.0;
  double feasibility_margin = 0.0;
  double tiebreak_slack = 0.0;
};

/// lambda* / delta(eps_1)^{1/l}; +inf when delta(eps_1) = 0.
double bound_B(double lambda_star, double eps1, int l, int n);

double f_correction(int d, double Delta, long D);

/// Smallest N the SOS bound accepts: D(D+1)/2 + 1.
long min_samples_for_degree(int n, int d);

/// Fills every derived quantity of the report from the sampled optima.
/// Throws InvalidArgument when budget.samples is below min_samples_for_degree.
CertificateReport jsr_upper_bound(double gamma_star, double kappa, double lambda_star,
                                  const ConfidenceBudget& budget);

/// Bound formula alone, d = 1 form: (g^l + (g^l + A) Delta kappa)^{1/l}.
double quadratic_bound(double gamma, double kappa, double A, double Delta, int l);
/// Bound formula alone, general d.
double sos_bound(double gamma, double kappa, double A, double f, int d, int l);

/// JSON with the field names above; non-finite numbers are written as null.
std::string to_json(const CertificateReport& report);

}  // namespace jsrcert
