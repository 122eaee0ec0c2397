#include "jsrcert/bounds.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "jsrcert/errors.hpp"
#include "jsrcert/lift_algebra.hpp"

namespace jsrcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

double bound_B(double lambda_star, double eps1, int l, int n) {
  if (!(lambda_star >= 0.0)) throw InvalidArgument("bound_B: lambda* must be non-negative");
  if (l < 1) throw InvalidArgument("bound_B: l must be >= 1");
  const double delta = delta_cap(eps1, n);
  if (delta == 0.0) return kInf;
  return lambda_star / std::pow(delta, 1.0 / l);
}

double f_correction(int d, double Delta, long D) {
  if (d < 1 || D < 1) throw InvalidArgument("f_correction: d and D must be >= 1");
  // Expanded binomially: sqrt(D) sum_{k=1}^{d-1} C(d,k) Delta^k + Delta^d, free of cancellation.
  const double root = std::sqrt(static_cast<double>(D));
  double inner = 0.0;
  double binom = 1.0;
  for (int k = 1; k < d; ++k) {
    binom = binom * (d - k + 1) / k;
    inner += binom * std::pow(Delta, k);
  }
  return root * inner + std::pow(Delta, d);
}

long min_samples_for_degree(int n, int d) {
  const auto big_d = static_cast<long>(lift_dimension(n, d));
  return big_d * (big_d + 1) / 2 + 1;
}

double quadratic_bound(double gamma, double kappa, double A, double Delta, int l) {
  const double gl = std::pow(gamma, l);
  return std::pow(gl + (gl + A) * Delta * kappa, 1.0 / l);
}

double sos_bound(double gamma, double kappa, double A, double f, int d, int l) {
  const double gdl = std::pow(gamma, d * l);
  return std::pow(gdl + (gdl + std::pow(A, d)) * f * kappa, 1.0 / (d * l));
}

CertificateReport jsr_upper_bound(double gamma_star, double kappa, double lambda_star,
                                  const ConfidenceBudget& budget) {
  budget.validate();
  if (!(gamma_star >= 0.0) || !(lambda_star >= 0.0)) throw InvalidArgument("gamma* and lambda* must be non-negative");
  if (!(kappa >= 1.0)) throw InvalidArgument("kappa must be >= 1");
  const long required = min_samples_for_degree(budget.dim, budget.degree);
  if (budget.samples < required) {
    throw InvalidArgument("degree " + std::to_string(budget.degree) + " in dimension " + std::to_string(budget.dim) +
                          " needs at least N = " + std::to_string(required) + " samples, got " +
                          std::to_string(budget.samples));
  }

  CertificateReport r;
  r.d = budget.degree;
  r.l = budget.trace_length;
  r.N = budget.samples;
  r.m = budget.modes;
  r.n = budget.dim;
  r.D = static_cast<long>(lift_dimension(budget.dim, budget.degree));
  r.gamma_star = gamma_star;
  r.gamma_certified = gamma_star;
  r.kappa = kappa;
  r.lambda_star = lambda_star;
  r.beta = budget.beta;
  r.beta1 = budget.beta1;

  const double ml = budget.modes_power();
  r.eps = eps_cover(budget.beta, ml, r.D * (r.D + 1) / 2, budget.samples);
  r.eps1 = eps_one(budget.beta1, budget.modes, budget.trace_length, budget.samples);

  const CapParams cover = cap_params(r.eps, budget.dim);
  r.delta_eps = cover.delta;
  r.Delta = cover.chord;
  r.eps_hemisphere = cover.regime == CapRegime::Hemisphere;

  if (r.eps1 > 0.0) {
    const CapParams norm_cap = cap_params(r.eps1, budget.dim);
    r.delta_eps1 = norm_cap.delta;
    r.eps1_hemisphere = norm_cap.regime == CapRegime::Hemisphere;
    r.A_value = bound_B(lambda_star, r.eps1, budget.trace_length, budget.dim);
  } else {
    // beta1 = 0: eps_1 = 0 and delta(0^+) = 1.
    r.delta_eps1 = 1.0;
    r.A_value = lambda_star;
  }

  r.f_value = f_correction(budget.degree, r.Delta, r.D);
  r.jsr_upper_bound = std::isfinite(r.A_value)
                          ? sos_bound(gamma_star, kappa, r.A_value, r.f_value, budget.degree, budget.trace_length)
                          : kInf;
  r.finite = std::isfinite(r.jsr_upper_bound);

  const double raw_confidence = budget.beta + budget.beta1 - 1.0;
  r.confidence = std::max(raw_confidence, 0.0);
  r.confidence_vacuous = raw_confidence <= 0.0;
  return r;
}

std::string to_json(const CertificateReport& r) {
  nlohmann::ordered_json j;
  j["d"] = r.d;
  j["l"] = r.l;
  j["N"] = r.N;
  j["m"] = r.m;
  j["n"] = r.n;
  j["D"] = r.D;
  j["gamma_star"] = number(r.gamma_star);
  j["gamma_certified"] = number(r.gamma_certified);
  j["kappa"] = number(r.kappa);
  j["lambda_star"] = number(r.lambda_star);
  j["beta"] = r.beta;
  j["beta1"] = r.beta1;
  j["eps"] = number(r.eps);
  j["eps1"] = number(r.eps1);
  j["delta_eps"] = number(r.delta_eps);
  j["delta_eps1"] = number(r.delta_eps1);
  j["Delta"] = number(r.Delta);
  j["f_value"] = number(r.f_value);
  j["A_value"] = number(r.A_value);
  j["jsr_upper_bound"] = number(r.jsr_upper_bound);
  j["confidence"] = r.confidence;
  j["finite"] = r.finite;
  j["regime"] = {
      {"eps_hemisphere", r.eps_hemisphere},
      {"eps1_hemisphere", r.eps1_hemisphere},
      {"confidence_vacuous", r.confidence_vacuous},
      {"c_bound_active", r.c_bound_active},
  };
  j["provenance"] = {
      {"source", r.source},
      {"seed", r.seed},
      {"generator", r.generator},
      {"C_bound", r.c_bound},
      {"bisection_rel_tol", r.bisection_rel_tol},
      {"feasibility_margin", r.feasibility_margin},
      {"tiebreak_slack", r.tiebreak_slack},
  };
  return j.dump(2);
}

}  // namespace jsrcert
