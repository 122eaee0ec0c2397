#include "jsrcert/certify.hpp"

#include "jsrcert/errors.hpp"

namespace jsrcert {

CertifyResult certify(const ObservationSet& obs, const CertifyRequest& request) {
  return certify(obs.endpoints(), request, obs.provenance);
}

CertifyResult certify(const EndpointSet& obs, const CertifyRequest& request, const Provenance& provenance) {
  request.solve.validate();
  ConfidenceBudget budget;
  budget.beta = request.beta;
  budget.beta1 = request.beta1;
  budget.modes = request.modes_upper;
  budget.trace_length = obs.trace_length;
  budget.samples = static_cast<long>(obs.size());
  budget.dim = obs.dim;
  budget.degree = request.degree;
  budget.validate();
  const long required = min_samples_for_degree(obs.dim, request.degree);
  if (budget.samples < required) {
    throw InvalidArgument("degree " + std::to_string(request.degree) + " needs at least N = " +
                          std::to_string(required) + " trajectories, got " + std::to_string(budget.samples));
  }

  CertifyResult out;
  const double lambda_star = solve_lambda(obs);
  out.solution = solve_gamma(obs, request.degree, request.solve);
  const LyapunovCandidate& cand = out.solution.candidate;
  out.report = jsr_upper_bound(cand.gamma, cand.kappa, lambda_star, budget);
  out.report.gamma_star = out.solution.gamma_star;
  out.report.gamma_certified = cand.gamma;
  out.report.c_bound_active = cand.c_bound_active;
  out.report.source = provenance.source;
  out.report.seed = provenance.seed;
  out.report.generator = provenance.generator;
  out.report.c_bound = request.solve.c_bound;
  out.report.bisection_rel_tol = request.solve.bisection_rel_tol;
  out.report.feasibility_margin = request.solve.feasibility_margin;
  out.report.tiebreak_slack = request.solve.tiebreak_slack;
  return out;
}

}  // namespace jsrcert
