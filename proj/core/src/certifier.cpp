#include "jsrcert/certifier.hpp"

#include <algorithm>
#include <cmath>

#include "barrier_sdp.hpp"
#include "jsrcert/errors.hpp"

namespace jsrcert {

namespace {

LyapunovCandidate make_candidate(int degree, double gamma, SymMatrix p, const SolveOptions& opts) {
  LyapunovCandidate c;
  c.degree = degree;
  c.gamma = gamma;
  c.kappa = matrix_metrics(p).kappa;
  c.c_bound_active = p.lambda_max() >= opts.c_bound * (1.0 - 1e-3) * p.lambda_min();
  c.p = std::move(p);
  return c;
}

enum class ProblemMode { Margin, Condition };

detail::BarrierProblem make_problem(const ConstraintSystem& system, ProblemMode mode, const SolveOptions& opts,
                                    const std::optional<SymMatrix>& reference = std::nullopt) {
  const LiftedEndpoints& data = system.data();
  const double g = system.growth();
  detail::BarrierProblem problem;
  problem.dim = data.lifted_dim;
  problem.coeffs = data.image_features - g * data.start_features;
  if (mode == ProblemMode::Margin) {
    if (reference) {
      // u^T R u with R = P_ref / lambda_max(P_ref), so I / kappa^2 <= R <= I.
      problem.margin = g * (data.start_features * reference->scaled(1.0 / reference->lambda_max()).packed());
    } else {
      problem.margin = g * data.start_norm2;
    }
    problem.floor = 1.0 / opts.c_bound;
    problem.s_coef = 0.0;
  } else {
    problem.margin = Vector::Zero(problem.coeffs.rows());
    problem.floor = 0.0;
    problem.s_coef = 1.0;
  }

  // Rows with no coefficients at all are satisfied by every P.
  std::vector<Eigen::Index> keep;
  keep.reserve(system.size());
  for (Eigen::Index i = 0; i < problem.coeffs.rows(); ++i) {
    if (problem.margin(i) != 0.0 || problem.coeffs.row(i).cwiseAbs().maxCoeff() != 0.0) keep.push_back(i);
  }
  if (keep.size() != system.size()) {
    problem.coeffs = Matrix(problem.coeffs(keep, Eigen::all));
    problem.margin = Vector(problem.margin(keep));
  }
  return problem;
}

// Scaled so that lambda_min = 1; lambda_max <= C follows from I/C <= P <= I.
SymMatrix normalized_witness(const Vector& packed, std::size_t dim) {
  const SymMatrix p(dim, packed);
  return p.scaled(1.0 / p.lambda_min());
}

detail::BarrierOutcome run_margin(const ConstraintSystem& system, const SolveOptions& opts,
                                  const std::optional<SymMatrix>& reference = std::nullopt) {
  detail::BarrierSettings settings;
  settings.stop_above = 0.0;
  settings.stop_below = 0.0;
  settings.abs_gap = opts.feasibility_margin;
  settings.max_newton_steps = opts.max_newton_steps;
  return detail::maximize_margin(make_problem(system, ProblemMode::Margin, opts, reference), settings);
}

}  // namespace

void SolveOptions::validate() const {
  if (!(c_bound > 1.0)) throw InvalidArgument("--C-bound must exceed 1");
  if (!(bisection_rel_tol > 0.0 && bisection_rel_tol < 1.0)) throw InvalidArgument("--bisect-tol must lie in (0, 1)");
  if (!(feasibility_margin > 0.0)) throw InvalidArgument("feasibility margin must be positive");
  if (!(tiebreak_slack > 0.0)) throw InvalidArgument("tie-break slack must be positive");
  if (max_newton_steps < 1) throw InvalidArgument("--max-newton must be >= 1");
}

std::shared_ptr<const LiftedEndpoints> lift_endpoints(const EndpointSet& obs, int degree) {
  if (degree < 1) throw InvalidArgument("degree must be >= 1");
  if (obs.dim < 1) throw InvalidArgument("observation dimension must be >= 1");
  const Lifter lifter(obs.dim, degree);
  auto data = std::make_shared<LiftedEndpoints>();
  data->dim = obs.dim;
  data->degree = degree;
  data->trace_length = obs.trace_length;
  data->lifted_dim = lifter.dim();
  const auto rows = static_cast<Eigen::Index>(obs.size());
  const auto cols = static_cast<Eigen::Index>(packed_size(lifter.dim()));
  data->image_features.resize(rows, cols);
  data->start_features.resize(rows, cols);
  data->start_norm2.resize(rows);
  data->image_norm2.resize(rows);
  data->lifted_start.reserve(obs.size());
  data->lifted_image.reserve(obs.size());
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto k = static_cast<std::size_t>(i);
    Vector u = lifter.lift(obs.x0[k]);
    Vector v = lifter.lift(obs.xl[k]);
    data->start_features.row(i) = quadratic_features(u).transpose();
    data->image_features.row(i) = quadratic_features(v).transpose();
    data->start_norm2(i) = u.squaredNorm();
    data->image_norm2(i) = v.squaredNorm();
    data->lifted_start.push_back(std::move(u));
    data->lifted_image.push_back(std::move(v));
  }
  return data;
}

ConstraintSystem::ConstraintSystem(std::shared_ptr<const LiftedEndpoints> data, double gamma)
    : data_(std::move(data)), gamma_(gamma) {
  if (!(gamma >= 0.0)) throw InvalidArgument("gamma must be non-negative");
  growth_ = std::pow(gamma, 2.0 * data_->degree * data_->trace_length);
}

Vector ConstraintSystem::row(std::size_t i) const {
  const auto r = static_cast<Eigen::Index>(i);
  return (data_->image_features.row(r) - growth_ * data_->start_features.row(r)).transpose();
}

double ConstraintSystem::max_violation(const SymMatrix& p) const {
  if (size() == 0) return -std::numeric_limits<double>::infinity();
  const Vector values = data_->image_features * p.packed() - growth_ * (data_->start_features * p.packed());
  return values.maxCoeff();
}

double ConstraintSystem::max_relative_violation(const SymMatrix& p) const {
  double worst = -std::numeric_limits<double>::infinity();
  const Vector lhs = data_->image_features * p.packed();
  const Vector rhs = data_->start_features * p.packed();
  for (Eigen::Index i = 0; i < lhs.size(); ++i) {
    worst = std::max(worst, (lhs(i) - growth_ * rhs(i)) / std::max(rhs(i), 1e-300));
  }
  return worst;
}

ConstraintSystem assemble_constraints(const EndpointSet& obs, int degree, double gamma) {
  return ConstraintSystem(lift_endpoints(obs, degree), gamma);
}

FeasibilityResult feasibility_check(const ConstraintSystem& system, const SolveOptions& opts,
                                    const std::optional<SymMatrix>& reference) {
  const std::size_t dim = system.lifted_dim();
  FeasibilityResult result;

  if (system.growth() == 0.0) {
    // Only v_i^T P v_i <= 0 remains, which P >= I allows iff every v_i = 0.
    const bool all_zero = system.size() == 0 || system.data().image_norm2.maxCoeff() == 0.0;
    result.status = all_zero ? FeasibilityStatus::Feasible : FeasibilityStatus::Infeasible;
    if (all_zero) {
      result.p = SymMatrix::identity(dim);
      result.margin = 1.0;
      result.margin_upper = 1.0;
    }
    return result;
  }

  const detail::BarrierOutcome outcome = run_margin(system, opts, reference);
  result.newton_steps = outcome.newton_steps;
  result.margin = outcome.point.s;
  result.margin_upper = outcome.upper_bound;
  if (outcome.status == detail::BarrierStatus::IterationLimit) {
    result.status = FeasibilityStatus::IterationLimit;
    return result;
  }
  if (outcome.point.s >= 0.0) {
    result.status = FeasibilityStatus::Feasible;
    result.p = normalized_witness(outcome.point.p, dim);
  } else {
    result.status = FeasibilityStatus::Infeasible;
  }
  return result;
}

double solve_lambda(const EndpointSet& obs) {
  if (obs.size() == 0) throw InvalidArgument("solve_lambda: empty observation set");
  double best = 0.0;
  for (const auto& x : obs.xl) best = std::max(best, x.norm());
  return best;
}

namespace {

BisectionResult bisect_lifted(const std::shared_ptr<const LiftedEndpoints>& data, double lambda_star,
                              const SolveOptions& opts) {
  const int degree = data->degree;
  BisectionResult result;
  if (lambda_star == 0.0) {
    result.gamma_star = 0.0;
    result.witness = make_candidate(degree, 0.0, SymMatrix::identity(data->lifted_dim), opts);
    return result;
  }
  // P = I is feasible at the upper end: |v_i| = |xl_i|^d <= lambda*^d = gamma^{dl}.
  double hi = std::pow(lambda_star, 1.0 / data->trace_length);
  double lo = 0.0;
  result.witness = make_candidate(degree, hi, SymMatrix::identity(data->lifted_dim), opts);
  while (hi - lo > opts.bisection_rel_tol * std::max(hi, 1e-12)) {
    const double mid = 0.5 * (lo + hi);
    const FeasibilityResult check = feasibility_check(ConstraintSystem(data, mid), opts, result.witness.p);
    ++result.steps;
    if (check.status == FeasibilityStatus::IterationLimit) {
      throw SolverError("feasibility oracle hit its iteration limit at gamma = " + std::to_string(mid));
    }
    if (check.feasible()) {
      hi = mid;
      result.witness = make_candidate(degree, mid, *check.p, opts);
    } else {
      lo = mid;
    }
  }
  result.gamma_star = hi;
  return result;
}

LyapunovCandidate tie_break_lifted(const std::shared_ptr<const LiftedEndpoints>& data, double gamma_star,
                                   const SolveOptions& opts, const std::optional<LyapunovCandidate>& witness) {
  const int degree = data->degree;
  const std::size_t dim = data->lifted_dim;
  if (gamma_star == 0.0) {
    // Feasible only when every image vanishes, leaving P >= I alone: P = I.
    return make_candidate(degree, 0.0, SymMatrix::identity(dim), opts);
  }

  const double gamma = gamma_star * (1.0 + opts.tiebreak_slack);
  const ConstraintSystem system(data, gamma);

  // Strictly interior start: a P feasible at gamma* is strictly feasible at the
  // slackened gamma because u^T P u > 0. Without one, solve the margin problem.
  Vector start_p;
  if (witness && witness->gamma <= gamma) {
    start_p = witness->p.scaled(0.5 / witness->p.lambda_max()).packed();
  } else {
    const detail::BarrierOutcome start = run_margin(system, opts);
    if (start.status == detail::BarrierStatus::IterationLimit) {
      throw SolverError("tie-break: iteration limit while finding an interior point");
    }
    if (!(start.point.s > 0.0)) {
      throw SolverError("tie-break: no strictly feasible P at gamma* (1 + slack); internal inconsistency");
    }
    start_p = start.point.p;
  }

  detail::BarrierSettings settings;
  settings.start = detail::BarrierPoint{start_p, 0.5 * SymMatrix(dim, start_p).lambda_min()};
  settings.rel_gap = 1e-8;
  settings.abs_gap = 1e-15;
  settings.max_newton_steps = opts.max_newton_steps;
  const auto outcome = detail::maximize_margin(make_problem(system, ProblemMode::Condition, opts), settings);
  if (outcome.status == detail::BarrierStatus::IterationLimit) {
    throw SolverError("tie-break: iteration limit");
  }

  LyapunovCandidate tied = make_candidate(degree, gamma, normalized_witness(outcome.point.p, dim), opts);
  if (witness && witness->kappa < tied.kappa) return *witness;
  return tied;
}

}  // namespace

BisectionResult bisect_gamma(const EndpointSet& obs, int degree, const SolveOptions& opts) {
  opts.validate();
  const double lambda_star = solve_lambda(obs);
  return bisect_lifted(lift_endpoints(obs, degree), lambda_star, opts);
}

GammaSolution solve_gamma(const EndpointSet& obs, int degree, const SolveOptions& opts) {
  opts.validate();
  const double lambda_star = solve_lambda(obs);
  const auto data = lift_endpoints(obs, degree);
  const BisectionResult bisection = bisect_lifted(data, lambda_star, opts);
  GammaSolution out;
  out.gamma_star = bisection.gamma_star;
  out.witness = bisection.witness;
  out.bisection_steps = bisection.steps;
  out.candidate = tie_break_lifted(data, bisection.gamma_star, opts, bisection.witness);
  return out;
}

LyapunovCandidate tie_break_P(const EndpointSet& obs, int degree, double gamma_star, const SolveOptions& opts,
                              const std::optional<LyapunovCandidate>& witness) {
  opts.validate();
  if (obs.size() == 0) throw InvalidArgument("tie_break_P: empty observation set");
  return tie_break_lifted(lift_endpoints(obs, degree), gamma_star, opts, witness);
}

}  // namespace jsrcert
