#pragma once

// Sampled Lyapunov programs. For degree d (d = 1 quadratic, d >= 2 SOS) and
// endpoint pairs (x0, xl) with u = x0^{[d]}, v = xl^{[d]}:
//
//   min gamma  s.t.  v_i^T P v_i <= gamma^{2dl} u_i^T P u_i  for all i,
//                    P >= I,  lambda_max(P) <= C.
//
// gamma is found by bisection over a semidefinite feasibility oracle; the
// returned P is the tie-broken one (smallest condition number).

#include <cstddef>
#include <memory>
#include <optional>

#include "jsrcert/lift_algebra.hpp"
#include "jsrcert/sampling.hpp"

namespace jsrcert {

struct SolveOptions {
  double c_bound = 1e8;             // the "large C" on ||P||
  double bisection_rel_tol = 1e-6;
  double feasibility_margin = 1e-9;  // resolution of the oracle on the relative margin
  double tiebreak_slack = 1e-7;     // tie-break solved at gamma* (1 + slack)
  int max_newton_steps = 4000;      // per barrier solve

  void validate() const;
};

struct LyapunovCandidate {
  int degree = 1;
  double gamma = 0.0;  // decrease constraints hold at this gamma
  SymMatrix p;
  double kappa = 1.0;
  bool c_bound_active = false;  // lambda_max / lambda_min within 0.1% of C
};

/// Lifted endpoint features shared by every gamma of one solve.
struct LiftedEndpoints {
  int dim = 0;
  int degree = 1;
  int trace_length = 1;
  std::size_t lifted_dim = 0;  // D
  Matrix image_features;       // N x D(D+1)/2, rows phi(v_i)
  Matrix start_features;       // N x D(D+1)/2, rows phi(u_i)
  Vector start_norm2;          // |u_i|^2
  Vector image_norm2;          // |v_i|^2
  std::vector<Vector> lifted_start;
  std::vector<Vector> lifted_image;

  std::size_t size() const { return static_cast<std::size_t>(image_features.rows()); }
};

std::shared_ptr<const LiftedEndpoints> lift_endpoints(const EndpointSet& obs, int degree);

/// Decrease constraints at a fixed gamma: row i reads
/// (phi(v_i) - gamma^{2dl} phi(u_i)) . packed(P) <= 0.
class ConstraintSystem {
 public:
  ConstraintSystem(std::shared_ptr<const LiftedEndpoints> data, double gamma);

  const LiftedEndpoints& data() const { return *data_; }
  double gamma() const { return gamma_; }
  /// gamma^{2dl}
  double growth() const { return growth_; }
  std::size_t size() const { return data_->size(); }
  std::size_t lifted_dim() const { return data_->lifted_dim; }
  std::size_t variable_count() const { return packed_size(data_->lifted_dim); }

  Vector row(std::size_t i) const;
  /// Largest v^T P v - gamma^{2dl} u^T P u over all constraints.
  double max_violation(const SymMatrix& p) const;
  /// Largest violation divided by u^T P u.
  double max_relative_violation(const SymMatrix& p) const;

 private:
  std::shared_ptr<const LiftedEndpoints> data_;
  double gamma_;
  double growth_;
};

ConstraintSystem assemble_constraints(const EndpointSet& obs, int degree, double gamma);

enum class FeasibilityStatus { Feasible, Infeasible, IterationLimit };

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::Infeasible;
  std::optional<SymMatrix> p;  // witness: P >= I, lambda_max <= C, constraints hold
  double margin = 0.0;         // best t found (see feasibility_check)
  double margin_upper = 0.0;   // upper bound on the optimal t
  int newton_steps = 0;

  bool feasible() const { return status == FeasibilityStatus::Feasible; }
};

/// Maximizes t over I/C <= P <= I subject to
///   v_i^T P v_i - gamma^{2dl} u_i^T P u_i <= -t gamma^{2dl} u_i^T R u_i,
/// R = I, or `reference` scaled to lambda_max = 1 (the bisection passes its
/// current witness, which keeps t in the units of the active constraints).
/// Feasible once some iterate has t >= 0 (witness rescaled to lambda_min = 1);
/// infeasible once the optimum is certified below 0, or when the optimum is
/// bracketed within feasibility_margin without reaching 0.
FeasibilityResult feasibility_check(const ConstraintSystem& system, const SolveOptions& opts,
                                    const std::optional<SymMatrix>& reference = std::nullopt);

/// Problem min lambda s.t. |xl_i| <= lambda: the largest observed endpoint norm.
double solve_lambda(const EndpointSet& obs);

struct BisectionResult {
  double gamma_star = 0.0;
  LyapunovCandidate witness;  // the bisection's feasible P at gamma_star
  int steps = 0;
};

/// Bisection only, without the tie-break.
BisectionResult bisect_gamma(const EndpointSet& obs, int degree, const SolveOptions& opts);

struct GammaSolution {
  double gamma_star = 0.0;
  LyapunovCandidate candidate;  // tie-broken
  LyapunovCandidate witness;    // raw bisection witness
  int bisection_steps = 0;
};

GammaSolution solve_gamma(const EndpointSet& obs, int degree, const SolveOptions& opts);

/// Minimizes lambda_max(P) subject to P >= I and the decrease constraints at
/// gamma_star (1 + tiebreak_slack), which minimizes kappa(P). When a witness
/// is supplied the better-conditioned of the two is returned.
LyapunovCandidate tie_break_P(const EndpointSet& obs, int degree, double gamma_star, const SolveOptions& opts,
                              const std::optional<LyapunovCandidate>& witness = std::nullopt);

}  // namespace jsrcert
