#pragma once

// Log-barrier interior-point solver for the normalized Lyapunov LMI
//
//   maximize s  over (P, s)
//   s.t.  a_i . packed(P) + w_i s <= 0          (i = 1..N)
//         P - (floor + s_coef s) I >= 0,   I - P >= 0.
//
// Margin mode: s_coef = 0, floor = 1/C, w_i > 0; s is a uniform margin.
// Condition mode: s_coef = 1, floor = 0, w_i = 0; the optimum is
// 1 / kappa(P)^2 minimized over the feasible cone.

#include <limits>
#include <optional>

#include "jsrcert/lift_algebra.hpp"

namespace jsrcert::detail {

struct BarrierProblem {
  std::size_t dim = 0;  // D
  Matrix coeffs;        // N x D(D+1)/2
  Vector margin;        // N, w_i >= 0
  double floor = 0.0;
  double s_coef = 1.0;
};

struct BarrierPoint {
  Vector p;  // packed P
  double s = 0.0;
};

struct BarrierSettings {
  double stop_above = std::numeric_limits<double>::infinity();
  double stop_below = -std::numeric_limits<double>::infinity();
  double abs_gap = 1e-12;
  double rel_gap = 0.0;
  int max_newton_steps = 4000;
  double t0 = 1.0;
  double mu = 20.0;
  std::optional<BarrierPoint> start;
};

enum class BarrierStatus {
  ReachedAbove,    // an iterate reached s >= stop_above
  BoundBelow,      // the optimum is certified below stop_below
  Converged,       // duality gap below tolerance
  Stalled,         // line search could not make progress; point is the best found
  IterationLimit,
};

struct BarrierOutcome {
  BarrierStatus status = BarrierStatus::Converged;
  BarrierPoint point;
  double upper_bound = 0.0;  // on the optimal s: Lagrangian bound in margin mode, else central-path gap
  int newton_steps = 0;
};

/// Strictly feasible start (P = (1 + floor)/2 I, s low enough), or nullopt if
/// some row has w_i = 0 and is not strictly satisfied there.
std::optional<BarrierPoint> default_start(const BarrierProblem& problem);

BarrierOutcome maximize_margin(const BarrierProblem& problem, const BarrierSettings& settings);

}  // namespace jsrcert::detail
