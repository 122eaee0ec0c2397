#include <cmath>
#include <limits>
#include <numeric>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "jsrcert/certifier.hpp"
#include "jsrcert/errors.hpp"

using namespace jsrcert;
using jsrcert::testing::for_all;
using jsrcert::testing::Gen;
using jsrcert::testing::parrilo;
using jsrcert::testing::scalar_modes;

namespace {

EndpointSet pairs(int n, int l, const std::vector<std::pair<Vector, Vector>>& data) {
  EndpointSet e;
  e.dim = n;
  e.trace_length = l;
  for (const auto& [x0, xl] : data) {
    e.x0.push_back(x0);
    e.xl.push_back(xl);
  }
  return e;
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

SymMatrix random_spd(Gen& g, int dim) {
  const Matrix a = g.matrix(dim, dim);
  return SymMatrix::from_upper(a.transpose() * a + Matrix::Identity(dim, dim));
}

void expect_candidate_valid(const LyapunovCandidate& c, const EndpointSet& obs, const SolveOptions& opts) {
  EXPECT_GE(c.p.lambda_min(), 1.0 - 1e-8);
  EXPECT_LE(c.p.lambda_max(), opts.c_bound * (1.0 + 1e-8));
  EXPECT_LE(assemble_constraints(obs, c.degree, c.gamma).max_relative_violation(c.p), 1e-8);
  EXPECT_NEAR(c.kappa, std::sqrt(c.p.lambda_max() / c.p.lambda_min()), 1e-9 * c.kappa);
}

}  // namespace

TEST(SolveOptions, Validation) {
  EXPECT_NO_THROW(SolveOptions{}.validate());
  SolveOptions o;
  o.c_bound = 0.5;
  EXPECT_THROW(o.validate(), InvalidArgument);
  o = SolveOptions{};
  o.bisection_rel_tol = 0.0;
  EXPECT_THROW(o.validate(), InvalidArgument);
  EXPECT_EQ(SolveOptions{}.bisection_rel_tol, 1e-6);
}

TEST(SolveLambda, Examples) {
  EXPECT_DOUBLE_EQ(solve_lambda(pairs(2, 1, {{vec({1, 0}), vec({1, 1})}})), std::sqrt(2.0));
  EXPECT_EQ(solve_lambda(pairs(2, 1, {{vec({1, 0}), vec({0, 0})}, {vec({0, 1}), vec({0, 0})}})), 0.0);
  EXPECT_NEAR(solve_lambda(simulate(scalar_modes(2, 2.0), 50, 2, 1).endpoints()), 4.0, 1e-14);
  EXPECT_THROW(solve_lambda(EndpointSet{}), InvalidArgument);
}

TEST(AssembleConstraints, ExpandedQuadraticForm) {
  const ConstraintSystem sys = assemble_constraints(pairs(2, 1, {{vec({1, 0}), vec({1, 1})}}), 1, 1.0);
  ASSERT_EQ(sys.size(), 1u);
  EXPECT_EQ(sys.variable_count(), 3u);
  for_all(50, 11, [&](Gen& g, int) {
    const SymMatrix p = random_spd(g, 2);
    EXPECT_NEAR(sys.row(0).dot(p.packed()), p(1, 1) + 2.0 * p(0, 1), 1e-12);
  });
}

TEST(AssembleConstraints, ZeroImageIsVacuous) {
  const ConstraintSystem sys = assemble_constraints(pairs(2, 1, {{vec({0, 1}), vec({0, 0})}}), 2, 0.7);
  EXPECT_LT(sys.max_violation(SymMatrix::identity(3)), 0.0);
}

TEST(AssembleConstraints, DegreeTwoSizes) {
  const ConstraintSystem sys = assemble_constraints(simulate(parrilo(), 10, 1, 2).endpoints(), 2, 1.0);
  EXPECT_EQ(sys.lifted_dim(), 3u);
  EXPECT_EQ(sys.variable_count(), 6u);
  EXPECT_EQ(sys.size(), 10u);
  EXPECT_DOUBLE_EQ(sys.growth(), 1.0);
  EXPECT_DOUBLE_EQ(assemble_constraints(simulate(parrilo(), 1, 2, 2).endpoints(), 2, 2.0).growth(), 256.0);
}

TEST(FeasibilityCheck, ZeroDataAtZeroGamma) {
  const auto sys = assemble_constraints(pairs(2, 1, {{vec({1, 0}), vec({0, 0})}}), 1, 0.0);
  const FeasibilityResult r = feasibility_check(sys, SolveOptions{});
  ASSERT_TRUE(r.feasible());
  EXPECT_EQ(r.p->dense(), Matrix::Identity(2, 2));
}

TEST(FeasibilityCheck, ScalarModeThreshold) {
  const EndpointSet obs = simulate(scalar_modes(2, 2.0), 20, 1, 3).endpoints();
  const SolveOptions opts;
  const FeasibilityResult low = feasibility_check(assemble_constraints(obs, 1, 1.9), opts);
  EXPECT_EQ(low.status, FeasibilityStatus::Infeasible);
  EXPECT_FALSE(low.p.has_value());
  const FeasibilityResult high = feasibility_check(assemble_constraints(obs, 1, 2.01), opts);
  ASSERT_TRUE(high.feasible());
  EXPECT_LE(assemble_constraints(obs, 1, 2.01).max_violation(*high.p), 0.0);
  EXPECT_GE(high.p->lambda_min(), 1.0 - 1e-12);
}

TEST(FeasibilityCheck, MonotoneInGamma) {
  for_all(15, 12, [](Gen& g, int) {
    const ModeSet m = g.modes(2, g.integer(1, 3));
    const EndpointSet obs = simulate(m, g.integer(5, 40), 1, g.integer(0, 1000)).endpoints();
    const SolveOptions opts;
    const double gamma = g.uniform(0.1, 2.0);
    const auto r = feasibility_check(assemble_constraints(obs, 1, gamma), opts);
    if (!r.feasible()) return;
    for (double factor : {1.01, 1.2, 2.0}) {
      const auto relaxed = assemble_constraints(obs, 1, gamma * factor);
      EXPECT_TRUE(feasibility_check(relaxed, opts).feasible()) << "gamma " << gamma << " x" << factor;
      // The witness at gamma stays a witness.
      EXPECT_LE(relaxed.max_violation(*r.p), 0.0);
    }
  });
}

TEST(FeasibilityCheck, WitnessSatisfiesBoxAndConstraints) {
  for_all(15, 13, [](Gen& g, int) {
    const int d = g.integer(1, 2);
    const EndpointSet obs = simulate(g.modes(2, 2), 30, 1, g.integer(0, 1000)).endpoints();
    SolveOptions opts;
    opts.c_bound = g.uniform(10.0, 1e6);
    const double gamma = solve_lambda(obs) * g.uniform(0.5, 1.0);
    const auto sys = assemble_constraints(obs, d, gamma);
    const auto r = feasibility_check(sys, opts);
    if (!r.feasible()) return;
    EXPECT_GE(r.p->lambda_min(), 1.0 - 1e-9);
    EXPECT_LE(r.p->lambda_max(), opts.c_bound * (1.0 + 1e-8));
    EXPECT_LE(sys.max_relative_violation(*r.p), 1e-8);
  });
}

TEST(FeasibilityCheck, UpperBoundNeverUndercutsKnownPoint) {
  // Any P in the box gives t(P) = min_i -(a_i . P) / (g |u_i|^2); the reported
  // upper bound must dominate it whatever the verdict.
  for_all(20, 20, [](Gen& g, int) {
    const int d = g.integer(1, 2);
    const EndpointSet obs = simulate(g.integer(0, 1) ? parrilo() : g.modes(2, 2), g.integer(10, 200), 1,
                                     g.integer(0, 1000)).endpoints();
    SolveOptions opts;
    opts.c_bound = g.uniform(10.0, 1e8);
    const auto solution = bisect_gamma(obs, d, opts);
    const SymMatrix known = solution.witness.p.scaled(1.0 / solution.witness.p.lambda_max());
    for (double factor : {0.999, 1.0, 1.001}) {
      const double gamma = solution.gamma_star * factor;
      if (gamma == 0.0) continue;
      const auto sys = assemble_constraints(obs, d, gamma);
      double t_known = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < sys.size(); ++i) {
        t_known = std::min(t_known, -sys.row(i).dot(known.packed()) / (sys.growth() * sys.data().start_norm2(i)));
      }
      const auto r = feasibility_check(sys, opts);
      if (r.feasible()) continue;
      EXPECT_GE(r.margin_upper, t_known - 1e-12) << "gamma " << gamma;
    }
  });
}

TEST(SolveGamma, ZeroImage) {
  const auto sol = solve_gamma(pairs(2, 1, {{vec({0, 1}), vec({0, 0})}}), 1, SolveOptions{});
  EXPECT_EQ(sol.gamma_star, 0.0);
  EXPECT_EQ(sol.candidate.kappa, 1.0);
}

TEST(SolveGamma, ScalarMode) {
  const SolveOptions opts;
  for (int d : {1, 2, 3}) {
    const EndpointSet obs = simulate(scalar_modes(2, 2.0), 15, 1, 4).endpoints();
    const auto sol = solve_gamma(obs, d, opts);
    EXPECT_NEAR(sol.gamma_star, 2.0, 2.0 * 2e-6) << "d=" << d;
    EXPECT_NEAR(sol.candidate.kappa, 1.0, 1e-6);
    expect_candidate_valid(sol.candidate, obs, opts);
  }
}

TEST(SolveGamma, ParriloDenseQuadratic) {
  const EndpointSet obs = simulate(parrilo(), 10000, 1, 5).endpoints();
  const SolveOptions opts;
  const auto sol = solve_gamma(obs, 1, opts);
  EXPECT_NEAR(sol.gamma_star, std::sqrt(2.0), 0.02);
  EXPECT_LE(sol.candidate.kappa, sol.witness.kappa + 1e-6);
  expect_candidate_valid(sol.candidate, obs, opts);
  expect_candidate_valid(sol.witness, obs, opts);
}

TEST(SolveGamma, RejectsEmpty) {
  EXPECT_THROW(solve_gamma(EndpointSet{}, 1, SolveOptions{}), InvalidArgument);
}

TEST(TieBreak, TrivialOptima) {
  const SolveOptions opts;
  const LyapunovCandidate zero = tie_break_P(pairs(2, 1, {{vec({1, 0}), vec({0, 0})}}), 1, 0.0, opts);
  EXPECT_NEAR((zero.p.dense() - Matrix::Identity(2, 2)).norm(), 0.0, 1e-6);
  EXPECT_NEAR(zero.kappa, 1.0, 1e-6);

  const EndpointSet obs = simulate(scalar_modes(2, 2.0), 10, 1, 6).endpoints();
  const LyapunovCandidate scalar = tie_break_P(obs, 1, 2.0, opts);
  EXPECT_NEAR(scalar.kappa, 1.0, 1e-6);
  EXPECT_NEAR(scalar.p.lambda_min(), 1.0, 1e-6);
}

TEST(TieBreak, NoWorseThanWitness) {
  for_all(10, 14, [](Gen& g, int) {
    const EndpointSet obs = simulate(g.modes(2, g.integer(1, 3)), g.integer(5, 60), 1, g.integer(0, 1000)).endpoints();
    const SolveOptions opts;
    const int d = g.integer(1, 2);
    const auto sol = solve_gamma(obs, d, opts);
    EXPECT_LE(sol.candidate.kappa, sol.witness.kappa + 1e-6);
    EXPECT_GE(sol.candidate.gamma, sol.gamma_star);
    EXPECT_LE(sol.candidate.gamma, sol.gamma_star * (1.0 + 2.0 * opts.tiebreak_slack) + 1e-300);
    expect_candidate_valid(sol.candidate, obs, opts);
  });
}

TEST(CertifierProperty, NestedSetsAreMonotone) {
  for_all(10, 15, [](Gen& g, int) {
    const EndpointSet all = simulate(g.modes(2, 2), 40, 1, g.integer(0, 1000)).endpoints();
    std::vector<std::size_t> idx(static_cast<std::size_t>(g.integer(3, 39)));
    std::iota(idx.begin(), idx.end(), 0);
    const SolveOptions opts;
    const double small = bisect_gamma(all.subset(idx), 1, opts).gamma_star;
    const double large = bisect_gamma(all, 1, opts).gamma_star;
    EXPECT_LE(small, large + 2.0 * opts.bisection_rel_tol * std::max(large, 1e-12));
  });
}

TEST(CertifierProperty, ScalingImage) {
  for_all(10, 16, [](Gen& g, int) {
    const EndpointSet obs = simulate(g.modes(2, 2), 30, 1, g.integer(0, 1000)).endpoints();
    EndpointSet scaled = obs;
    const double c = g.uniform(-3.0, 3.0);
    for (auto& x : scaled.xl) x *= c;
    const SolveOptions opts;
    const double base = bisect_gamma(obs, 1, opts).gamma_star;
    const double after = bisect_gamma(scaled, 1, opts).gamma_star;
    EXPECT_NEAR(after, std::abs(c) * base, 4.0 * opts.bisection_rel_tol * std::max(after, 1e-9) + 1e-12);
  });
}

TEST(CertifierProperty, TraceLengthScaling) {
  // With l = 2 the programs bound gamma^2, so the same data gives sqrt of the l = 1 value.
  const EndpointSet one = simulate(parrilo(), 50, 1, 17).endpoints();
  EndpointSet two = one;
  two.trace_length = 2;
  const SolveOptions opts;
  EXPECT_NEAR(bisect_gamma(two, 1, opts).gamma_star, std::sqrt(bisect_gamma(one, 1, opts).gamma_star), 1e-5);
}

TEST(CertifierProperty, DegreeOneLiftMatchesQuadraticSystem) {
  for_all(20, 18, [](Gen& g, int) {
    const EndpointSet obs = simulate(g.modes(3, 2), 20, 1, g.integer(0, 1000)).endpoints();
    const double gamma = g.uniform(0.1, 2.0);
    const auto sys = assemble_constraints(obs, 1, gamma);
    const SymMatrix p = random_spd(g, 3);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const double direct = p.quad_form(obs.xl[i]) - gamma * gamma * p.quad_form(obs.x0[i]);
      EXPECT_NEAR(sys.row(i).dot(p.packed()), direct, 1e-10 * (1.0 + std::abs(direct)));
    }
  });
}

TEST(CertifierProperty, SosNeverWorseThanQuadraticOnSameData) {
  // Any quadratic certificate lifts to a degree-2 one, so the SOS optimum is no larger.
  for_all(6, 19, [](Gen& g, int) {
    const EndpointSet obs = simulate(g.modes(2, 2), 40, 1, g.integer(0, 1000)).endpoints();
    const SolveOptions opts;
    const double q = bisect_gamma(obs, 1, opts).gamma_star;
    const double s = bisect_gamma(obs, 2, opts).gamma_star;
    EXPECT_LE(s, q * (1.0 + 4.0 * opts.bisection_rel_tol));
  });
}
