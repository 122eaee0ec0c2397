#include "barrier_sdp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "jsrcert/errors.hpp"

namespace jsrcert::detail {

namespace {

constexpr double kCenteringTol = 1e-9;  // lambda^2 / 2
constexpr int kMaxHalvings = 80;
constexpr int kMaxCenteringSteps = 200;
constexpr double kRoundingFloor = 1e-13;  // relative decrease indistinguishable from rounding

struct Basis {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> entries;  // packed index -> (row, col)
};

Basis make_basis(std::size_t dim) {
  Basis b;
  const auto n = static_cast<Eigen::Index>(dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) b.entries.emplace_back(i, j);
  }
  return b;
}

Matrix unpack(const Basis& basis, std::size_t dim, const Vector& p) {
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix m(n, n);
  for (std::size_t k = 0; k < basis.entries.size(); ++k) {
    const auto [i, j] = basis.entries[k];
    m(i, j) = p(static_cast<Eigen::Index>(k));
    m(j, i) = p(static_cast<Eigen::Index>(k));
  }
  return m;
}

class Evaluator {
 public:
  Evaluator(const BarrierProblem& problem)
      : problem_(problem), basis_(make_basis(problem.dim)), vars_(static_cast<Eigen::Index>(basis_.entries.size())) {}

  Eigen::Index variable_count() const { return vars_ + 1; }

  // Barrier value at (p, s) for parameter t; nullopt outside the domain.
  std::optional<double> value(const BarrierPoint& z, double t) const {
    const Vector c = problem_.coeffs * z.p + problem_.margin * z.s;
    if (c.size() > 0 && !(c.maxCoeff() < 0.0)) return std::nullopt;
    const Matrix pm = unpack(basis_, problem_.dim, z.p);
    const auto n = pm.rows();
    Eigen::LLT<Matrix> lower(pm - shift(z) * Matrix::Identity(n, n));
    Eigen::LLT<Matrix> upper(Matrix::Identity(n, n) - pm);
    if (lower.info() != Eigen::Success || upper.info() != Eigen::Success) return std::nullopt;
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = lower.matrixLLT()(i, i);
      const double b = upper.matrixLLT()(i, i);
      if (!(a > 0.0) || !(b > 0.0)) return std::nullopt;
      logdet += 2.0 * (std::log(a) + std::log(b));
    }
    const double lin = c.size() > 0 ? (-c.array()).log().sum() : 0.0;
    const double f = -t * z.s - lin - logdet;
    if (!std::isfinite(f)) return std::nullopt;
    return f;
  }

  // Gradient and Hessian at a point inside the domain.
  void derivatives(const BarrierPoint& z, double t, Vector& grad, Matrix& hess) const {
    const Eigen::Index nv = variable_count();
    grad = Vector::Zero(nv);
    hess = Matrix::Zero(nv, nv);

    if (problem_.coeffs.rows() > 0) {
      const Vector c = problem_.coeffs * z.p + problem_.margin * z.s;
      const Vector r = (-c).cwiseInverse();
      Matrix g(problem_.coeffs.rows(), nv);
      g.leftCols(vars_) = problem_.coeffs;
      g.col(vars_) = problem_.margin;
      grad.head(vars_) = problem_.coeffs.transpose() * r;
      grad(vars_) = problem_.margin.dot(r);
      g = r.asDiagonal() * g;
      hess.selfadjointView<Eigen::Lower>().rankUpdate(g.transpose());
      hess = hess.selfadjointView<Eigen::Lower>();
    }

    const Matrix pm = unpack(basis_, problem_.dim, z.p);
    const auto n = pm.rows();
    const Matrix id = Matrix::Identity(n, n);
    const Matrix w_lower = (pm - shift(z) * id).llt().solve(id);
    const Matrix w_upper = (id - pm).llt().solve(id);

    add_logdet_terms(w_lower, +1.0, -problem_.s_coef, grad, hess);
    add_logdet_terms(w_upper, -1.0, 0.0, grad, hess);
    grad(vars_) -= t;
  }

 private:
  // -log det M with dM/dp_j = sign_p E_j and dM/ds = sign_s I. W = M^{-1}.
  void add_logdet_terms(const Matrix& w, double sign_p, double sign_s, Vector& grad, Matrix& hess) const {
    const Eigen::Index nv = variable_count();
    const auto n = w.rows();
    // Y_j = W B_j, flattened; H_jk = tr(Y_j Y_k) = <Y_j, Y_k^T>.
    Matrix y(nv, n * n);
    Matrix yt(nv, n * n);
    for (Eigen::Index k = 0; k < vars_; ++k) {
      const auto [i, j] = basis_.entries[static_cast<std::size_t>(k)];
      Matrix b = Matrix::Zero(n, n);
      b(i, j) = sign_p;
      b(j, i) = sign_p;
      const Matrix yk = w * b;
      y.row(k) = Eigen::Map<const Eigen::RowVectorXd>(yk.data(), n * n);
      const Matrix ykt = yk.transpose();
      yt.row(k) = Eigen::Map<const Eigen::RowVectorXd>(ykt.data(), n * n);
      grad(k) -= yk.trace();
    }
    const Matrix ys = sign_s * w;
    y.row(vars_) = Eigen::Map<const Eigen::RowVectorXd>(ys.data(), n * n);
    const Matrix yst = ys.transpose();
    yt.row(vars_) = Eigen::Map<const Eigen::RowVectorXd>(yst.data(), n * n);
    grad(vars_) -= ys.trace();
    hess.noalias() += y * yt.transpose();
  }

  double shift(const BarrierPoint& z) const { return problem_.floor + problem_.s_coef * z.s; }

  const BarrierProblem& problem_;
  Basis basis_;
  Eigen::Index vars_;
};

// Lagrangian bound on the optimal s for margin problems (s_coef = 0, w > 0),
// valid for any y >= 0 with y . w = 1: with M the symmetric matrix of
// sum_i y_i a_i, every feasible (P, s) has s <= tr(M_-) - floor tr(M_+).
// y is taken from the barrier multipliers 1 / (-c_i).
double dual_bound(const BarrierProblem& problem, const Basis& basis, const BarrierPoint& z) {
  const Vector c = problem.coeffs * z.p + problem.margin * z.s;
  Vector y = (-c).cwiseInverse();
  const double scale = y.dot(problem.margin);
  if (!(scale > 0.0) || !std::isfinite(scale)) return std::numeric_limits<double>::infinity();
  y /= scale;
  const Vector g = problem.coeffs.transpose() * y;
  const auto n = static_cast<Eigen::Index>(problem.dim);
  Matrix m(n, n);
  for (std::size_t k = 0; k < basis.entries.size(); ++k) {
    const auto [i, j] = basis.entries[k];
    const double v = i == j ? g(static_cast<Eigen::Index>(k)) : 0.5 * g(static_cast<Eigen::Index>(k));
    m(i, j) = v;
    m(j, i) = v;
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  double positive = 0.0;
  double negative = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = es.eigenvalues()(i);
    (lambda > 0.0 ? positive : negative) += std::abs(lambda);
  }
  return negative - problem.floor * positive;
}

BarrierPoint step(const BarrierPoint& z, const Vector& delta, double alpha) {
  const auto vars = z.p.size();
  return {z.p + alpha * delta.head(vars), z.s + alpha * delta(vars)};
}

}  // namespace

std::optional<BarrierPoint> default_start(const BarrierProblem& problem) {
  const auto n = static_cast<Eigen::Index>(problem.dim);
  const double diag = 0.5 * (1.0 + problem.floor);
  Vector p = Vector::Zero(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    p(k) = diag;
    k += n - i;
  }
  double s = problem.s_coef > 0.0 ? (diag - problem.floor) / problem.s_coef : 0.5;
  const Vector base = problem.coeffs * p;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    const double w = problem.margin(i);
    if (w > 0.0) {
      s = std::min(s, -base(i) / w);
    } else if (!(base(i) < 0.0)) {
      return std::nullopt;
    }
  }
  s -= std::max(1.0, 0.1 * std::abs(s));
  return BarrierPoint{std::move(p), s};
}

BarrierOutcome maximize_margin(const BarrierProblem& problem, const BarrierSettings& settings) {
  const Evaluator eval(problem);
  BarrierOutcome out;
  if (settings.start) {
    out.point = *settings.start;
  } else {
    auto start = default_start(problem);
    if (!start) throw SolverError("barrier: no strictly feasible starting point");
    out.point = std::move(*start);
  }

  const double barrier_order =
      static_cast<double>(problem.coeffs.rows()) + 2.0 * static_cast<double>(problem.dim);
  // Margin problems get a certified dual bound; otherwise the central-path gap is used.
  const bool certified = problem.s_coef == 0.0 && problem.coeffs.rows() > 0 && problem.margin.minCoeff() > 0.0;
  const Basis basis = make_basis(problem.dim);
  double certified_bound = std::numeric_limits<double>::infinity();
  double t = settings.t0;
  if (!eval.value(out.point, t)) throw SolverError("barrier: starting point is not strictly feasible");

  Vector grad;
  Matrix hess;
  for (;;) {
    // Centering by damped Newton.
    for (int centering = 0;; ++centering) {
      if (out.point.s >= settings.stop_above) {
        out.status = BarrierStatus::ReachedAbove;
        out.upper_bound = std::numeric_limits<double>::infinity();
        return out;
      }
      if (out.newton_steps >= settings.max_newton_steps) {
        out.status = BarrierStatus::IterationLimit;
        return out;
      }
      eval.derivatives(out.point, t, grad, hess);
      Eigen::LDLT<Matrix> ldlt(hess);
      const Vector delta = -ldlt.solve(grad);
      const double decrement2 = -grad.dot(delta);
      if (!delta.allFinite() || !std::isfinite(decrement2)) {
        out.status = BarrierStatus::Stalled;
        out.upper_bound = certified ? certified_bound : out.point.s + barrier_order / t;
        return out;
      }
      if (decrement2 / 2.0 <= kCenteringTol || centering >= kMaxCenteringSteps) break;

      const double f0 = *eval.value(out.point, t);
      double alpha = 1.0;
      double decrease = 0.0;
      for (int h = 0; h < kMaxHalvings; ++h, alpha *= 0.5) {
        const BarrierPoint trial = step(out.point, delta, alpha);
        const auto f = eval.value(trial, t);
        if (f && *f <= f0 - 0.25 * alpha * decrement2) {
          out.point = trial;
          decrease = f0 - *f;
          break;
        }
      }
      ++out.newton_steps;
      // Past the rounding floor the point is as centred as double precision allows.
      if (decrease <= kRoundingFloor * std::max(1.0, std::abs(f0))) break;
    }

    double gap = barrier_order / t;
    if (certified) {
      certified_bound = std::min(certified_bound, dual_bound(problem, basis, out.point));
      out.upper_bound = certified_bound;
      gap = certified_bound - out.point.s;
    } else {
      out.upper_bound = out.point.s + 1.05 * gap;
    }
    if (out.upper_bound < settings.stop_below) {
      out.status = BarrierStatus::BoundBelow;
      return out;
    }
    if (gap <= std::max(settings.abs_gap, settings.rel_gap * std::abs(out.point.s))) {
      out.status = BarrierStatus::Converged;
      return out;
    }
    if (t > 1e18) {
      out.status = BarrierStatus::Stalled;
      return out;
    }
    t *= settings.mu;
  }
}

}  // namespace jsrcert::detail
