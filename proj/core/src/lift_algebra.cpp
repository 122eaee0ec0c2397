#include "jsrcert/lift_algebra.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "jsrcert/errors.hpp"

namespace jsrcert {

namespace {

double multinomial(const std::vector<int>& alpha) {
  // d! / prod(alpha_i!) accumulated as a product of binomials to stay exact
  // for the small degrees used here.
  double result = 1.0;
  int running = 0;
  for (int a : alpha) {
    for (int k = 1; k <= a; ++k) {
      ++running;
      result = result * running / k;
    }
  }
  return result;
}

void append_indices(int remaining_vars, int remaining_degree, std::vector<int>& prefix,
                    std::vector<MultiIndex>& out) {
  if (remaining_vars == 1) {
    prefix.push_back(remaining_degree);
    out.push_back({prefix, multinomial(prefix)});
    prefix.pop_back();
    return;
  }
  for (int a = remaining_degree; a >= 0; --a) {
    prefix.push_back(a);
    append_indices(remaining_vars - 1, remaining_degree - a, prefix, out);
    prefix.pop_back();
  }
}

void check_finite(const Vector& x, const char* what) {
  if (!x.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entries");
}

}  // namespace

int MultiIndex::degree() const { return std::accumulate(alpha.begin(), alpha.end(), 0); }

std::size_t lift_dimension(int n, int d) {
  if (n < 1 || d < 1) throw InvalidArgument("lift_dimension: n and d must be >= 1");
  // C(n+d-1, d) computed incrementally; exact for desk-scale sizes.
  std::size_t result = 1;
  for (int k = 1; k <= d; ++k) result = result * static_cast<std::size_t>(n - 1 + k) / k;
  return result;
}

std::vector<MultiIndex> multi_index_set(int n, int d) {
  if (n < 1 || d < 1) throw InvalidArgument("multi_index_set: n and d must be >= 1");
  std::vector<MultiIndex> out;
  out.reserve(lift_dimension(n, d));
  std::vector<int> prefix;
  append_indices(n, d, prefix, out);
  return out;
}

std::size_t packed_index(std::size_t dim, std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  return i * dim - i * (i - 1) / 2 + (j - i);
}

SymMatrix::SymMatrix(std::size_t dim, Vector packed) : dim_(dim), packed_(std::move(packed)) {
  if (static_cast<std::size_t>(packed_.size()) != packed_size(dim)) {
    throw InvalidArgument("SymMatrix: packed length does not match dimension");
  }
  if (dim_ == 0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(dense(), Eigen::EigenvaluesOnly);
  lambda_min_ = eig.eigenvalues()(0);
  lambda_max_ = eig.eigenvalues()(static_cast<Eigen::Index>(dim_) - 1);
}

SymMatrix SymMatrix::identity(std::size_t dim) {
  Vector packed = Vector::Zero(static_cast<Eigen::Index>(packed_size(dim)));
  for (std::size_t i = 0; i < dim; ++i) packed(static_cast<Eigen::Index>(packed_index(dim, i, i))) = 1.0;
  return SymMatrix(dim, std::move(packed));
}

SymMatrix SymMatrix::from_upper(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("SymMatrix: matrix is not square");
  const auto dim = static_cast<std::size_t>(m.rows());
  Vector packed(static_cast<Eigen::Index>(packed_size(dim)));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) packed(k++) = m(i, j);
  }
  return SymMatrix(dim, std::move(packed));
}

double SymMatrix::operator()(std::size_t i, std::size_t j) const {
  return packed_(static_cast<Eigen::Index>(packed_index(dim_, i, j)));
}

Matrix SymMatrix::dense() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  Matrix m(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      m(i, j) = packed_(k);
      m(j, i) = packed_(k);
      ++k;
    }
  }
  return m;
}

double SymMatrix::quad_form(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw InvalidArgument("quad_form: size mismatch");
  return quadratic_features(x).dot(packed_);
}

SymMatrix SymMatrix::scaled(double factor) const { return SymMatrix(dim_, packed_ * factor); }

Vector quadratic_features(const Vector& v) {
  const auto n = v.size();
  Vector phi(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    phi(k++) = v(i) * v(i);
    for (Eigen::Index j = i + 1; j < n; ++j) phi(k++) = 2.0 * v(i) * v(j);
  }
  return phi;
}

Lifter::Lifter(int n, int d) : n_(n), d_(d), indices_(multi_index_set(n, d)) {
  weights_.reserve(indices_.size());
  for (const auto& idx : indices_) weights_.push_back(std::sqrt(idx.coeff));
}

Vector Lifter::lift(const Vector& x) const {
  if (x.size() != n_) throw InvalidArgument("d_lift_vector: dimension mismatch");
  check_finite(x, "d_lift_vector");
  Vector out(static_cast<Eigen::Index>(indices_.size()));
  for (std::size_t r = 0; r < indices_.size(); ++r) {
    double mono = weights_[r];
    const auto& alpha = indices_[r].alpha;
    for (int i = 0; i < n_; ++i) {
      for (int p = 0; p < alpha[static_cast<std::size_t>(i)]; ++p) mono *= x(i);
    }
    out(static_cast<Eigen::Index>(r)) = mono;
  }
  return out;
}

LiftedVector d_lift_vector(const Vector& x, int d) {
  const Lifter lifter(static_cast<int>(x.size()), d);
  return {static_cast<int>(x.size()), d, lifter.lift(x)};
}

Matrix lift_basis(int n, int d) {
  const auto indices = multi_index_set(n, d);
  std::map<std::vector<int>, Eigen::Index> row_of;
  for (std::size_t r = 0; r < indices.size(); ++r) row_of[indices[r].alpha] = static_cast<Eigen::Index>(r);

  Eigen::Index columns = 1;
  for (int k = 0; k < d; ++k) columns *= n;
  Matrix c = Matrix::Zero(static_cast<Eigen::Index>(indices.size()), columns);

  std::vector<int> counts(static_cast<std::size_t>(n));
  for (Eigen::Index col = 0; col < columns; ++col) {
    // Column index is the base-n numeral i_1 i_2 ... i_d of the tuple.
    std::fill(counts.begin(), counts.end(), 0);
    Eigen::Index rest = col;
    for (int k = 0; k < d; ++k) {
      ++counts[static_cast<std::size_t>(rest % n)];
      rest /= n;
    }
    const Eigen::Index row = row_of.at(counts);
    c(row, col) = 1.0 / std::sqrt(indices[static_cast<std::size_t>(row)].coeff);
  }
  return c;
}

Vector kron_power(const Vector& x, int k) {
  if (k < 1) throw InvalidArgument("kron_power: k must be >= 1");
  Vector out = x;
  for (int p = 1; p < k; ++p) {
    Vector next(x.size() * out.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) next.segment(i * out.size(), out.size()) = x(i) * out;
    out = std::move(next);
  }
  return out;
}

Matrix kron_power(const Matrix& a, int k) {
  if (k < 1) throw InvalidArgument("kron_power: k must be >= 1");
  Matrix out = a;
  for (int p = 1; p < k; ++p) {
    Matrix next(a.rows() * out.rows(), a.cols() * out.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        next.block(i * out.rows(), j * out.cols(), out.rows(), out.cols()) = a(i, j) * out;
      }
    }
    out = std::move(next);
  }
  return out;
}

Matrix d_lift_matrix(const Matrix& a, int d) {
  if (a.rows() != a.cols() || a.rows() == 0) throw InvalidArgument("d_lift_matrix: matrix must be square");
  if (!a.allFinite()) throw InvalidArgument("d_lift_matrix: non-finite entries");
  if (d == 1) return a;
  const Matrix c = lift_basis(static_cast<int>(a.rows()), d);
  return c * kron_power(a, d) * c.transpose();
}

MatrixMetrics matrix_metrics(const SymMatrix& p) {
  MatrixMetrics m;
  m.lambda_min = p.lambda_min();
  m.lambda_max = p.lambda_max();
  m.spectral_norm = std::max(std::abs(m.lambda_min), std::abs(m.lambda_max));
  m.kappa = m.lambda_min > 0.0 ? std::sqrt(m.lambda_max / m.lambda_min)
                               : std::numeric_limits<double>::infinity();
  return m;
}

double ellipsoidal_norm(const SymMatrix& p, const Vector& x) {
  const double q = p.quad_form(x);
  if (q >= 0.0) return std::sqrt(q);
  if (q >= -1e-12) return 0.0;
  throw InvalidArgument("ellipsoidal_norm: quadratic form is negative; P is not positive semidefinite");
}

}  // namespace jsrcert
