#pragma once

// Degree-d lifts of vectors and matrices onto weighted monomials, Kronecker
// powers, and the symmetric-matrix helpers used by the Lyapunov programs.
//
// Monomials of degree d in n variables are indexed in graded lexicographic
// order; for fixed d that is lexicographic descending on the exponent tuple,
// e.g. (2,0), (1,1), (0,2) for n = d = 2. Every lift in the library uses this
// order.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace jsrcert {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct MultiIndex {
  std::vector<int> alpha;
  double coeff = 1.0;  // multinomial d! / (alpha_1! ... alpha_n!)

  int degree() const;
};

/// Number of monomials of degree d in n variables, C(n+d-1, d).
std::size_t lift_dimension(int n, int d);

std::vector<MultiIndex> multi_index_set(int n, int d);

/// Number of free entries of a symmetric dim x dim matrix.
inline std::size_t packed_size(std::size_t dim) { return dim * (dim + 1) / 2; }

/// Real symmetric matrix stored as its packed upper triangle (row-major:
/// (0,0), (0,1), ..., (0,D-1), (1,1), ...). Eigen-extremes are computed once at
/// construction.
class SymMatrix {
 public:
  SymMatrix() = default;
  SymMatrix(std::size_t dim, Vector packed);

  static SymMatrix identity(std::size_t dim);
  /// Takes the upper triangle of `m`; the strict lower triangle is ignored.
  static SymMatrix from_upper(const Matrix& m);

  std::size_t dim() const { return dim_; }
  const Vector& packed() const { return packed_; }
  double operator()(std::size_t i, std::size_t j) const;
  Matrix dense() const;

  double quad_form(const Vector& x) const;
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }

  SymMatrix scaled(double factor) const;

 private:
  std::size_t dim_ = 0;
  Vector packed_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

/// Packed position of (i, j), i <= j, in a dim x dim upper triangle.
std::size_t packed_index(std::size_t dim, std::size_t i, std::size_t j);

/// Coefficients phi(v) with v^T P v = phi(v) . packed(P).
Vector quadratic_features(const Vector& v);

struct LiftedVector {
  int base_dim = 0;
  int degree = 0;
  Vector entries;

  double norm() const { return entries.norm(); }
};

/// Precomputed monomial table for repeated lifts at fixed (n, d).
class Lifter {
 public:
  Lifter(int n, int d);

  int base_dim() const { return n_; }
  int degree() const { return d_; }
  std::size_t dim() const { return indices_.size(); }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  Vector lift(const Vector& x) const;

 private:
  int n_;
  int d_;
  std::vector<MultiIndex> indices_;
  std::vector<double> weights_;  // sqrt(coeff)
};

LiftedVector d_lift_vector(const Vector& x, int d);

/// C_d: D x n^d with C_d x^{(x)d} = x^{[d]}; rows are orthonormal.
Matrix lift_basis(int n, int d);

/// A^{[d]} = C_d A^{(x)d} C_d^T, so that A^{[d]} x^{[d]} = (Ax)^{[d]}.
Matrix d_lift_matrix(const Matrix& a, int d);

Vector kron_power(const Vector& x, int k);
Matrix kron_power(const Matrix& a, int k);

struct MatrixMetrics {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa = 0.0;          // sqrt(lambda_max / lambda_min), +inf if lambda_min <= 0
  double spectral_norm = 0.0;  // max |lambda|
};

MatrixMetrics matrix_metrics(const SymMatrix& p);

/// sqrt(x^T P x). Small negative forms (>= -1e-12) from rounding clamp to 0.
double ellipsoidal_norm(const SymMatrix& p, const Vector& x);

}  // namespace jsrcert
