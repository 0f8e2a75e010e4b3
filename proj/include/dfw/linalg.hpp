#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Dense>

#include "dfw/errors.hpp"

namespace dfw {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixRef = Eigen::Ref<const Matrix>;

/// Throws kInvalidArgument when `m` is empty or holds a NaN/Inf.
void require_finite(const MatrixRef& m, const char* what);

/// An r x d matrix whose rows are orthonormal (r <= d). The invariant is
/// checked on construction to 1e-10 in spectral norm.
class OrthonormalRows {
 public:
  static constexpr double kTolerance = 1e-10;

  explicit OrthonormalRows(Matrix m);

  const Matrix& mat() const noexcept { return mat_; }
  Eigen::Index rank() const noexcept { return mat_.rows(); }
  Eigen::Index dim() const noexcept { return mat_.cols(); }

 private:
  Matrix mat_;
};

struct RowFactorization {
  OrthonormalRows q;
  Matrix r;  // lower triangular, positive diagonal
};

/// Factors M = R * Q with Q row-orthonormal and R lower triangular with a
/// strictly positive diagonal. Throws kRankDeficient when the smallest
/// singular value of M is below 1e-12 times the largest.
RowFactorization orthonormalize_rows(const MatrixRef& m);

/// Rows spanning the orthogonal complement of the row space of `p`.
OrthonormalRows orthonormal_complement(const OrthonormalRows& p);

double spectral_norm(const MatrixRef& m);

/// Largest eigenvalue modulus of a square matrix.
double spectral_radius(const MatrixRef& a);

struct SymmetricExtremes {
  double min;
  double max;
};

/// Extreme eigenvalues of the symmetric part of `s`.
SymmetricExtremes symmetric_eigen_extremes(const MatrixRef& s);

/// Sum of the eigenvalues of `s^{-1}` for symmetric positive definite `s`.
double inverse_nuclear_norm(const MatrixRef& s);

/// Solves S = A S A^T + Q by squared-power doubling. Requires rho(A) < 1.
Matrix dlyap(const MatrixRef& a, const MatrixRef& q);

struct DareSolution {
  Matrix p;
  Matrix k;  // u = K x
  int iterations;
};

/// Riccati fixed-point recursion from P = Q until the residual drops below
/// 1e-10 * max(1, ||P||).
DareSolution dare(const MatrixRef& a, const MatrixRef& b, const MatrixRef& q, const MatrixRef& r);

/// Residual of the discrete algebraic Riccati equation at `p`.
double dare_residual(const MatrixRef& a, const MatrixRef& b, const MatrixRef& q, const MatrixRef& r,
                     const MatrixRef& p);

Matrix matrix_exponential(const MatrixRef& s);

/// exp((L - L^T) / 2) with L = gamma * S, S standard normal from `seed`.
Matrix random_rotation(Eigen::Index d, double gamma, std::uint64_t seed);

/// Matrix of iid standard normals drawn from `seed`, filled row by row.
Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

/// Lower Cholesky factor, retrying once with 1e-12 * trace/d diagonal jitter.
Matrix cholesky_lower(const MatrixRef& s);

Matrix block_diag(const MatrixRef& a, const MatrixRef& b);

}  // namespace dfw
