#include "dfw/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dfw/rng.hpp"

namespace dfw {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kRankDeficient: return "RankDeficient";
    case ErrorKind::kNoComplement: return "NoComplement";
    case ErrorKind::kUnstable: return "Unstable";
    case ErrorKind::kNonConvergence: return "NonConvergence";
    case ErrorKind::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::kSingularGram: return "SingularGram";
    case ErrorKind::kSingularCovariance: return "SingularCovariance";
    case ErrorKind::kSingularForcing: return "SingularForcing";
    case ErrorKind::kBadSplit: return "BadSplit";
    case ErrorKind::kInfeasible: return "Infeasible";
    case ErrorKind::kIo: return "Io";
  }
  return "Unknown";
}

void require_finite(const MatrixRef& m, const char* what) {
  if (m.size() == 0) {
    throw Error(ErrorKind::kInvalidArgument, std::string(what) + " must have positive dimensions");
  }
  if (!m.allFinite()) {
    throw Error(ErrorKind::kInvalidArgument, std::string(what) + " has non-finite entries");
  }
}

namespace {

void require_square(const MatrixRef& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, std::string(what) + " must be square");
  }
}

}  // namespace

OrthonormalRows::OrthonormalRows(Matrix m) : mat_(std::move(m)) {
  require_finite(mat_, "orthonormal rows");
  if (mat_.rows() > mat_.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "orthonormal rows need r <= d");
  }
  const Matrix gram = mat_ * mat_.transpose();
  const Matrix dev = gram - Matrix::Identity(gram.rows(), gram.cols());
  if (spectral_norm(dev) > kTolerance) {
    throw Error(ErrorKind::kInvalidArgument, "rows are not orthonormal");
  }
}

RowFactorization orthonormalize_rows(const MatrixRef& m) {
  require_finite(m, "orthonormalize_rows input");
  const Eigen::Index r = m.rows();
  const Eigen::Index d = m.cols();
  if (r > d) {
    throw Error(ErrorKind::kRankDeficient, "more rows than columns");
  }
  const Vector sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
  if (!(sv(r - 1) > 1e-12 * sv(0))) {
    throw Error(ErrorKind::kRankDeficient, "row rank below " + std::to_string(r));
  }

  // M^T = Qt * Rt is a thin column QR; transposing gives M = Rt^T * Qt^T.
  Eigen::HouseholderQR<Matrix> qr(m.transpose());
  Matrix qt = qr.householderQ() * Matrix::Identity(d, r);
  Matrix rt = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < r; ++i) {
    if (rt(i, i) < 0.0) {
      rt.row(i) *= -1.0;
      qt.col(i) *= -1.0;
    }
  }
  return RowFactorization{OrthonormalRows(qt.transpose()), rt.transpose()};
}

OrthonormalRows orthonormal_complement(const OrthonormalRows& p) {
  const Eigen::Index r = p.rank();
  const Eigen::Index d = p.dim();
  if (r == d) {
    throw Error(ErrorKind::kNoComplement, "representation already spans the whole space");
  }
  Eigen::HouseholderQR<Matrix> qr(p.mat().transpose());
  const Matrix q = qr.householderQ();
  return OrthonormalRows(q.rightCols(d - r).transpose());
}

double spectral_norm(const MatrixRef& m) {
  if (m.size() == 0) return 0.0;
  if (std::min(m.rows(), m.cols()) > 16) {
    return Eigen::BDCSVD<Matrix>(m).singularValues()(0);
  }
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

double spectral_radius(const MatrixRef& a) {
  require_square(a, "spectral_radius input");
  require_finite(a, "spectral_radius input");
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

SymmetricExtremes symmetric_eigen_extremes(const MatrixRef& s) {
  require_square(s, "symmetric matrix");
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

double inverse_nuclear_norm(const MatrixRef& s) {
  require_square(s, "covariance");
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  if (!(ev(0) > 1e-14 * std::max(1.0, ev(ev.size() - 1)))) {
    throw Error(ErrorKind::kSingularForcing, "matrix is not invertible");
  }
  return ev.cwiseInverse().sum();
}

Matrix dlyap(const MatrixRef& a, const MatrixRef& q) {
  require_square(a, "dlyap A");
  require_square(q, "dlyap Q");
  require_finite(a, "dlyap A");
  require_finite(q, "dlyap Q");
  if (a.rows() != q.rows()) {
    throw Error(ErrorKind::kDimensionMismatch, "dlyap A and Q sizes differ");
  }
  if (spectral_norm(q - q.transpose()) > 1e-10 * std::max(1.0, spectral_norm(q))) {
    throw Error(ErrorKind::kInvalidArgument, "dlyap Q is not symmetric");
  }
  const double rho = spectral_radius(a);
  if (!(rho < 1.0 - 1e-6)) {
    throw Error(ErrorKind::kUnstable, "dlyap needs spectral radius < 1, got " + std::to_string(rho));
  }

  constexpr int kMaxDoublings = 200;
  constexpr double kStop = 1e-12;
  constexpr double kAccept = 1e-10;
  const double eps = std::numeric_limits<double>::epsilon();

  Matrix sigma = 0.5 * (q + q.transpose());
  Matrix power = a;
  auto residual = [&](const Matrix& s) {
    return spectral_norm(s - a * s * a.transpose() - q);
  };
  for (int it = 0; it < kMaxDoublings; ++it) {
    const Matrix inc = power * sigma * power.transpose();
    sigma += inc;
    sigma = (0.5 * (sigma + sigma.transpose())).eval();
    power = power * power;
    const double scale = std::max(1.0, spectral_norm(sigma));
    if (residual(sigma) <= kStop * scale) break;
    // increments below rounding can no longer move the residual
    if (spectral_norm(inc) <= eps * spectral_norm(sigma)) break;
  }
  if (residual(sigma) > kAccept * std::max(1.0, spectral_norm(sigma))) {
    throw Error(ErrorKind::kNonConvergence, "dlyap residual target not reached");
  }
  return sigma;
}

namespace {

Matrix riccati_map(const MatrixRef& a, const MatrixRef& b, const MatrixRef& q, const MatrixRef& r,
                   const MatrixRef& p) {
  const Matrix s = b.transpose() * p * b + r;
  const Matrix bpa = b.transpose() * p * a;
  Matrix next = a.transpose() * p * a - bpa.transpose() * s.ldlt().solve(bpa) + q;
  return 0.5 * (next + next.transpose());
}

}  // namespace

double dare_residual(const MatrixRef& a, const MatrixRef& b, const MatrixRef& q, const MatrixRef& r,
                     const MatrixRef& p) {
  return spectral_norm(p - riccati_map(a, b, q, r, p));
}

DareSolution dare(const MatrixRef& a, const MatrixRef& b, const MatrixRef& q, const MatrixRef& r) {
  require_square(a, "dare A");
  require_square(q, "dare Q");
  require_square(r, "dare R");
  require_finite(a, "dare A");
  require_finite(b, "dare B");
  require_finite(q, "dare Q");
  require_finite(r, "dare R");
  if (b.rows() != a.rows() || q.rows() != a.rows() || r.rows() != b.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "dare shapes are inconsistent");
  }
  Eigen::LLT<Matrix> r_chol(0.5 * (r + r.transpose()));
  if (r_chol.info() != Eigen::Success) {
    throw Error(ErrorKind::kNotPositiveDefinite, "dare R must be positive definite");
  }

  constexpr int kMaxIterations = 100000;
  constexpr double kStop = 1e-10;

  Matrix p = 0.5 * (q + q.transpose());
  int it = 0;
  bool converged = false;
  for (; it < kMaxIterations; ++it) {
    Matrix next = riccati_map(a, b, q, r, p);
    if (!next.allFinite()) break;
    const double step = spectral_norm(next - p);
    p = std::move(next);
    if (step <= kStop * std::max(1.0, spectral_norm(p))) {
      converged = true;
      break;
    }
  }
  if (!converged || dare_residual(a, b, q, r, p) > 1e-8 * std::max(1.0, spectral_norm(p))) {
    throw Error(ErrorKind::kNonConvergence, "Riccati recursion did not converge");
  }
  const Matrix s = b.transpose() * p * b + r;
  Matrix k = -s.ldlt().solve(b.transpose() * p * a);
  if (!(spectral_radius(a + b * k) < 1.0)) {
    throw Error(ErrorKind::kUnstable, "DARE gain does not stabilize the closed loop");
  }
  return DareSolution{std::move(p), std::move(k), it + 1};
}

Matrix matrix_exponential(const MatrixRef& s) {
  require_square(s, "matrix_exponential input");
  require_finite(s, "matrix_exponential input");
  const Eigen::Index d = s.rows();
  const double norm1 = s.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Matrix x = s / std::ldexp(1.0, squarings);

  Matrix result = Matrix::Identity(d, d);
  Matrix term = Matrix::Identity(d, d);
  for (int k = 1; k <= 40; ++k) {
    term = term * x / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-18 * result.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

Matrix random_rotation(Eigen::Index d, double gamma, std::uint64_t seed) {
  if (d < 1) throw Error(ErrorKind::kInvalidArgument, "rotation dimension must be positive");
  if (!(gamma >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "rotation scale must be >= 0");
  const Matrix l = gamma * gaussian_matrix(d, d, seed);
  return matrix_exponential(0.5 * (l - l.transpose()));
}

Matrix cholesky_lower(const MatrixRef& s) {
  require_square(s, "covariance");
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const double jitter = 1e-12 * std::max(sym.trace() / static_cast<double>(sym.rows()), 1e-300);
  Eigen::LLT<Matrix> retry(sym + jitter * Matrix::Identity(sym.rows(), sym.cols()));
  if (retry.info() != Eigen::Success) {
    throw Error(ErrorKind::kNotPositiveDefinite, "covariance has no Cholesky factor");
  }
  return retry.matrixL();
}

Matrix block_diag(const MatrixRef& a, const MatrixRef& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace dfw
