#include <doctest.h>

#include <cmath>

#include "dfw/linalg.hpp"
#include "dfw/rng.hpp"
#include "oracles.hpp"

using dfw::Error;
using dfw::ErrorKind;
using dfw::Matrix;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::kIo;
}

Matrix stable_matrix(Eigen::Index d, double radius, std::uint64_t seed) {
  Matrix a = dfw::gaussian_matrix(d, d, seed);
  return a * (radius / oracle::gelfand_radius(a));
}

Matrix random_psd(Eigen::Index d, std::uint64_t seed) {
  const Matrix g = dfw::gaussian_matrix(d, d, seed);
  return g * g.transpose() / static_cast<double>(d);
}

}  // namespace

TEST_CASE("orthonormal rows rejects bad input") {
  CHECK(kind_of([] { dfw::OrthonormalRows(Matrix::Constant(2, 3, 1.0)); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { dfw::OrthonormalRows(Matrix::Identity(3, 2)); }) == ErrorKind::kDimensionMismatch);
  Matrix nan = Matrix::Identity(2, 3);
  nan(0, 0) = std::nan("");
  CHECK(kind_of([&] { dfw::OrthonormalRows{nan}; }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("orthonormalize rows") {
  SUBCASE("orthonormal input is a fixed point") {
    const Matrix m = Matrix::Identity(2, 4);
    const auto f = dfw::orthonormalize_rows(m);
    CHECK((f.q.mat() - m).norm() <= 1e-12);
    CHECK((f.r - Matrix::Identity(2, 2)).norm() <= 1e-12);
  }
  SUBCASE("diagonal scaling") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 2;
    m(1, 1) = 3;
    const auto f = dfw::orthonormalize_rows(m);
    CHECK((f.q.mat() - Matrix::Identity(2, 2)).norm() <= 1e-12);
    CHECK((f.r - m).norm() <= 1e-12);
  }
  SUBCASE("random 3x7 reconstructs") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Matrix m = dfw::gaussian_matrix(3, 7, s);
      const auto f = dfw::orthonormalize_rows(m);
      CHECK(oracle::power_norm(f.r * f.q.mat() - m) <= 1e-10 * oracle::power_norm(m));
      CHECK(oracle::orthogonality_defect(f.q.mat()) <= 1e-10);
      for (Eigen::Index i = 0; i < 3; ++i) {
        CHECK(f.r(i, i) > 0.0);
        for (Eigen::Index j = i + 1; j < 3; ++j) CHECK(f.r(i, j) == 0.0);
      }
    }
  }
  SUBCASE("idempotent") {
    const auto once = dfw::orthonormalize_rows(dfw::gaussian_matrix(4, 9, 11));
    const auto twice = dfw::orthonormalize_rows(once.q.mat());
    CHECK((twice.r - Matrix::Identity(4, 4)).norm() <= 1e-10);
  }
  SUBCASE("rank deficient") {
    Matrix m = dfw::gaussian_matrix(3, 6, 2);
    m.row(2) = 2.0 * m.row(0) - m.row(1);
    CHECK(kind_of([&] { dfw::orthonormalize_rows(m); }) == ErrorKind::kRankDeficient);
  }
}

TEST_CASE("orthonormal complement") {
  SUBCASE("1x2") {
    const dfw::OrthonormalRows p(Matrix{{1.0, 0.0}});
    const auto c = dfw::orthonormal_complement(p);
    REQUIRE(c.rank() == 1);
    CHECK(std::abs(c.mat()(0, 0)) <= 1e-12);
    CHECK(std::abs(std::abs(c.mat()(0, 1)) - 1.0) <= 1e-12);
  }
  SUBCASE("coordinate rows") {
    const dfw::OrthonormalRows p(Matrix::Identity(2, 5));
    const auto c = dfw::orthonormal_complement(p);
    CHECK(c.rank() == 3);
    CHECK(c.mat().leftCols(2).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("random 3x7 stacks to an orthogonal matrix") {
    const auto p = dfw::orthonormalize_rows(dfw::gaussian_matrix(3, 7, 5)).q;
    const auto c = dfw::orthonormal_complement(p);
    Matrix stacked(7, 7);
    stacked << p.mat(), c.mat();
    CHECK(oracle::orthogonality_defect(stacked) <= 1e-10);
    CHECK(oracle::matmul(c.mat(), p.mat().transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("square input has no complement") {
    const dfw::OrthonormalRows p(Matrix::Identity(3, 3));
    CHECK(kind_of([&] { dfw::orthonormal_complement(p); }) == ErrorKind::kNoComplement);
  }
}

TEST_CASE("spectral norm") {
  CHECK(dfw::spectral_norm(Matrix::Identity(3, 3)) == doctest::Approx(1.0).epsilon(1e-14));
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 1, -4, 2;
  CHECK(dfw::spectral_norm(d) == doctest::Approx(4.0).epsilon(1e-14));
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Matrix m = dfw::gaussian_matrix(5, 8, 100 + s);
    const double ref = oracle::power_norm(m);
    CHECK(std::abs(dfw::spectral_norm(m) - ref) <= 1e-8 * ref);
    CHECK(std::abs(dfw::spectral_norm(m) - dfw::spectral_norm(m.transpose())) <= 1e-12 * ref);
  }
  const Matrix big = dfw::gaussian_matrix(30, 40, 7);
  CHECK(std::abs(dfw::spectral_norm(big) - oracle::power_norm(big)) <= 1e-8 * oracle::power_norm(big));
}

TEST_CASE("spectral radius and symmetric extremes") {
  const Matrix a = stable_matrix(6, 0.8, 3);
  CHECK(dfw::spectral_radius(a) == doctest::Approx(oracle::gelfand_radius(a)).epsilon(1e-3));
  const Matrix s = random_psd(5, 8) + Matrix::Identity(5, 5);
  const auto ev = oracle::jacobi_eigenvalues(s);
  const auto ext = dfw::symmetric_eigen_extremes(s);
  CHECK(ext.min == doctest::Approx(ev.front()).epsilon(1e-10));
  CHECK(ext.max == doctest::Approx(ev.back()).epsilon(1e-10));
  double inv_sum = 0.0;
  for (double e : ev) inv_sum += 1.0 / e;
  CHECK(dfw::inverse_nuclear_norm(s) == doctest::Approx(inv_sum).epsilon(1e-10));
  CHECK(kind_of([] { dfw::inverse_nuclear_norm(Matrix::Zero(2, 2)); }) == ErrorKind::kSingularForcing);
}

TEST_CASE("dlyap") {
  SUBCASE("A = 0 returns Q") {
    const Matrix q = random_psd(4, 1);
    CHECK((dfw::dlyap(Matrix::Zero(4, 4), q) - q).norm() <= 1e-14);
  }
  SUBCASE("scalar closed form") {
    CHECK(dfw::dlyap(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 1.0))(0, 0) ==
          doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  }
  SUBCASE("matches truncated series") {
    const Matrix a = stable_matrix(4, 0.8, 21);
    const Matrix q = random_psd(4, 22);
    const Matrix ref = oracle::neumann_dlyap(a, q, 400);
    CHECK((dfw::dlyap(a, q) - ref).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("residual bound on random instances") {
    for (std::uint64_t s = 0; s < 100; ++s) {
      const Eigen::Index d = 1 + static_cast<Eigen::Index>(s % 10);
      const Matrix a = stable_matrix(d, 0.3 + 0.6 * static_cast<double>(s % 7) / 6.0, 1000 + s);
      const Matrix q = random_psd(d, 2000 + s);
      const Matrix sig = dfw::dlyap(a, q);
      const double res = oracle::power_norm(sig - a * sig * a.transpose() - q);
      CHECK(res <= 1e-10 * std::max(1.0, oracle::power_norm(sig)));
      CHECK((sig - sig.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("errors") {
    CHECK(kind_of([] { dfw::dlyap(Matrix::Identity(2, 2), Matrix::Identity(2, 2)); }) == ErrorKind::kUnstable);
    Matrix q = Matrix::Identity(2, 2);
    q(0, 1) = 0.5;
    CHECK(kind_of([&] { dfw::dlyap(Matrix::Zero(2, 2), q); }) == ErrorKind::kInvalidArgument);
    CHECK(kind_of([] { dfw::dlyap(Matrix::Zero(2, 3), Matrix::Identity(2, 2)); }) ==
          ErrorKind::kDimensionMismatch);
  }
}

TEST_CASE("dare") {
  SUBCASE("scalar root") {
    const Matrix a{{0.9}}, b{{1.0}}, q{{1.0}}, r{{1.0}};
    const auto sol = dfw::dare(a, b, q, r);
    const double p = oracle::scalar_dare(0.9, 1.0, 1.0, 1.0);
    CHECK(sol.p(0, 0) == doctest::Approx(p).epsilon(1e-10));
    CHECK(dfw::dare_residual(a, b, q, r, sol.p) <= 1e-10);
    CHECK(std::abs(0.9 + sol.k(0, 0)) < 1.0);
    CHECK(sol.k(0, 0) == doctest::Approx(-p * 0.9 / (p + 1.0)).epsilon(1e-10));
  }
  SUBCASE("zero state cost") {
    const Matrix a = stable_matrix(3, 0.5, 4);
    const auto sol = dfw::dare(a, dfw::gaussian_matrix(3, 2, 5), Matrix::Zero(3, 3), Matrix::Identity(2, 2));
    CHECK(sol.p.norm() == 0.0);
    CHECK(sol.k.norm() == 0.0);
  }
  SUBCASE("random systems") {
    int solved = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      dfw::Rng rng(s);
      const Eigen::Index n = 2 + static_cast<Eigen::Index>(s % 5);
      Matrix a(n, n), b(n, 2);
      for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(-1, 1);
      for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.uniform(-1, 1);
      const Matrix q = (1.0 + static_cast<double>(s % 3)) * Matrix::Identity(n, n);
      const Matrix r = 0.25 * Matrix::Identity(2, 2);
      const auto sol = dfw::dare(a, b, q, r);
      CHECK(dfw::dare_residual(a, b, q, r, sol.p) <= 1e-8 * std::max(1.0, oracle::power_norm(sol.p)));
      CHECK(oracle::gelfand_radius(a + b * sol.k) < 1.0);
      ++solved;
    }
    CHECK(solved == 100);
  }
  SUBCASE("indefinite input cost") {
    CHECK(kind_of([] {
            dfw::dare(Matrix{{0.5}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{-1.0}});
          }) == ErrorKind::kNotPositiveDefinite);
  }
}

TEST_CASE("matrix exponential") {
  CHECK((dfw::matrix_exponential(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)).norm() == 0.0);
  CHECK(dfw::matrix_exponential(Matrix{{1.0}})(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  Matrix diag = Matrix::Zero(2, 2);
  diag.diagonal() << -3.0, 2.5;
  const Matrix e = dfw::matrix_exponential(diag);
  CHECK(e(0, 0) == doctest::Approx(std::exp(-3.0)).epsilon(1e-12));
  CHECK(e(1, 1) == doctest::Approx(std::exp(2.5)).epsilon(1e-12));
  const Matrix g = 3.0 * dfw::gaussian_matrix(5, 5, 9);
  const Matrix skew = 0.5 * (g - g.transpose());
  const Matrix prod = oracle::matmul(dfw::matrix_exponential(skew), dfw::matrix_exponential(-skew));
  CHECK((prod - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("random rotation") {
  CHECK((dfw::random_rotation(4, 0.0, 1) - Matrix::Identity(4, 4)).norm() == 0.0);
  for (double gamma : {0.01, 0.3, 1.0, 5.0}) {
    const Matrix r = dfw::random_rotation(6, gamma, 17);
    CHECK(oracle::orthogonality_defect(r) <= 1e-10);
    CHECK(oracle::determinant(r) == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(dfw::random_rotation(5, 0.7, 3) == dfw::random_rotation(5, 0.7, 3));
  CHECK(dfw::random_rotation(5, 0.7, 3) != dfw::random_rotation(5, 0.7, 4));
  for (double gamma : {1e-4, 1e-2, 0.1}) {
    CHECK(oracle::power_norm(dfw::random_rotation(7, gamma, 5) - Matrix::Identity(7, 7)) <= 10.0 * gamma);
  }
  CHECK(kind_of([] { dfw::random_rotation(3, -1.0, 0); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("cholesky and block diagonal") {
  const Matrix s = random_psd(4, 6) + 0.1 * Matrix::Identity(4, 4);
  const Matrix l = dfw::cholesky_lower(s);
  CHECK((oracle::matmul(l, l.transpose()) - s).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(kind_of([] { dfw::cholesky_lower(-Matrix::Identity(2, 2)); }) == ErrorKind::kNotPositiveDefinite);
  const Matrix bd = dfw::block_diag(Matrix::Constant(1, 1, 2.0), Matrix::Identity(2, 2));
  CHECK(bd.rows() == 3);
  CHECK(bd(0, 0) == 2.0);
  CHECK(bd(0, 1) == 0.0);
  CHECK(bd(2, 2) == 1.0);
}

TEST_CASE("rng streams") {
  dfw::Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(dfw::Rng(1).split("x").key() != dfw::Rng(1).split("y").key());
  CHECK(dfw::derive_seed(3, {1, 2}) == dfw::Rng(3).split(1).split(2).key());
  dfw::Rng n(7);
  double sum = 0.0, sq = 0.0;
  const int count = 200000;
  for (int i = 0; i < count; ++i) {
    const double x = n.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / count) < 0.01);
  CHECK(std::abs(sq / count - 1.0) < 0.02);
}
