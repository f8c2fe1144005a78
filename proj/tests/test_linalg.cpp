#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pcat/linalg.hpp"
#include "pcat/rng.hpp"
#include "pcat/simulation.hpp"

using namespace pcat;

namespace {

Matrix diag6(double a, double b, double c, double d, double e, double f) {
  Vector v(6);
  v << a, b, c, d, e, f;
  return v.asDiagonal();
}

Matrix random_symmetric(int p, Rng& rng) {
  const Matrix g = rng.normal_matrix(p, p);
  return 0.5 * (g + g.transpose());
}

}  // namespace

TEST_CASE("top_r_eig on a diagonal matrix") {
  Matrix a = Vector::Zero(3).asDiagonal();
  a(0, 0) = 5;
  a(1, 1) = 2;
  a(2, 2) = 1;
  const EigPairs eig = top_r_eig(a, 2);
  CHECK(eig.values[0] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(eig.values[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(eig.vectors(0, 0)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(eig.vectors(0, 0) > 0);  // canonical sign
  CHECK(std::abs(eig.vectors(1, 1)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(eig.gap == doctest::Approx(1.0));
  CHECK_FALSE(eig.degenerate_gap);
}

TEST_CASE("top_r_eig flags a fully degenerate spectrum") {
  const EigPairs eig = top_r_eig(Matrix::Identity(3, 3), 1);
  CHECK(eig.values[0] == doctest::Approx(1.0));
  CHECK(eig.vectors.col(0).norm() == doctest::Approx(1.0));
  CHECK(eig.gap == doctest::Approx(0.0));
  CHECK(eig.degenerate_gap);
}

TEST_CASE("top_r_eig 2x2 hand-solved eigenpair") {
  Matrix a(2, 2);
  a << 1.0, 0.5, 0.5, 0.0;
  const EigPairs eig = top_r_eig(a, 1);
  const double expected = (1.0 + std::sqrt(2.0)) / 2.0;
  CHECK(eig.values[0] == doctest::Approx(expected).epsilon(1e-12));
  Vector v(2);
  v << 1.0, std::sqrt(2.0) - 1.0;
  v.normalize();
  CHECK((eig.vectors.col(0) - v).norm() == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("top_r_eig rejects bad input") {
  CHECK_THROWS_AS(top_r_eig(Matrix::Identity(3, 3), 4), DataError);
  CHECK_THROWS_AS(top_r_eig(Matrix::Identity(3, 3), 0), DataError);
  Matrix skew(2, 2);
  skew << 0.0, 1.0, -1.0, 0.0;
  CHECK_THROWS_AS(top_r_eig(skew, 1), DataError);
  CHECK_THROWS_AS(top_r_eig(Matrix::Ones(2, 3), 1), DataError);
}

TEST_CASE("full-rank decomposition reconstructs the matrix") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 2 + static_cast<int>(rng.uniform_index(19));
    const Matrix a = random_symmetric(p, rng);
    const EigPairs eig = top_r_eig(a, p);
    const Matrix rebuilt =
        eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    CHECK((rebuilt - a).norm() <= 1e-7 * (1.0 + a.norm()));
    for (int i = 0; i < p; ++i)
      CHECK((a * eig.vectors.col(i) - eig.values[i] * eig.vectors.col(i)).norm() <=
            1e-8 * (1.0 + std::abs(eig.values[i])));
  }
}

TEST_CASE("span is stable under orthogonal conjugation") {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 3 + static_cast<int>(rng.uniform_index(10));
    const int r = 1 + static_cast<int>(rng.uniform_index(p - 1));
    // Well-gapped spectrum by construction.
    Vector values(p);
    for (int i = 0; i < p; ++i) values[i] = static_cast<double>(p - i);
    const Matrix basis = haar_basis(p, p, rng);
    const Matrix a = basis * values.asDiagonal() * basis.transpose();
    const Matrix q = haar_basis(p, p, rng);

    const Matrix va = top_r_eig(a, r).vectors;
    const Matrix vb = top_r_eig(Matrix(q * a * q.transpose()), r).vectors;
    const Matrix pa = va * va.transpose();
    const Matrix pb = vb * vb.transpose();
    CHECK((pb - q * pa * q.transpose()).norm() <= 1e-7);
  }
}

TEST_CASE("solve_sylvester scalar and zero cases") {
  Matrix a(1, 1), b(1, 1), c(1, 1);
  a << 1.0;
  b << 3.0;
  c << 4.0;
  CHECK(solve_sylvester(a, b, c)(0, 0) == doctest::Approx(2.0).epsilon(1e-12));

  Rng rng(13);
  const Matrix a2 = random_symmetric(3, rng);
  const Matrix b2 = random_symmetric(2, rng) + 10.0 * Matrix::Identity(2, 2);
  CHECK(solve_sylvester(a2, b2, Matrix::Zero(3, 2)).norm() ==
        doctest::Approx(0.0));
}

TEST_CASE("solve_sylvester diagonal closed form") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  Matrix b(1, 1);
  b << 4.0;
  Matrix c(2, 1);
  c << 3.0, 4.0;
  const Matrix z = solve_sylvester(a, b, c);
  CHECK(z(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(z(1, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("solve_sylvester satisfies the defining equation on random instances") {
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = rng.normal_matrix(3, 3);
    const Matrix b = rng.normal_matrix(2, 2) + 8.0 * Matrix::Identity(2, 2);
    const Matrix c = rng.normal_matrix(3, 2);
    const Matrix z = solve_sylvester(a, b, c);
    CHECK((z * b - a * z - c).norm() <= 1e-8 * (1.0 + c.norm()));

    // Independent route: same linear system solved through a rank-revealing QR.
    Matrix op = Matrix::Zero(6, 6);
    for (int j = 0; j < 2; ++j) {
      for (int l = 0; l < 2; ++l)
        op.block(j * 3, l * 3, 3, 3) += b(l, j) * Matrix::Identity(3, 3);
      op.block(j * 3, j * 3, 3, 3) -= a;
    }
    const Eigen::Map<const Vector> c_vec(c.data(), 6);
    const Vector z_ref = op.colPivHouseholderQr().solve(c_vec);
    CHECK((Eigen::Map<const Vector>(z.data(), 6) - z_ref).norm() <= 1e-8);
  }
}

TEST_CASE("solve_sylvester refuses overlapping spectra") {
  Matrix one(1, 1);
  one << 1.0;
  CHECK_THROWS_AS(solve_sylvester(one, one, one), NumericalError);

  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  Matrix b(1, 1);
  b << 2.0;
  CHECK_THROWS_AS(solve_sylvester(a, b, Matrix::Ones(2, 1)), NumericalError);
}
