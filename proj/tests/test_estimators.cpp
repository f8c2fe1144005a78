#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pcat/estimators.hpp"
#include "pcat/rng.hpp"
#include "pcat/simulation.hpp"

using namespace pcat;

TEST_CASE("sample_covariance basics") {
  Dataset single;
  single.rows = Matrix(1, 3);
  single.rows << 1.0, 2.0, -1.0;
  const CovarianceEstimate one = sample_covariance(single, false);
  const Vector x = single.rows.row(0);
  CHECK((one.matrix - x * x.transpose()).norm() == doctest::Approx(0.0));

  Dataset mirrored;
  mirrored.rows = Matrix(2, 2);
  mirrored.rows << 3.0, -1.0, -3.0, 1.0;
  const CovarianceEstimate two = sample_covariance(mirrored, false);
  Vector a(2);
  a << 3.0, -1.0;
  CHECK((two.matrix - a * a.transpose()).norm() == doctest::Approx(0.0));

  Dataset eye;
  eye.rows = Matrix::Identity(2, 2);
  const CovarianceEstimate half = sample_covariance(eye, false);
  CHECK((half.matrix - 0.5 * Matrix::Identity(2, 2)).norm() ==
        doctest::Approx(0.0));

  Dataset empty;
  empty.rows = Matrix(0, 3);
  CHECK_THROWS_AS(sample_covariance(empty, false), DataError);
  CHECK_THROWS_AS(sample_covariance(single, true), DataError);
}

TEST_CASE("sample_covariance with centering removes the mean") {
  Dataset data;
  data.rows = Matrix(2, 2);
  data.rows << 1.0, 1.0, 3.0, 1.0;
  const CovarianceEstimate cov = sample_covariance(data, true);
  Matrix expected(2, 2);
  expected << 1.0, 0.0, 0.0, 0.0;
  CHECK((cov.matrix - expected).norm() == doctest::Approx(0.0));
  CHECK(cov.centered);
}

TEST_CASE("kendall_tau single pair is a unit-trace rank-1 projector") {
  Dataset data;
  data.rows = Matrix(2, 3);
  data.rows << 1.0, 0.0, 2.0, 0.0, 2.0, -1.0;
  const KendallTau result = kendall_tau(data);
  Vector diff = data.rows.row(0) - data.rows.row(1);
  diff /= diff.norm();
  CHECK((result.estimate.matrix - diff * diff.transpose()).norm() <= 1e-14);
  CHECK(result.estimate.matrix.trace() == doctest::Approx(1.0));
  CHECK(result.pairs_used == 1);
}

TEST_CASE("kendall_tau of collinear rows") {
  Vector u(3);
  u << 1.0, -2.0, 2.0;
  Dataset data;
  data.rows = Matrix(5, 3);
  for (int i = 0; i < 5; ++i) data.rows.row(i) = (i - 2.0) * u.transpose();
  const KendallTau result = kendall_tau(data);
  const Matrix expected = u * u.transpose() / u.squaredNorm();
  CHECK((result.estimate.matrix - expected).norm() <= 1e-12);
}

TEST_CASE("kendall_tau output is unit trace and PSD") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(49));
    const int p = 1 + static_cast<int>(rng.uniform_index(20));
    Dataset data;
    data.rows = rng.normal_matrix(n, p);
    const KendallTau result = kendall_tau(data);
    CHECK(result.estimate.matrix.trace() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(sym_eigenvalues(result.estimate.matrix).minCoeff() >= -1e-12);
    CHECK_NOTHROW(validate_covariance(result.estimate));
  }
}

TEST_CASE("kendall_tau subsampling everything reproduces the exhaustive sum") {
  Rng rng(32);
  Dataset data;
  data.rows = rng.normal_matrix(20, 4);
  const std::uint64_t all_pairs = 20 * 19 / 2;
  const KendallTau exhaustive = kendall_tau(data);
  const KendallTau subsampled = kendall_tau(data, all_pairs, 7);
  CHECK((exhaustive.estimate.matrix - subsampled.estimate.matrix).cwiseAbs().maxCoeff() ==
        0.0);  // bit-for-bit

  const KendallTau partial = kendall_tau(data, 50, 7);
  CHECK(partial.pairs_used == 50);
  CHECK(partial.estimate.matrix.trace() == doctest::Approx(1.0));
  const KendallTau repeat = kendall_tau(data, 50, 7);
  CHECK((partial.estimate.matrix - repeat.estimate.matrix).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kendall_tau is independent of the thread count") {
  Rng rng(33);
  Dataset data;
  data.rows = rng.normal_matrix(150, 6);
  const KendallTau serial = kendall_tau(data, 0, 0, 1);
  const KendallTau threaded = kendall_tau(data, 0, 0, 4);
  CHECK((serial.estimate.matrix - threaded.estimate.matrix).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kendall_tau counts degenerate pairs and rejects constant data") {
  Dataset with_duplicates;
  with_duplicates.rows = Matrix(3, 2);
  with_duplicates.rows << 1.0, 2.0, 1.0, 2.0, 0.0, 0.0;
  const KendallTau result = kendall_tau(with_duplicates);
  CHECK(result.degenerate_pairs == 1);
  CHECK(result.pairs_used == 2);

  Dataset constant;
  constant.rows = Matrix::Ones(4, 2);
  CHECK_THROWS_AS(kendall_tau(constant), NumericalError);
}

TEST_CASE("effective sample size formulas") {
  Vector lambda(6);
  lambda << 5, 2, 1, 1, 1, 1;
  const EffectiveSampleSize classical =
      effective_sample_size(lambda, 110, 2, SizeMode::classical);
  CHECK(classical.kappa == doctest::Approx(5.0));
  CHECK(classical.effective_rank == doctest::Approx(2.2));
  CHECK(classical.n_eff == doctest::Approx(1.0).epsilon(1e-12));

  Vector two(2);
  two << 2, 1;
  const EffectiveSampleSize small =
      effective_sample_size(two, 100, 1, SizeMode::classical);
  CHECK(small.kappa == doctest::Approx(2.0));
  CHECK(small.effective_rank == doctest::Approx(1.5));
  CHECK(small.n_eff == doctest::Approx(50.0 / 3.0).epsilon(1e-12));

  const EffectiveSampleSize elliptical =
      effective_sample_size(two, 100, 1, SizeMode::elliptical);
  CHECK(elliptical.n_eff ==
        doctest::Approx(100.0 / (4.0 * 1.0 * 2.25 * std::log(2.0))).epsilon(1e-12));
}

TEST_CASE("effective sample size requires a positive gap") {
  Vector flat(3);
  flat << 1, 1, 1;
  CHECK_THROWS_AS(effective_sample_size(flat, 10, 1, SizeMode::classical),
                  NumericalError);
  Vector bad_order(3);
  bad_order << 1, 2, 1;
  CHECK_THROWS_AS(effective_sample_size(bad_order, 10, 1, SizeMode::classical),
                  DataError);
}

TEST_CASE("sample covariance converges on a fixed seed family") {
  Rng master(34);
  Matrix sigma = Matrix::Identity(8, 8);
  sigma(0, 0) = 4.0;
  sigma(1, 1) = 2.0;
  double previous_error = -1.0;
  for (int n : {100, 400, 1600}) {
    Rng rng = master.child(static_cast<std::uint64_t>(n));
    const Dataset data = sample_dataset(sigma, n, Distribution::gaussian, 3.0, rng);
    const double error = (sample_covariance(data, false).matrix - sigma).norm();
    if (previous_error > 0.0) {
      // Error should roughly halve per 4x sample size.
      CHECK(error <= previous_error * 0.5 * 1.3);
      CHECK(error >= previous_error * 0.5 * 0.7);
    }
    previous_error = error;
  }
}

TEST_CASE("kendall eigenspace approaches the scatter eigenspace") {
  Rng rng(35);
  const int p = 10, r = 2;
  const Matrix u_s = haar_basis(p, r, rng);
  const Matrix sigma = build_covariance(u_s, Matrix(p, 0), 5.0, 1.0);
  const Dataset data = sample_dataset(sigma, 2000, Distribution::student_t, 3.0, rng);
  const KendallTau tau = kendall_tau(data);
  const Projector estimated =
      projector_from_basis(top_r_eig(tau.estimate.matrix, r).vectors);
  const Projector truth = projector_from_basis(u_s);
  CHECK(subspace_distance(estimated, truth).scaled < 0.2);
}
