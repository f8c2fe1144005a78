#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pcat/grassmann.hpp"
#include "pcat/rng.hpp"
#include "pcat/simulation.hpp"

using namespace pcat;

namespace {

Projector unit_projector(int p, int axis) {
  Matrix u = Matrix::Zero(p, 1);
  u(axis, 0) = 1.0;
  return projector_from_basis(u);
}

Projector coordinate_projector(int p, std::initializer_list<int> axes) {
  Matrix u = Matrix::Zero(p, static_cast<long>(axes.size()));
  int col = 0;
  for (int axis : axes) u(axis, col++) = 1.0;
  return projector_from_basis(u);
}

}  // namespace

TEST_CASE("projector_from_basis on coordinate spans") {
  const Projector p0 = coordinate_projector(6, {0, 1});
  Matrix expected = Matrix::Zero(6, 6);
  expected(0, 0) = expected(1, 1) = 1.0;
  CHECK((p0.matrix - expected).norm() == doctest::Approx(0.0));

  const Projector p1 = coordinate_projector(6, {1, 2});
  expected.setZero();
  expected(1, 1) = expected(2, 2) = 1.0;
  CHECK((p1.matrix - expected).norm() == doctest::Approx(0.0));
}

TEST_CASE("projector_from_basis rank-one outer product") {
  Matrix u(2, 1);
  u << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const Projector proj = projector_from_basis(u);
  Matrix expected(2, 2);
  expected << 0.5, 0.5, 0.5, 0.5;
  CHECK((proj.matrix - expected).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("projector_from_basis rejects non-orthonormal input") {
  Matrix u(3, 2);
  u << 1, 0, 0, 1, 0.5, 0;
  CHECK_THROWS_AS(projector_from_basis(u), DataError);
}

TEST_CASE("random bases give valid projectors") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 2 + static_cast<int>(rng.uniform_index(15));
    const int r = 1 + static_cast<int>(rng.uniform_index(p));
    const Projector proj = projector_from_basis(haar_basis(p, r, rng));
    CHECK_NOTHROW(validate_projector(proj));
    CHECK(proj.matrix.trace() == doctest::Approx(static_cast<double>(r)));
  }
}

TEST_CASE("subspace distances") {
  const Projector e1 = unit_projector(2, 0);
  const Projector e2 = unit_projector(2, 1);
  const SubspaceDistance same = subspace_distance(e1, e1);
  CHECK(same.frobenius == doctest::Approx(0.0));
  CHECK(same.scaled == doctest::Approx(0.0));

  const SubspaceDistance orthogonal = subspace_distance(e1, e2);
  CHECK(orthogonal.frobenius == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(orthogonal.scaled == doctest::Approx(1.0).epsilon(1e-12));

  Matrix diag_u(2, 1);
  diag_u << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const SubspaceDistance halfway =
      subspace_distance(e1, projector_from_basis(diag_u));
  CHECK(halfway.frobenius == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(halfway.scaled == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(subspace_distance(e1, coordinate_projector(2, {0, 1})),
                  DataError);
}

TEST_CASE("the two scaled-metric formulas agree") {
  Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 2 + static_cast<int>(rng.uniform_index(12));
    const int r = 1 + static_cast<int>(rng.uniform_index(p));
    const Projector a = projector_from_basis(haar_basis(p, r, rng));
    const Projector b = projector_from_basis(haar_basis(p, r, rng));
    const SubspaceDistance d = subspace_distance(a, b);
    const double trace_form =
        std::sqrt(std::max(0.0, 1.0 - (a.matrix.array() * b.matrix.array()).sum() /
                                    static_cast<double>(r)));
    CHECK(std::abs(d.scaled - trace_form) <= 1e-12);
  }
}

TEST_CASE("barycenter of the toy projector pair") {
  WeightedProjectorSet set;
  set.projectors = {coordinate_projector(6, {0, 1}), coordinate_projector(6, {1, 2})};
  set.weights = {1.0, 1.0};
  const BarycenterResult result = barycenter(set, 1);
  Matrix expected = Matrix::Zero(6, 6);
  expected(1, 1) = 1.0;
  CHECK((result.projector.matrix - expected).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(result.gap == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(result.degenerate_gap);
}

TEST_CASE("barycenter of a single projector is that projector") {
  Rng rng(23);
  const Projector proj = projector_from_basis(haar_basis(7, 3, rng));
  WeightedProjectorSet set;
  set.projectors = {proj};
  set.weights = {4.2};
  const BarycenterResult result = barycenter(set, 3);
  CHECK(frobenius_distance(result.projector, proj) <= 1e-9);
}

TEST_CASE("barycenter follows the dominant weight") {
  WeightedProjectorSet set;
  set.projectors = {unit_projector(2, 0), unit_projector(2, 1)};
  set.weights = {3.0, 1.0};
  const BarycenterResult result = barycenter(set, 1);
  CHECK((result.projector.matrix - unit_projector(2, 0).matrix).norm() <= 1e-12);
}

TEST_CASE("barycenter input validation") {
  WeightedProjectorSet empty;
  CHECK_THROWS_AS(barycenter(empty, 1), DataError);

  WeightedProjectorSet set;
  set.projectors = {unit_projector(3, 0)};
  set.weights = {1.0};
  CHECK_THROWS_AS(barycenter(set, 2), DataError);
  set.weights = {-1.0};
  CHECK_THROWS_AS(barycenter(set, 1), DataError);
}

TEST_CASE("barycenter is invariant to basis rotation and weight scale") {
  Rng rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 3 + static_cast<int>(rng.uniform_index(6));
    const int r = 2;
    WeightedProjectorSet set;
    for (int k = 0; k < 3; ++k) {
      set.projectors.push_back(projector_from_basis(haar_basis(p, r, rng)));
      set.weights.push_back(0.5 + rng.uniform());
    }
    const Matrix base = barycenter(set, 1).projector.matrix;

    // Rotate one basis in-place: the projector, and hence the output, must
    // not move.
    WeightedProjectorSet rotated = set;
    const Matrix o = haar_basis(r, r, rng);
    rotated.projectors[1] =
        projector_from_basis(Matrix(*set.projectors[1].basis * o));
    CHECK((barycenter(rotated, 1).projector.matrix - base).cwiseAbs().maxCoeff() <=
          1e-10);

    WeightedProjectorSet scaled = set;
    for (double& w : scaled.weights) w *= 37.5;
    CHECK((barycenter(scaled, 1).projector.matrix - base).cwiseAbs().maxCoeff() <=
          1e-10);
  }
}

TEST_CASE("barycenter beats random rank-1 projectors at its own objective") {
  Rng rng(25);
  for (int instance = 0; instance < 5; ++instance) {
    const int p = 4 + static_cast<int>(rng.uniform_index(5));
    WeightedProjectorSet set;
    for (int k = 0; k < 4; ++k) {
      set.projectors.push_back(
          projector_from_basis(haar_basis(p, 1 + static_cast<int>(rng.uniform_index(3)), rng)));
      set.weights.push_back(0.5 + rng.uniform());
    }
    const Projector best = barycenter(set, 1).projector;
    const auto objective = [&](const Projector& candidate) {
      double value = 0.0;
      for (std::size_t k = 0; k < set.projectors.size(); ++k)
        value += set.weights[k] *
                 (set.projectors[k].matrix.array() * candidate.matrix.array()).sum();
      return value;
    };
    const double best_value = objective(best);
    for (int draw = 0; draw < 10000; ++draw)
      CHECK(objective(projector_from_basis(haar_basis(p, 1, rng))) <=
            best_value + 1e-9);
  }
}

TEST_CASE("gradient direction vanishes at fixed points") {
  Rng rng(26);
  const Projector proj = projector_from_basis(haar_basis(5, 2, rng));
  CHECK(grassmann_gradient(proj, proj.matrix).norm() <= 1e-12);
  CHECK(frobenius_distance(gradient_step(proj, proj.matrix, 0.7), proj) <= 1e-8);

  // Commuting diagonal pair.
  const Projector diag_proj = coordinate_projector(4, {0, 1});
  Vector d(4);
  d << 0.9, 0.8, 0.3, 0.1;
  const Matrix pbar = d.asDiagonal();
  CHECK(grassmann_gradient(diag_proj, pbar).norm() <= 1e-12);
  CHECK(frobenius_distance(gradient_step(diag_proj, pbar, 1.0), diag_proj) <= 1e-8);
}

TEST_CASE("gradient step matches the hand-worked 2x2 case") {
  const Projector proj = unit_projector(2, 0);
  Matrix pbar(2, 2);
  pbar << 0.5, 0.5, 0.5, 0.5;
  const Matrix direction = grassmann_gradient(proj, pbar);
  Matrix expected_direction(2, 2);
  expected_direction << 0.0, 0.5, 0.5, 0.0;
  CHECK((direction - expected_direction).norm() == doctest::Approx(0.0).epsilon(1e-14));

  // alpha = 1: retraction of [[1, .5], [.5, 0]]; its top eigenvector was
  // hand-solved in the linalg tests.
  const Projector stepped = gradient_step(proj, pbar, 1.0);
  Vector v(2);
  v << 1.0, std::sqrt(2.0) - 1.0;
  v.normalize();
  const Matrix expected = v * v.transpose();
  CHECK((stepped.matrix - expected).norm() <= 1e-10);
}

TEST_CASE("gradient direction is tangent: X = PX + XP") {
  Rng rng(27);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 2 + static_cast<int>(rng.uniform_index(19));
    const int r = 1 + static_cast<int>(rng.uniform_index(p));
    const Projector proj = projector_from_basis(haar_basis(p, r, rng));
    const Matrix g = rng.normal_matrix(p, p);
    const Matrix pbar = 0.5 * (g + g.transpose());
    const Matrix x = grassmann_gradient(proj, pbar);
    CHECK((x - x.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((x - proj.matrix * x - x * proj.matrix).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("both manifold steps return valid projectors") {
  Rng rng(28);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 3 + static_cast<int>(rng.uniform_index(10));
    const int r = 1 + static_cast<int>(rng.uniform_index(p - 1));
    const Projector proj = projector_from_basis(haar_basis(p, r, rng));
    Matrix pbar = Matrix::Zero(p, p);
    for (int k = 0; k < 3; ++k) {
      const Matrix u = haar_basis(p, r, rng);
      pbar += (0.2 + rng.uniform()) * u * u.transpose();
    }
    pbar /= 3.0;

    const Projector after_gradient = gradient_step(proj, pbar, 0.5);
    CHECK_NOTHROW(validate_projector(after_gradient));
    CHECK(after_gradient.rank == r);
    try {
      const Projector after_newton = newton_step(proj, pbar);
      validate_projector(after_newton);
      CHECK(after_newton.rank == r);
    } catch (const NumericalError&) {
      // Singular Sylvester operator: the documented gradient fallback case.
    }
  }
}

TEST_CASE("newton step is stationary on invariant subspaces") {
  Rng rng(29);
  const int p = 6, r = 2;
  const Matrix basis = haar_basis(p, p, rng);
  Vector values(p);
  values << 9, 8, 4, 3, 2, 1;
  const Matrix pbar = basis * values.asDiagonal() * basis.transpose();
  const Projector proj = projector_from_basis(basis.leftCols(r));
  const Projector next = newton_step(proj, pbar);
  CHECK(frobenius_distance(next, proj) <= 1e-8);
}

TEST_CASE("newton step detects a singular Sylvester operator") {
  const Projector proj = unit_projector(2, 0);
  Matrix pbar(2, 2);
  pbar << 0.5, 0.5, 0.5, 0.5;  // Pbar11 = Pbar22 = 0.5
  CHECK_THROWS_AS(newton_step(proj, pbar), NumericalError);
}

TEST_CASE("newton step matches the hand-worked 3x3 case") {
  const Projector proj = unit_projector(3, 0);
  Matrix pbar = Matrix::Zero(3, 3);
  pbar(0, 0) = 1.0;
  pbar(1, 1) = 0.2;
  pbar(2, 2) = 0.1;
  pbar(0, 1) = pbar(1, 0) = 0.05;
  const Projector next = newton_step(proj, pbar);

  // Z solves z * 0.2 - z = 0.05 coordinate-wise: z = -0.0625; the new range
  // is spanned by e1 - U2 Z' = (1, 0.0625, 0).
  Vector w(3);
  w << 1.0, 0.0625, 0.0;
  w.normalize();
  const Matrix expected = w * w.transpose();
  CHECK((next.matrix - expected).norm() <= 1e-10);
}

TEST_CASE("newton contracts near a well-gapped maximizer") {
  Rng rng(30);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 4 + static_cast<int>(rng.uniform_index(8));
    const int r = 1 + static_cast<int>(rng.uniform_index(2));
    const Matrix basis = haar_basis(p, p, rng);
    Vector values(p);
    for (int i = 0; i < p; ++i) values[i] = (i < r) ? 10.0 - i : 1.0 - 0.05 * i;
    const Matrix pbar = basis * values.asDiagonal() * basis.transpose();
    const Projector target = projector_from_basis(basis.leftCols(r));

    // Start near the maximizer.
    Matrix perturbed = target.matrix + 0.05 * goe_matrix(p, rng);
    perturbed = 0.5 * (perturbed + perturbed.transpose());
    const Projector start =
        projector_from_basis(top_r_eig(perturbed, r).vectors);

    const double before = frobenius_distance(start, target);
    if (before < 1e-12) continue;
    const Projector after = newton_step(start, pbar);
    CHECK(frobenius_distance(after, target) < before);
  }
}
