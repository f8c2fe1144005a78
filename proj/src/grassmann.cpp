#include "pcat/grassmann.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace pcat {

Projector projector_from_basis(const Matrix& U) {
  const int p = static_cast<int>(U.rows());
  const int r = static_cast<int>(U.cols());
  if (r > p) throw DataError("projector_from_basis: more columns than rows");
  const Matrix gram = U.transpose() * U;
  if ((gram - Matrix::Identity(r, r)).cwiseAbs().maxCoeff() > 1e-8)
    throw DataError("projector_from_basis: columns are not orthonormal");
  Projector P;
  P.matrix = U * U.transpose();
  P.rank = r;
  P.basis = U;
  return P;
}

Projector projector_from_matrix(const Matrix& M, int rank) {
  Projector P;
  P.matrix = M;
  P.rank = rank;
  validate_projector(P);
  return P;
}

Projector zero_projector(int p) {
  Projector P;
  P.matrix = Matrix::Zero(p, p);
  P.rank = 0;
  P.basis = Matrix(p, 0);
  return P;
}

void validate_projector(const Projector& P) {
  require_symmetric(P.matrix, "projector");
  const int p = P.dim();
  if (P.rank < 0 || P.rank > p)
    throw DataError("projector: rank " + std::to_string(P.rank) +
                    " out of range for dim " + std::to_string(p));
  if ((P.matrix * P.matrix - P.matrix).norm() > 1e-8)
    throw DataError("projector: matrix is not idempotent");
  if (std::abs(P.matrix.trace() - P.rank) > 1e-6)
    throw DataError("projector: trace " + std::to_string(P.matrix.trace()) +
                    " does not match rank " + std::to_string(P.rank));
  if (P.basis) {
    if (P.basis->rows() != p || P.basis->cols() != P.rank)
      throw DataError("projector: basis shape mismatch");
    if ((*P.basis * P.basis->transpose() - P.matrix).cwiseAbs().maxCoeff() > 1e-8)
      throw DataError("projector: basis does not reproduce the matrix");
  }
}

void validate_weighted_set(const WeightedProjectorSet& set) {
  if (set.projectors.empty())
    throw DataError("weighted projector set: empty");
  if (set.weights.size() != set.projectors.size())
    throw DataError("weighted projector set: weight count mismatch");
  const int p = set.projectors.front().dim();
  for (const auto& proj : set.projectors)
    if (proj.dim() != p)
      throw DataError("weighted projector set: mixed dimensions");
  for (double w : set.weights)
    if (!(w > 0.0))
      throw DataError("weighted projector set: weights must be positive");
}

double frobenius_distance(const Projector& P, const Projector& Q) {
  if (P.dim() != Q.dim())
    throw DataError("subspace distance: dimension mismatch");
  return (P.matrix - Q.matrix).norm();
}

SubspaceDistance subspace_distance(const Projector& P, const Projector& Q) {
  if (P.rank != Q.rank)
    throw DataError("subspace_distance: scaled metric needs equal ranks, got " +
                    std::to_string(P.rank) + " and " + std::to_string(Q.rank));
  if (P.rank == 0) return {0.0, 0.0};
  SubspaceDistance d;
  d.frobenius = frobenius_distance(P, Q);
  d.scaled = std::clamp(d.frobenius / std::sqrt(2.0 * P.rank), 0.0, 1.0);
  return d;
}

BarycenterResult barycenter(const WeightedProjectorSet& set, int r_s) {
  validate_weighted_set(set);
  const int p = set.projectors.front().dim();
  int min_rank = p;
  for (const auto& proj : set.projectors) min_rank = std::min(min_rank, proj.rank);
  if (r_s < 1 || r_s > min_rank)
    throw DataError("barycenter: r_s = " + std::to_string(r_s) +
                    " exceeds the smallest input rank " + std::to_string(min_rank));

  double total = 0.0;
  Matrix avg = Matrix::Zero(p, p);
  for (std::size_t k = 0; k < set.projectors.size(); ++k) {
    avg += set.weights[k] * set.projectors[k].matrix;
    total += set.weights[k];
  }
  avg /= total;

  const EigPairs top = top_r_eig(avg, r_s);
  BarycenterResult out;
  out.projector = projector_from_basis(top.vectors);
  out.gap = top.gap;
  out.degenerate_gap = top.gap < 1e-8;
  return out;
}

Matrix grassmann_gradient(const Projector& P, const Matrix& Pbar) {
  if (Pbar.rows() != P.dim() || Pbar.cols() != P.dim())
    throw DataError("grassmann_gradient: dimension mismatch");
  require_symmetric(Pbar, "grassmann_gradient");
  const Matrix inner = P.matrix * Pbar - Pbar * P.matrix;
  return P.matrix * inner - inner * P.matrix;
}

Projector gradient_step(const Projector& P, const Matrix& Pbar, double alpha) {
  if (!(alpha > 0.0)) throw DataError("gradient_step: alpha must be positive");
  const Matrix direction = grassmann_gradient(P, Pbar);
  Matrix updated = P.matrix + alpha * direction;
  updated = 0.5 * (updated + updated.transpose());  // scrub roundoff skew
  const EigPairs top = top_r_eig(updated, P.rank);
  return projector_from_basis(top.vectors);
}

ProjectorSplit split_projector(const Projector& P) {
  validate_projector(P);
  const int p = P.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(P.matrix);
  if (solver.info() != Eigen::Success)
    throw NumericalError("split_projector: eigendecomposition failed");
  // Ascending eigenvalues: complement first (near 0), range last (near 1).
  ProjectorSplit split;
  split.complement = solver.eigenvectors().leftCols(p - P.rank);
  split.range = solver.eigenvectors().rightCols(P.rank);
  return split;
}

Projector newton_step(const Projector& P, const Matrix& Pbar) {
  if (Pbar.rows() != P.dim() || Pbar.cols() != P.dim())
    throw DataError("newton_step: dimension mismatch");
  require_symmetric(Pbar, "newton_step");
  const int p = P.dim();
  const int r = P.rank;
  if (r < 1 || r >= p)
    throw DataError("newton_step: rank must lie strictly between 0 and p");

  const ProjectorSplit split = split_projector(P);
  const Matrix& u1 = split.range;
  const Matrix& u2 = split.complement;
  const Matrix pbar11 = u1.transpose() * Pbar * u1;
  const Matrix pbar22 = u2.transpose() * Pbar * u2;
  const Matrix pbar12 = u1.transpose() * Pbar * u2;

  Matrix z;
  try {
    z = solve_sylvester(pbar11, pbar22, pbar12);
  } catch (const NumericalError& err) {
    throw NumericalError(std::string("newton_step: ") + err.what() +
                         "; fall back to gradient_step");
  }

  Matrix g = Matrix::Identity(p, p);
  g.block(r, 0, p - r, r) = -z.transpose();
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  // Map the rotated range back to ambient coordinates; only the span matters.
  Matrix ambient(p, p);
  ambient.leftCols(r) = u1;
  ambient.rightCols(p - r) = u2;
  return projector_from_basis(ambient * q.leftCols(r));
}

}  // namespace pcat
