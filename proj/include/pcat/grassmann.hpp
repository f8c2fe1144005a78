#pragma once

#include <optional>
#include <vector>

#include "pcat/linalg.hpp"

namespace pcat {

// A point on the Grassmann manifold G(p, r): a rank-r orthogonal projection
// matrix, optionally carrying a generating orthonormal basis.
struct Projector {
  Matrix matrix;                  // p x p, symmetric idempotent
  int rank = 0;
  std::optional<Matrix> basis;    // p x rank when known

  int dim() const { return static_cast<int>(matrix.rows()); }
};

Projector projector_from_basis(const Matrix& U);
Projector projector_from_matrix(const Matrix& P, int rank);
Projector zero_projector(int p);

// Throws DataError when an invariant is broken.
void validate_projector(const Projector& P);

struct WeightedProjectorSet {
  std::vector<Projector> projectors;
  std::vector<double> weights;
};

void validate_weighted_set(const WeightedProjectorSet& set);

double frobenius_distance(const Projector& P, const Projector& Q);

// Projection metric between equal-rank subspaces. The scaled form
// ||P - Q||_F / sqrt(2 r) lies in [0, 1] and equals
// sqrt(1 - tr(P Q) / r).
struct SubspaceDistance {
  double frobenius;
  double scaled;
};
SubspaceDistance subspace_distance(const Projector& P, const Projector& Q);

// Grassmannian barycenter: the rank-r_s projector spanned by the leading
// eigenvectors of the weighted average of the input projectors. The r_s-th
// eigenvalue gap of the averaged matrix is reported as an identifiability
// diagnostic; a near-zero gap flags a poorly separated barycenter but is not
// an error.
struct BarycenterResult {
  Projector projector;
  double gap = 0.0;
  bool degenerate_gap = false;
};
BarycenterResult barycenter(const WeightedProjectorSet& set, int r_s);

// Ascent direction of tr(Pbar P) at P: the double Lie bracket [P, [P, Pbar]].
Matrix grassmann_gradient(const Projector& P, const Matrix& Pbar);

// One gradient ascent step P + alpha [P, [P, Pbar]], retracted back to the
// manifold through the leading-eigenvector projector of the update.
Projector gradient_step(const Projector& P, const Matrix& Pbar, double alpha);

// One Newton step for maximizing tr(Pbar P): split the ambient space along P,
// solve Z Pbar22 - Pbar11 Z = Pbar12, and rotate the range of P by the QR
// factor of [[I, 0], [-Z', I]]. Throws NumericalError when the Sylvester
// operator is singular; callers are expected to fall back to gradient_step.
Projector newton_step(const Projector& P, const Matrix& Pbar);

// Orthonormal split of R^p along a projector: `range` spans P, `complement`
// its orthogonal complement.
struct ProjectorSplit {
  Matrix range;        // p x rank
  Matrix complement;   // p x (p - rank)
};
ProjectorSplit split_projector(const Projector& P);

}  // namespace pcat
