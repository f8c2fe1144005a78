#include "pcat/linalg.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

namespace pcat {

bool is_symmetric(const Matrix& A, double tol) {
  if (A.rows() != A.cols()) return false;
  const double scale = 1.0 + A.cwiseAbs().maxCoeff();
  return (A - A.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

void require_symmetric(const Matrix& A, const char* what) {
  if (A.rows() != A.cols())
    throw DataError(std::string(what) + ": matrix must be square, got " +
                    std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
  if (!is_symmetric(A))
    throw DataError(std::string(what) + ": matrix is not symmetric");
}

namespace {

void canonicalize_sign(Eigen::Ref<Vector> v) {
  int arg = 0;
  double best = std::abs(v[0]);
  for (int i = 1; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best) {  // strict: ties keep the lowest index
      best = a;
      arg = i;
    }
  }
  if (v[arg] < 0.0) v = -v;
}

}  // namespace

EigPairs top_r_eig(const Matrix& A, int r) {
  require_symmetric(A, "top_r_eig");
  const int p = static_cast<int>(A.rows());
  if (r < 1 || r > p)
    throw DataError("top_r_eig: r = " + std::to_string(r) +
                    " out of range for p = " + std::to_string(p));

  Eigen::SelfAdjointEigenSolver<Matrix> solver(A);
  if (solver.info() != Eigen::Success)
    throw NumericalError("top_r_eig: eigendecomposition failed");

  // Eigen orders ascending; flip to non-increasing.
  EigPairs out;
  out.values.resize(r);
  out.vectors.resize(p, r);
  for (int i = 0; i < r; ++i) {
    out.values[i] = solver.eigenvalues()[p - 1 - i];
    out.vectors.col(i) = solver.eigenvectors().col(p - 1 - i);
    canonicalize_sign(out.vectors.col(i));
  }
  out.gap = (r < p) ? out.values[r - 1] - solver.eigenvalues()[p - 1 - r]
                    : std::numeric_limits<double>::infinity();
  out.degenerate_gap = out.gap < 1e-10;
  return out;
}

Vector sym_eigenvalues(const Matrix& A) {
  require_symmetric(A, "sym_eigenvalues");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(A, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericalError("sym_eigenvalues: eigendecomposition failed");
  return solver.eigenvalues().reverse();
}

Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C) {
  const int r = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.rows());
  if (A.cols() != r || B.cols() != m)
    throw DataError("solve_sylvester: A and B must be square");
  if (C.rows() != r || C.cols() != m)
    throw DataError("solve_sylvester: C must be r x m");

  // Spectra separation check; eigenvalues may be complex for general A, B.
  const Eigen::VectorXcd eig_a = Eigen::EigenSolver<Matrix>(A, false).eigenvalues();
  const Eigen::VectorXcd eig_b = Eigen::EigenSolver<Matrix>(B, false).eigenvalues();
  double min_sep = std::numeric_limits<double>::infinity();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < m; ++j)
      min_sep = std::min(min_sep, std::abs(eig_b[j] - eig_a[i]));
  if (!(min_sep > 1e-10))
    throw NumericalError(
        "solve_sylvester: spectra of A and B overlap (separation " +
        std::to_string(min_sep) + "); the operator is singular");

  // vec(Z*B - A*Z) = (B' (x) I_r - I_m (x) A) vec(Z), column-major stacking.
  const int dim = r * m;
  Matrix op = Matrix::Zero(dim, dim);
  for (int j = 0; j < m; ++j)
    for (int l = 0; l < m; ++l)
      if (B(l, j) != 0.0)
        op.block(j * r, l * r, r, r).diagonal().array() += B(l, j);
  for (int j = 0; j < m; ++j) op.block(j * r, j * r, r, r) -= A;

  const Eigen::Map<const Vector> c_vec(C.data(), dim);
  Vector z_vec = op.partialPivLu().solve(c_vec);
  return Eigen::Map<const Matrix>(z_vec.data(), r, m);
}

}  // namespace pcat
