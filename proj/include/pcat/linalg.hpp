#pragma once

#include "pcat/common.hpp"

namespace pcat {

// max |A_ij - A_ji| <= tol * (1 + max |A_ij|)
bool is_symmetric(const Matrix& A, double tol = 1e-10);
void require_symmetric(const Matrix& A, const char* what);

// Leading eigenpairs of a symmetric matrix, eigenvalues non-increasing.
// Eigenvector signs are canonicalized: the largest-magnitude entry of each
// column is positive, ties broken by lowest index.
struct EigPairs {
  Vector values;        // length r
  Matrix vectors;       // p x r, orthonormal columns
  double gap = 0.0;     // lambda_r - lambda_{r+1}; +inf when r == p
  bool degenerate_gap = false;  // gap below 1e-10; span is ill-defined but the
                                // returned basis is still deterministic
};

EigPairs top_r_eig(const Matrix& A, int r);

// All eigenvalues of a symmetric matrix, non-increasing.
Vector sym_eigenvalues(const Matrix& A);

// Solves Z*B - A*Z = C with A (r x r), B (m x m), C (r x m) by dense
// Kronecker vectorization. Requires the spectra of A and B to be separated
// by more than 1e-10; overlapping spectra raise NumericalError rather than
// falling back to least squares.
Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C);

}  // namespace pcat
