// SPDX-License-Identifier: MIT
//
// Self-contained dense matrix kernels: Schur/eigen/SVD wrappers, semidefinite
// factorization, Lyapunov/Sylvester solvers (Bartels-Stewart with iterative
// refinement) and the extremal solver for the positive-real algebraic Riccati
// equation.  Every solver re-substitutes its output into the defining
// equation and reports the recomputed residual.

#pragma once

#include "pamor/types.hpp"

namespace pamor {

// Symmetric solution of a matrix equation together with the Frobenius norm of
// the recomputed residual of the defining equation.
struct SymmetricSolution {
  Matrix X;
  double residual_norm = 0.0;
};

// --------------------------------------------------------------------------
// Decomposition wrappers
// --------------------------------------------------------------------------

// Real Schur form A = Q T Q^T with Q orthogonal and T quasi-upper-triangular.
struct SchurForm {
  Matrix Q;
  Matrix T;
};

SchurForm schur_real(const Matrix& A);

// Eigen decomposition with right (and optionally left) eigenvectors.
// Left eigenvectors satisfy y_i^* A = lambda_i y_i^* and are returned as
// columns; they are the conjugated rows of V^{-1} scaled to unit norm.
struct EigResult {
  ComplexVector values;
  ComplexMatrix right;  // columns are right eigenvectors
  ComplexMatrix left;   // columns are left eigenvectors (unit 2-norm)
};

EigResult eig(const Matrix& A, bool with_left = false);

struct SvdResult {
  Matrix U;
  Vector S;
  Matrix V;
};

SvdResult svd(const Matrix& A);

// --------------------------------------------------------------------------
// Semidefinite factorization
// --------------------------------------------------------------------------

// Factorizes a symmetric positive semidefinite W as W = F^T F where F has
// `rank` rows, via a symmetric eigendecomposition with eigenvalue clipping.
// Eigenvalues in [-rank_tol*lambda_max, rank_tol*lambda_max] are treated as
// zero; an eigenvalue below -rank_tol*lambda_max raises Indefinite.
struct PsdFactor {
  Matrix F;
  Index rank = 0;
};

PsdFactor psd_factor(const Matrix& W, double rank_tol = 1e-10);

// --------------------------------------------------------------------------
// Matrix equations
// --------------------------------------------------------------------------

struct LyapunovOptions {
  double stability_tol = 1e-10;  // reject Re(lambda) >= -stability_tol
  double symmetry_tol = 1e-10;   // relative symmetry requirement on W
  int refine_steps = 2;          // defect-correction passes on the Schur form
};

// Solves A^T X + X A + W = 0 for stable A and symmetric PSD W.
SymmetricSolution solve_lyapunov(const Matrix& A, const Matrix& W,
                                 const LyapunovOptions& opts = {});

// Same equation with a precomputed Schur form of A (A = Q T Q^T); used by
// callers that solve several equations with the same coefficient matrix.
SymmetricSolution solve_lyapunov(const SchurForm& schur_of_A, const Matrix& W,
                                 const LyapunovOptions& opts = {});

struct SylvesterOptions {
  double separation_tol = 1e-12;  // min |lambda_i(A) + mu_j(B)| required
  int refine_steps = 1;
};

// Solves A Z + Z B + C = 0; requires sigma(A) and sigma(-B) disjoint.
Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C,
                       const SylvesterOptions& opts = {});

// --------------------------------------------------------------------------
// Extremal solutions of the positive-real Riccati equation
// --------------------------------------------------------------------------

struct AreOptions {
  double axis_tol = 1e-10;   // Hamiltonian eigenvalues closer to the
                             // imaginary axis than this flag a failed split
  int newton_refine_iters = 10;  // Newton-Kleinman polish iterations
  double psd_flag_tol = 1e-10;   // eigenvalue threshold for the PSD flag
};

struct AreDiagnostics {
  bool min_positive_semidefinite = true;
  bool max_positive_semidefinite = true;
  // Non-fatal diagnostic: whether the closed-loop matrix A - B R^{-1}(C -
  // B^T X_min) has its spectrum in the closed left half-plane, i.e. whether
  // the spectral factor built from X_min is outer.  Recorded, never asserted.
  bool min_solution_outer = true;
};

// Solves the positive-real Riccati equation
//
//   -A^T X - X A - (C^T - X B) R^{-1} (C - B^T X) = 0,   R = R^T > 0,
//
// for both extremal solutions.  Candidates come from the n-dimensional
// stable and antistable deflating subspaces of the even pencil
//
//   [ A   0     B  ]       [ I  0  0 ]
//   [ 0  -A^T  -C^T ] - s  [ 0  I  0 ] ,
//   [ C   B^T   R  ]       [ 0  0  0 ]
//
// computed by a sorted generalized real Schur decomposition (LAPACK dgges).
// Working on the pencil never inverts R, so the extraction stays well
// conditioned for the near-singular regularized feedthroughs R = eps I this
// equation sees; an explicit 2n x 2n Hamiltonian formulation loses the
// stable/antistable split there.  The two candidates are labeled min/max by
// the definiteness ordering of their difference (robust to sign-convention
// ambiguity) and polished by Newton-Kleinman iterations in the feedback
// parametrization, keeping the iterate with the smallest residual.
std::pair<SymmetricSolution, SymmetricSolution> solve_are_extremal(
    const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& R,
    const AreOptions& opts = {}, AreDiagnostics* diag = nullptr);

// Frobenius norm of the Riccati residual for a candidate solution X.
double are_residual_norm(const Matrix& A, const Matrix& B, const Matrix& C,
                         const Matrix& R, const Matrix& X);

// Largest real part over the spectrum of A (-inf for the 0 x 0 matrix).
double spectral_abscissa(const Matrix& A);

}  // namespace pamor
