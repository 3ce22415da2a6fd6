// SPDX-License-Identifier: MIT
//
// System-level analysis of dense LTI state-space models: transfer-function
// and Popov-function evaluation, Gramians, H2/Hinf norms, Hankel singular
// values, sampled passivity checks, duals, realization changes, and minimal
// realization via balanced truncation.

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pamor/dense_linalg.hpp"
#include "pamor/types.hpp"

namespace pamor {

// G(s) = C (s E - A)^{-1} B + D evaluated at a complex point (E = I when
// absent).  Throws SingularShift when s E - A is numerically singular.
ComplexMatrix transfer_eval(const StateSpaceSystem& sys, Complex s);

// Popov function on the imaginary axis, Phi(i w) = G(i w) + G(-i w)^T;
// Hermitian for real-coefficient systems.
ComplexMatrix popov_eval(const StateSpaceSystem& sys, double omega);

// Controllability and observability Gramians of a stable standard-form
// system: A P + P A^T + B B^T = 0 and A^T Q + Q A + C^T C = 0.  A single
// real Schur decomposition serves both equations.  Throws NotStable.
struct GramianPair {
  SymmetricSolution P;  // controllability
  SymmetricSolution Q;  // observability
};
GramianPair gramians(const StateSpaceSystem& sys);

// H2 norm sqrt(trace(C P C^T)).  Returns infinity when the feedthrough is
// nonzero (||D||_F > 1e-14 * max(1, ||B||_F * ||C||_F)).  Throws NotStable.
double h2_norm(const StateSpaceSystem& sys);

// H2 norm of the difference G - Gt without forming the error system, via the
// cross Gramian term  ||G - Gt||^2 = tr(C P C^T) - 2 tr(C Z Ct^T)
// + tr(Ct Pt Ct^T) with A Z + Z At^T + B Bt^T = 0.  Feedthroughs within
// feedthrough_tol * max(1, ||D||_F) of each other are treated as equal
// (regularized factorizations leave O(eps) remnants); larger mismatches give
// infinity.
double h2_error(const StateSpaceSystem& sys, const StateSpaceSystem& rom,
                double feedthrough_tol = 1e-10);

// L-infinity norm on the imaginary axis, sup_w sigma_max(G(i w)), computed by
// the Hamiltonian imaginary-axis eigenvalue test with a grid-seeded lower
// bound.  The result is a certified upper bound within rel_tol of the
// supremum, hence never below any finite grid sweep.  For n = 0 returns
// sigma_max(D).  Unstable systems are rejected (NotStable).
double hinf_norm(const StateSpaceSystem& sys, double rel_tol = 1e-6);

// Hankel singular values sigma_k = sqrt(lambda_k(P Q)), descending, computed
// from semidefinite factors of the Gramians.  Throws NotStable.
Vector hankel_singular_values(const StateSpaceSystem& sys);

// Passivity check on a frequency sample: the worst eigenvalue of the
// Hermitian part of Phi(i w) over the grid, relative to the largest Popov
// magnitude encountered.  Grid points where i w is a pole are skipped.
struct PassivityReport {
  bool passive = false;        // worst_margin >= -1e-8 * scale
  double worst_margin = 0.0;   // min over the grid of lambda_min(Herm Phi)
  double worst_frequency = 0;  // grid point attaining the margin
  double scale = 1.0;          // max(1, max_w ||Phi(i w)||_2)
  Index skipped = 0;           // grid points on poles
};
PassivityReport is_passive_sampled(const StateSpaceSystem& sys,
                                   const FrequencyGrid& grid =
                                       FrequencyGrid::standard());

// Dual system (-A^T, -C^T, B^T, D^T) with transfer function G(-s)^T.  A
// generalized system is first converted to standard form, so the identity
// holds behaviorally; for standard inputs the map is an exact involution.
StateSpaceSystem dual_system(const StateSpaceSystem& sys);

// Converts E xdot = A x + B u with symmetric positive definite E to standard
// form via the state z = E x: (A E^{-1}, B, C E^{-1}, D).  A quadratic form
// x^T Q x becomes z^T (E^{-1} Q E^{-1}) z, so the Hamiltonian matrix Q = E of
// an energy functional 1/2 x^T E x maps to E^{-1}.  Throws ESingular.
struct StandardFormResult {
  StateSpaceSystem sys;      // standard form, same transfer function
  Matrix q_hamiltonian;      // symmetrized E^{-1}, candidate LMI solution
};
StandardFormResult generalized_to_standard(const StateSpaceSystem& sys);

// Port-Hamiltonian representation from a positive definite solution X of the
// passivity linear matrix inequality: Q = X, J/R from the split of A X^{-1},
// G/P from X^{-1} C^T against B, S/N from the feedthrough split.  Throws
// XNotPd when X fails a Cholesky factorization and NotPsd when the residual
// W(X) has an eigenvalue below -1e-8 * max(1, ||W(X)||_2).
PhRepresentation ph_from_solution(const StateSpaceSystem& sys,
                                  const Matrix& X);

// Minimal realization by balanced truncation of the states whose Hankel
// singular values fall at or below trunc_tol * sigma_1.  Returns the truncated
// system and the projection pair (V, W) with W^T V = I used to form it; for
// already-minimal systems the state dimension is unchanged.
struct MinimalRealization {
  StateSpaceSystem sys;
  Matrix V;      // n x r right basis
  Matrix W;      // n x r left basis
  Vector hsv;    // all n Hankel singular values, descending
  Index kept;    // r
};
MinimalRealization minimal_realization(const StateSpaceSystem& sys,
                                       double trunc_tol = 1e-12);

// Structure-preserving truncation of a port-Hamiltonian system: balances the
// controllability Gramian P against the energy matrix Q (factors L_P, L_Q
// with svd(L_Q^T L_P) = U S Z^T, V = L_P Z S^{-1/2}, W = L_Q U S^{-1/2} =
// Q V S^{-1}) and keeps the states with s_k > trunc_tol * s_1.  The reduced
// energy matrix V^T Q V equals diag(s) exactly, W^T V = I, and the result is
// again port-Hamiltonian — unlike plain balanced truncation this keeps the
// energy matrix available as an LMI solution of the truncated system.
struct PhTruncation {
  PhRepresentation ph;
  Matrix V;      // n x r right basis
  Matrix W;      // n x r left basis, W = Q V S^{-1}
  Vector sigma;  // all balancing values, descending
  Index kept;
};
PhTruncation ph_minimal_realization(const PhRepresentation& ph,
                                    double trunc_tol = 1e-6);

// Numerical controllability/observability ranks: the number of Gramian
// eigenvalues above tol * lambda_max.
struct MinimalityRank {
  Index controllable;
  Index observable;
};
MinimalityRank minimality_rank(const StateSpaceSystem& sys,
                               double tol = 1e-10);

}  // namespace pamor
