// SPDX-License-Identifier: MIT
//
// Kalman-Yakubovich-Popov machinery: the passivity LMI residual W(X), its
// extremal solutions via the positive-real Riccati equation, Lur'e factors
// (L, M) with W(X) = [L M]^T [L M], certification of computed solutions, and
// the bijection onto solutions of the dual system's LMI.

#pragma once

#include <optional>
#include <utility>

#include "pamor/lti_core.hpp"
#include "pamor/types.hpp"

namespace pamor {

// W(X) = [ -A^T X - X A   C^T - X B ]
//        [  C - B^T X     D + D^T   ]   (symmetric, (n+m) x (n+m))
Matrix kyp_residual(const StateSpaceSystem& sys, const Matrix& X);

// Lur'e factors of one LMI solution: W(X) = [L M]^T [L M] with L (k x n)
// and M (k x m), so -A^T X - X A = L^T L, C^T - X B = L^T M, D + D^T = M^T M
// (the last up to the epsilon regularization actually used).
struct LureFactors {
  Matrix L;
  Matrix M;
};

enum class KypKind { Min, Max, Provided };

struct KypSolution {
  Matrix X;
  LureFactors factors;
  double epsilon = 0.0;           // regularization used to produce X
  KypKind kind = KypKind::Provided;
  double residual_min_eig = 0.0;  // smallest eigenvalue of W(X)
};

struct KypOptions {
  // Regularization of R = D + D^T + epsilon I.  A negative value selects the
  // default 1e-12 * max(1, ||D + D^T||_2); zero disables regularization.
  double epsilon = -1.0;
  double ordering_tol = 1e-7;  // relative slack allowed in X_min <= X_max
  AreOptions are;
};

struct KypExtremalPair {
  KypSolution min;
  KypSolution max;
};

// Extremal solutions X_min <= X <= X_max of W(X) >= 0 for a minimal, stable,
// passive system, via the regularized positive-real Riccati equation with
// R = D + D^T + epsilon I.  Factors are L = R^{-1/2}(C - B^T X), M = R^{1/2}
// (k = m); when the regularization makes that formula miss the factorization
// invariant ||W(X) - [L M]^T [L M]||_F <= 1e-8 ||W(X)||_F + 10 epsilon (the
// X_max residual blows up as epsilon^{-1/2}), the factors fall back to a
// semidefinite factorization of W(X) with k = rank.  Throws
// SingularFeedthrough when epsilon = 0 and D + D^T is singular,
// NoHamiltonianSplit on a failed Hamiltonian split, and NoConvergence when
// the pair violates X_min <= X_max beyond ordering_tol * ||X_max||_2.
KypExtremalPair solve_kyp_extremal(const StateSpaceSystem& sys,
                                   const KypOptions& opts = {});

// Lur'e factors for a given LMI solution X, via a semidefinite factorization
// of W(X) with k = rank(W(X)) rows: [L M] = psd_factor(W(X)).F.  Throws
// Indefinite when W(X) has an eigenvalue below -rank_tol * lambda_max
// (X is not an LMI solution).
struct LureFromX {
  LureFactors factors;
  Index rank = 0;
};
LureFromX lure_factors_from_X(const StateSpaceSystem& sys, const Matrix& X,
                              double rank_tol = 1e-10);

// Wraps a user-provided LMI solution X as a certified KypSolution with
// factors from lure_factors_from_X (kind = Provided).
KypSolution kyp_solution_from_X(const StateSpaceSystem& sys, const Matrix& X,
                                double rank_tol = 1e-10);

// Diagnostic certificate for a computed solution.  Never throws: failures
// show up as large residuals / ok = false.
struct KypCertificate {
  bool ok = false;
  double min_eig_rel = 0.0;         // lambda_min(W(X)) / max(1, ||W||_2)
  double lyap_residual = 0.0;       // ||-A^T X - X A - L^T L|| / scale
  double cross_residual = 0.0;      // ||C^T - X B - L^T M|| / scale
  double feedthrough_residual = 0;  // ||D + D^T + eps I - M^T M|| / scale
  double factor_error = 0.0;        // ||W(X) - [L M]^T [L M]||_F rel + eps
  double popov_error = 0.0;         // worst sampled |Phi - H~ H| relative
};
// Popov identity H^T(-i w) H(i w) = Phi(i w) is sampled at 20 points drawn
// from `grid`; ok requires min_eig_rel >= -1e-8, the factorization invariant,
// and popov_error <= popov_tol + 100 * sol.epsilon.
KypCertificate verify_kyp(const StateSpaceSystem& sys, const KypSolution& sol,
                          const FrequencyGrid& grid = FrequencyGrid::standard(),
                          double popov_tol = 1e-6);

// Maps a solution of the primal LMI to a solution of the dual system's LMI:
// X |-> X^{-1} solves the LMI of the transposed system (A^T, C^T, B^T, D^T)
// with factors (L X^{-1}, -M), since W_T(X^{-1}) is the congruence of W(X) by
// blkdiag(X^{-1}, -I).  Throws XNotPd for non-positive-definite X.
KypSolution dual_solution(const StateSpaceSystem& sys, const KypSolution& sol);

}  // namespace pamor
