// SPDX-License-Identifier: MIT
//
// Passivity-preserving model reduction through spectral factors of the Popov
// function.  A solution X of the passivity LMI yields a stable spectral
// factor H(s) = M + L (sI - A)^{-1} B with H^~ H = Phi; reducing H with any
// H2 method and reassembling a passive ROM from the reduced factor gives a
// reduced model whose H2 error obeys an a-priori bound in the factor error.

#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "pamor/kyp.hpp"
#include "pamor/lti_core.hpp"
#include "pamor/reducers.hpp"
#include "pamor/types.hpp"

namespace pamor {

// Spectral factor system Sigma_H = (A, B, L, M) associated with a certified
// LMI solution (X, L, M); shares the state matrices (A, B) of the original
// system.  Throws UncertifiedSolution when verify_kyp rejects sol.
StateSpaceSystem build_spectral_factor(const StateSpaceSystem& sys,
                                       const KypSolution& sol);

// Everything produced by one passive reduction run.
struct PassiveRomBundle {
  StateSpaceSystem rom;          // passive reduced model (Ar, Br, Cr, Dr)
  StateSpaceSystem rom_spectral; // reduced spectral factor (Ar, Br, Lr, Mr)
  SymmetricSolution x_tilde;     // Gramian Xr certifying the reduced LMI
  Matrix V;                      // inner projection bases on the factor
  Matrix W;
  InterpolationData interp;      // inner interpolation data (when relevant)
  double factor_h2_error = 0.0;  // ||H - Hr||_H2
  bool inner_converged = false;
  int inner_iterations = 0;
  std::optional<Matrix> correction;     // filled by correction_term
  std::optional<PhRepresentation> ph;   // filled by ph_realize_rom
  std::optional<double> bound;          // filled by h2_bound (rhs)
};

// Inner H2 reducer applied to the spectral factor; defaults to irka().
using InnerReducer = std::function<RomResult(
    const StateSpaceSystem&, Index, const ReducerConfig&)>;

// Passive reduction via the spectral factor: inner-reduce (A,B,L,M) to
// (Ar,Br,Lr,Mr), then reassemble
//   Dr = 1/2 Mr^T Mr + skew(D),
//   Ar^T Xr + Xr Ar + Lr^T Lr = 0,
//   Cr = Br^T Xr + Mr^T Lr,
// so W(Xr) = [Lr Mr]^T [Lr Mr] >= 0 by construction.  Throws
// InnerRomUnstable when the inner reducer cannot produce a stable factor ROM
// (after its own retries).
PassiveRomBundle reduce_passive(const StateSpaceSystem& sys,
                                const KypSolution& sol, Index r,
                                const ReducerConfig& config = {},
                                const InnerReducer& inner = {});

// A-priori H2 error bound of the reassembled ROM (requires Mr = M, else the
// factor error leaves H2):
//   ||G - Gr||_H2 <= rhs = c * ||H - Hr||_H2,
//   c = (||H||_Hinf + ||Hr||_Hinf) / sqrt(2).
// g_err_h2 is the independently computed ||G - Gr||_H2 used for the holds
// flag.  Throws FeedthroughMismatch when the factor feedthroughs differ.
struct H2BoundReport {
  double factor_error;  // ||H - Hr||_H2
  double constant;      // c
  double rhs;           // c * factor_error
  double actual_error;  // the g_err_h2 argument echoed back
  bool holds;           // actual <= rhs * (1 + 1e-8)
};
H2BoundReport h2_bound(const StateSpaceSystem& factor,
                       const StateSpaceSystem& factor_rom, double g_err_h2,
                       double feedthrough_tol = 1e-8);

// Output-correction term of the reassembly: Cr = C V + Chat with
// Chat = B^T (W Xr - X V).  Throws NoProjectionData when V or W is empty.
struct CorrectionTerm {
  Matrix correction;  // m x r
  double relative_norm;  // ||Chat|| / max(1, ||C V||)
};
CorrectionTerm correction_term(const StateSpaceSystem& sys,
                               const KypSolution& sol, const Matrix& V,
                               const Matrix& W, const Matrix& x_tilde);

// Wilson-condition diagnostic of the reduced factor: solves
// A^T Z + Z Ar + L^T Lr = 0 and returns ||Br^T Xr - B^T Z||_F relative to
// max(1, ||Br^T Xr||_F).  Near zero iff the inner ROM satisfies the
// left-tangential first-order H2 optimality condition.
double wilson_check(const StateSpaceSystem& factor,
                    const StateSpaceSystem& factor_rom, const Matrix& x_tilde);

// Port-Hamiltonian realization of the reassembled ROM: Xr is positive
// definite for observable reduced factors, and the state transform
// T = chol(Xr)^T (so Xr = T^T T) yields A_T = T Ar T^{-1} whose LMI solution
// is the identity; J = skew(A_T), R = -sym(A_T), G/P/S/N follow.  Throws
// XNotPd.
PhRepresentation ph_realize_rom(const PassiveRomBundle& bundle);

// Hankel-ordering certificate across LMI solutions: for each solution X the
// characteristic values sigma_k = sqrt(lambda_k(P X)) of the factor
// Sigma_H(X) (X is its observability Gramian, P the shared controllability
// Gramian).  The first entry of sols is the reference minimal solution; ok
// requires sigma_ref_k <= sigma_j_k + 1e-7 * sigma_j_1 for every other j.
struct HankelOrderingReport {
  std::vector<Vector> sigma;  // one descending curve per solution
  double worst_gap = 0.0;     // min over j,k of sigma_j_k - sigma_ref_k
  bool ok = false;
};
HankelOrderingReport hankel_ordering_check(
    const StateSpaceSystem& sys, const std::vector<KypSolution>& sols,
    double tol = 1e-7);

// Passivity-preserving reduction of the dual system: requires the dual
// (-A^T, -C^T, B^T, D^T) to pass is_passive_sampled (DualNotPassive
// otherwise), runs the primal pipeline on the transposed system
// (A^T, C^T, B^T, D^T) — whose LMI solutions are exactly the inverses of the
// primal ones — and transposes the ROM back, so the
// returned bundle's rom approximates G itself while rom_spectral, x_tilde,
// and the projection data live on the transposed (dual-factor) side.
// dual_sol must solve the transposed system's LMI (e.g. via dual_solution).
PassiveRomBundle reduce_passive_dual(const StateSpaceSystem& sys,
                                     const KypSolution& dual_sol, Index r,
                                     const ReducerConfig& config = {},
                                     const InnerReducer& inner = {});

}  // namespace pamor
