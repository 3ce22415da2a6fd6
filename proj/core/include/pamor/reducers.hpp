// SPDX-License-Identifier: MIT
//
// Projection-based model reducers: Petrov-Galerkin projection, tangential
// rational Krylov bases, H2-optimal interpolation (IRKA), its structure-
// preserving port-Hamiltonian variant, and positive-real balanced truncation.

#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pamor/kyp.hpp"
#include "pamor/lti_core.hpp"
#include "pamor/types.hpp"

namespace pamor {

// Interpolation points with tangential directions; non-real entries must
// appear in conjugate pairs so the bases can be realified.
struct InterpolationData {
  std::vector<Complex> points;  // s_i
  ComplexMatrix right_dirs;     // m x r, column i is r_i
  ComplexMatrix left_dirs;      // p x r, column i is l_i
};

struct ReducerConfig {
  int max_iters = 200;        // fixed-point iteration cap
  double conv_tol = 1e-6;     // relative l2 change of sorted points
  int restarts = 3;           // independent seeds, best H2 result kept
  std::uint64_t seed = 0;     // base RNG seed for random initial bases
  int stability_retry = 10;   // fresh inits allowed on an unstable final ROM
};

struct RomResult {
  StateSpaceSystem rom;
  Matrix V;                      // n x r right projection basis
  Matrix W;                      // n x r left projection basis, W^T V = I
  InterpolationData interp;      // final interpolation data (when relevant)
  int iterations = 0;            // fixed-point iterations of the winning run
  bool converged = false;        // point fixed-point reached
  std::vector<double> history;   // per-iteration relative point changes
};

// Petrov-Galerkin projection: rom = (W^T A V, W^T B, C V, D).  Requires
// ||W^T V - I||_F <= 1e-8 (NotBiorthogonal otherwise) and full column rank
// (RankDeficientBasis).
StateSpaceSystem projection_rom(const StateSpaceSystem& sys, const Matrix& V,
                                const Matrix& W);

// Biorthogonalizes (V, W) in place: thin QR of each, then W <- W (V^T W)^{-1}
// so that W^T V = I.  Throws RankDeficientBasis when V^T W is singular.
void biorthogonalize(Matrix& V, Matrix& W);

// Real tangential Krylov bases: Ran(V) spans { (s_i I - A)^{-1} B r_i } and
// Ran(W) spans { (s_i I - A)^{-T} C^T l_i }, conjugate pairs realified into
// (real, imaginary) column pairs, then biorthogonalized to W^T V = I.
// Throws SingularShift when a point hits the spectrum, RankDeficientBasis on
// collapsing directions.
std::pair<Matrix, Matrix> tangential_basis(const StateSpaceSystem& sys,
                                           const InterpolationData& interp);

// IRKA: iterates Hermite interpolation at mirrored ROM poles until the
// (sorted) points reach a fixed point.  A run that stops without converging
// returns its stable iterate closest to the fixed point; a run whose every
// iterate was unstable triggers a fresh random initialization (up to
// config.stability_retry).  The best stable result by H2 error over
// config.restarts independent seeds wins.  Throws NoStableRom when every
// attempt ends unstable; non-convergence is reported through
// converged = false on the best iterate, never thrown.
RomResult irka(const StateSpaceSystem& sys, Index r,
               const ReducerConfig& config = {});

// Pole-residue expansion of a ROM: G(s) = sum_i c_i b_i^T / (s - lambda_i)
// via the eigendecomposition A = S diag(lambda) S^{-1}, b_i^T = row i of
// S^{-1} B, c_i = column i of C S.  Throws DefectiveSpectrum when cond(S)
// exceeds 1e8.
struct PoleResidue {
  ComplexVector poles;
  ComplexMatrix b_dirs;  // r x m, row i belongs to pole i
  ComplexMatrix c_dirs;  // p x r, column i belongs to pole i
};
PoleResidue pole_residue(const StateSpaceSystem& rom);

// Structure-preserving IRKA for port-Hamiltonian systems: V interpolates
// (s_i I - A)^{-1}(G - P) b_i, W := Q V (V^T Q V)^{-1}, reduced blocks
// J = W^T J W, R = W^T R W, Q = V^T Q V, G = W^T G, P = W^T P; points and
// directions come from the reduced left eigenvectors, b_i^T = y_i^T (G + P).
// The result is port-Hamiltonian (hence passive) by construction.
struct PhRomResult {
  PhRepresentation rom;
  StateSpaceSystem rom_sys;  // realized (A, B, C, D) of rom
  Matrix V;
  Matrix W;
  InterpolationData interp;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};
PhRomResult ph_irka(const PhRepresentation& ph, Index r,
                    const ReducerConfig& config = {});

// Positive-real balanced truncation: balances the minimal LMI solutions of
// the primal and dual systems (X_min and Y_min = X_max^{-1}) through factors
// X_min = L_X^T L_X, Y_min = L_Y^T L_Y and the SVD U S Z^T = L_Y L_X^T,
// truncating to V = L_Y^T U_1 S_1^{-1/2}, W = L_X^T Z_1 S_1^{-1/2}.
struct PrbtResult {
  StateSpaceSystem rom;
  Matrix V;
  Matrix W;
  Vector characteristic_values;  // all sqrt(lambda(Y_min X_min)), descending
};
PrbtResult prbt(const StateSpaceSystem& sys, Index r,
                const KypOptions& kyp_opts = {});
// Variant with precomputed extremal solutions (avoids re-solving in sweeps).
PrbtResult prbt(const StateSpaceSystem& sys, Index r, const Matrix& x_min,
                const Matrix& x_max);

// Tangential interpolation certificate: per point i the relative errors
// ||(G-Gr)(s_i) r_i||, ||l_i^T (G-Gr)(s_i)||, |l_i^T (G'-Gr')(s_i) r_i|
// with G'(s) = -C (sI-A)^{-2} B.  Never throws on bad data; points at poles
// are reported as infinite.
struct InterpolationReport {
  std::vector<double> value_error;
  std::vector<double> left_error;
  std::vector<double> hermite_error;
  double worst = 0.0;
  bool ok = false;  // worst <= tol
};
InterpolationReport verify_interpolation(const StateSpaceSystem& sys,
                                         const StateSpaceSystem& rom,
                                         const InterpolationData& interp,
                                         double tol = 1e-5);

}  // namespace pamor
