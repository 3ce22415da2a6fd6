// SPDX-License-Identifier: MIT
//
// Contractive (bounded-real) systems handled through the Moebius
// transformation onto positive-real systems: G = (I - Gb)^{-1} (I + Gb) maps
// a contraction Gb to a passive G, reduction happens on the passive side,
// and the inverse map returns a contractive ROM with an induced error bound.

#pragma once

#include <utility>

#include "pamor/lti_core.hpp"
#include "pamor/reducers.hpp"
#include "pamor/spectral_factor_mor.hpp"
#include "pamor/types.hpp"

namespace pamor {

// A square system asserted contractive on the imaginary axis:
// Psi(i w) = I - Gb(-i w)^T Gb(i w) >= 0 sampled.
struct BoundedRealSystem {
  StateSpaceSystem system;
};

// Sampled bounded-real check; margin is the worst eigenvalue of Psi(i w).
struct ContractivityReport {
  bool contractive = false;  // worst_margin >= -1e-8
  double worst_margin = 0.0;
  double worst_frequency = 0.0;
  Index skipped = 0;
};
ContractivityReport is_contractive_sampled(
    const BoundedRealSystem& br,
    const FrequencyGrid& grid = FrequencyGrid::standard());

// Realization of G = (I - Gb)^{-1} (I + Gb) by output-feedback state-space
// algebra.  The contract is behavioral: the transfer function of the result
// matches the formula applied to Gb's transfer function.  Throws
// FeedthroughSingular when I - Db is singular (condition number >= 1e12).
StateSpaceSystem moebius_to_positive_real(const BoundedRealSystem& br);

// Inverse map Gb = (G - I)(G + I)^{-1}; FeedthroughSingular when I + D is
// singular.  Round trip with moebius_to_positive_real is the identity at
// sample points.
BoundedRealSystem moebius_inverse(const StateSpaceSystem& pr);

// Contractive reduction: Moebius to the passive side, spectral-factor
// reduction there with the minimal LMI solution and the IRKA inner reducer
// at order r, Moebius back.  bound is the induced estimate
//   ||Gb - Gbr||_H2 <= 1/2 ||I - Gbr||_Hinf ||G - Gr||_H2 ||I - Gb||_Hinf
// from the error identity Gb - Gbr = 1/2 (I - Gbr)(G - Gr)(I - Gb).
struct ContractiveReduction {
  BoundedRealSystem rom;
  double bound;             // right-hand side above
  double passive_h2_error;  // ||G - Gr||_H2 on the passive side
  PassiveRomBundle passive; // the inner passive-side bundle
};
ContractiveReduction reduce_contractive(const BoundedRealSystem& br, Index r,
                                        const ReducerConfig& config = {});

}  // namespace pamor
