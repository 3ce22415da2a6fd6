// SPDX-License-Identifier: MIT

#include "pamor/contractive.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace pamor {

namespace {

// (I + D)^{-1} style feedthrough inverse with a condition-number gate.
Matrix guarded_inverse(const Matrix& K, const char* what) {
  const Eigen::JacobiSVD<Matrix> svd_k(
      K, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd_k.singularValues().minCoeff();
  const double smax = svd_k.singularValues().maxCoeff();
  const double cond = smin > 0.0 ? smax / smin
                                 : std::numeric_limits<double>::infinity();
  if (!(cond < 1e12)) {
    throw Error(ErrorCode::FeedthroughSingular,
                std::string(what) + " is numerically singular (condition " +
                    std::to_string(cond) + ")");
  }
  return K.partialPivLu().inverse();
}

void require_square(const StateSpaceSystem& sys, const char* who) {
  if (sys.m() != sys.p()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(who) + " needs a square system (m = p)");
  }
}

// Realization of I - G: y = u - G u.
StateSpaceSystem eye_minus(const StateSpaceSystem& g) {
  StateSpaceSystem out = g;
  out.C = -g.C;
  out.D = Matrix::Identity(g.p(), g.m()) - g.D;
  return out;
}

}  // namespace

ContractivityReport is_contractive_sampled(const BoundedRealSystem& br,
                                           const FrequencyGrid& grid) {
  if (grid.points.empty()) {
    throw Error(ErrorCode::InvalidConfig, "frequency grid is empty");
  }
  const StateSpaceSystem& sys = br.system;
  ContractivityReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (double w : grid.points) {
    ComplexMatrix g;
    try {
      g = transfer_eval(sys, Complex(0.0, w));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SingularShift) {
        ++rep.skipped;
        continue;
      }
      throw;
    }
    const ComplexMatrix psi =
        ComplexMatrix::Identity(sys.m(), sys.m()) - g.adjoint() * g;
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(psi);
    const double lo = es.eigenvalues()(0);
    if (lo < rep.worst_margin) {
      rep.worst_margin = lo;
      rep.worst_frequency = w;
    }
  }
  if (!std::isfinite(rep.worst_margin)) {
    throw Error(ErrorCode::SingularShift,
                "every grid point hit a pole of the transfer function");
  }
  rep.contractive = rep.worst_margin >= -1e-8;
  return rep;
}

StateSpaceSystem moebius_to_positive_real(const BoundedRealSystem& br) {
  const StateSpaceSystem& gb = br.system;
  gb.validate();
  require_square(gb, "moebius_to_positive_real");
  const Index m = gb.m();
  // G = (I - Gb)^{-1} (I + Gb): with w = y + u, z = y - u = Gb w the loop
  // closes through (I - Db)^{-1}.
  const Matrix K_inv =
      guarded_inverse(Matrix::Identity(m, m) - gb.D, "I - D");
  StateSpaceSystem pr;
  pr.A = gb.A + gb.B * K_inv * gb.C;
  pr.B = 2.0 * gb.B * K_inv;
  pr.C = K_inv * gb.C;
  pr.D = K_inv * (Matrix::Identity(m, m) + gb.D);
  pr.E = gb.E;
  return pr;
}

BoundedRealSystem moebius_inverse(const StateSpaceSystem& pr) {
  pr.validate();
  require_square(pr, "moebius_inverse");
  const Index m = pr.m();
  // Gb = (G - I)(G + I)^{-1}: with u = (D + I)^{-1}(w - C x) the loop closes
  // through (I + D)^{-1}.
  const Matrix K_inv =
      guarded_inverse(Matrix::Identity(m, m) + pr.D, "I + D");
  BoundedRealSystem br;
  br.system.A = pr.A - pr.B * K_inv * pr.C;
  br.system.B = pr.B * K_inv;
  br.system.C = 2.0 * K_inv * pr.C;
  br.system.D = (pr.D - Matrix::Identity(m, m)) * K_inv;
  br.system.E = pr.E;
  return br;
}

ContractiveReduction reduce_contractive(const BoundedRealSystem& br, Index r,
                                        const ReducerConfig& config) {
  const StateSpaceSystem pr = moebius_to_positive_real(br);
  const KypExtremalPair pair = solve_kyp_extremal(pr);

  ContractiveReduction out;
  out.passive = reduce_passive(pr, pair.min, r, config);
  out.passive_h2_error = h2_error(pr, out.passive.rom);
  out.rom = moebius_inverse(out.passive.rom);

  // ||Gb - Gbr||_H2 <= 1/2 ||I - Gbr||_Hinf ||G - Gr||_H2 ||I - Gb||_Hinf
  // from Gb - Gbr = 1/2 (I - Gbr)(G - Gr)(I - Gb).
  out.bound = 0.5 * hinf_norm(eye_minus(out.rom.system)) *
              out.passive_h2_error * hinf_norm(eye_minus(br.system));
  return out;
}

}  // namespace pamor
