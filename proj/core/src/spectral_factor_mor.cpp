// SPDX-License-Identifier: MIT

#include "pamor/spectral_factor_mor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace pamor {

namespace {

// Non-negative eigenvalue clip for Gramian-like matrices: X ~ F F^T with F
// of size n x rank.  O(eps) negative eigenvalues are clipped, not rejected.
Matrix gramian_clip_factor(const Matrix& X) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(X));
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "symmetric eigensolver failed");
  }
  const Vector& vals = es.eigenvalues();  // ascending
  const Index n = vals.size();
  const double cut =
      1e-14 * std::max(n > 0 ? std::abs(vals(n - 1)) : 0.0,
                       n > 0 ? std::abs(vals(0)) : 0.0);
  Index rank = 0;
  for (Index i = 0; i < n; ++i) {
    if (vals(i) > cut) ++rank;
  }
  Matrix F(n, rank);
  for (Index k = 0; k < rank; ++k) {
    const Index i = n - 1 - k;
    F.col(k) = std::sqrt(vals(i)) * es.eigenvectors().col(i);
  }
  return F;
}

}  // namespace

StateSpaceSystem build_spectral_factor(const StateSpaceSystem& sys,
                                       const KypSolution& sol) {
  const KypCertificate cert = verify_kyp(sys, sol);
  if (!cert.ok) {
    throw Error(ErrorCode::UncertifiedSolution,
                "LMI solution failed verification (min eig rel " +
                    std::to_string(cert.min_eig_rel) + ", factor error " +
                    std::to_string(cert.factor_error) + ", Popov error " +
                    std::to_string(cert.popov_error) + ")");
  }
  StateSpaceSystem factor;
  factor.A = sys.A;
  factor.B = sys.B;
  factor.C = sol.factors.L;
  factor.D = sol.factors.M;
  return factor;
}

PassiveRomBundle reduce_passive(const StateSpaceSystem& sys,
                                const KypSolution& sol, Index r,
                                const ReducerConfig& config,
                                const InnerReducer& inner) {
  const StateSpaceSystem factor = build_spectral_factor(sys, sol);

  RomResult inner_res;
  if (inner) {
    inner_res = inner(factor, r, config);
  } else {
    inner_res = irka(factor, r, config);
  }
  if (inner_res.rom.n() != r) {
    throw Error(ErrorCode::DimensionMismatch,
                "inner reducer returned order " +
                    std::to_string(inner_res.rom.n()) + ", expected " +
                    std::to_string(r));
  }
  if (spectral_abscissa(inner_res.rom.A) >= 0.0) {
    throw Error(ErrorCode::InnerRomUnstable,
                "inner reducer produced an unstable spectral-factor ROM");
  }

  // Reassembly: the reduced factor (Ar, Br, Lr, Mr) defines the passive ROM
  //   Dr = 1/2 Mr^T Mr + skew(D),
  //   Ar^T Xr + Xr Ar + Lr^T Lr = 0,
  //   Cr = Br^T Xr + Mr^T Lr,
  // so W(Xr) = [Lr Mr]^T [Lr Mr] >= 0 certifies passivity by construction.
  const Matrix& Ar = inner_res.rom.A;
  const Matrix& Br = inner_res.rom.B;
  const Matrix& Lr = inner_res.rom.C;
  const Matrix& Mr = inner_res.rom.D;

  PassiveRomBundle bundle;
  bundle.x_tilde = solve_lyapunov(Ar, Lr.transpose() * Lr);
  bundle.rom.A = Ar;
  bundle.rom.B = Br;
  bundle.rom.C = Br.transpose() * bundle.x_tilde.X + Mr.transpose() * Lr;
  bundle.rom.D = 0.5 * Mr.transpose() * Mr + skew(sys.D);
  bundle.rom_spectral = inner_res.rom;
  bundle.V = std::move(inner_res.V);
  bundle.W = std::move(inner_res.W);
  bundle.interp = std::move(inner_res.interp);
  bundle.factor_h2_error = h2_error(factor, bundle.rom_spectral);
  bundle.inner_converged = inner_res.converged;
  bundle.inner_iterations = inner_res.iterations;
  return bundle;
}

H2BoundReport h2_bound(const StateSpaceSystem& factor,
                       const StateSpaceSystem& factor_rom, double g_err_h2,
                       double feedthrough_tol) {
  const double m_gap = (factor.D - factor_rom.D).norm();
  if (m_gap > feedthrough_tol * std::max(1.0, factor.D.norm())) {
    throw Error(ErrorCode::FeedthroughMismatch,
                "the bound needs matching spectral-factor feedthroughs; "
                "||M - Mr||_F = " +
                    std::to_string(m_gap));
  }
  H2BoundReport report;
  report.factor_error = h2_error(factor, factor_rom);
  report.constant =
      (hinf_norm(factor) + hinf_norm(factor_rom)) / std::sqrt(2.0);
  report.rhs = report.constant * report.factor_error;
  report.actual_error = g_err_h2;
  report.holds = g_err_h2 <= report.rhs * (1.0 + 1e-8);
  return report;
}

CorrectionTerm correction_term(const StateSpaceSystem& sys,
                               const KypSolution& sol, const Matrix& V,
                               const Matrix& W, const Matrix& x_tilde) {
  if (V.size() == 0 || W.size() == 0) {
    throw Error(ErrorCode::NoProjectionData,
                "correction term needs the inner projection bases");
  }
  const Index n = sys.n();
  const Index r = V.cols();
  if (V.rows() != n || W.rows() != n || W.cols() != r ||
      x_tilde.rows() != r || x_tilde.cols() != r || sol.X.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "projection bases / solutions have inconsistent shapes");
  }
  CorrectionTerm out;
  out.correction = sys.B.transpose() * (W * x_tilde - sol.X * V);
  out.relative_norm =
      out.correction.norm() / std::max(1.0, (sys.C * V).norm());
  return out;
}

double wilson_check(const StateSpaceSystem& factor,
                    const StateSpaceSystem& factor_rom,
                    const Matrix& x_tilde) {
  // Z solves A^T Z + Z Ar + L^T Lr = 0.
  const Matrix Z =
      solve_sylvester(factor.A.transpose(), factor_rom.A,
                      factor.C.transpose() * factor_rom.C);
  const Matrix lhs = factor_rom.B.transpose() * x_tilde;
  const Matrix rhs = factor.B.transpose() * Z;
  return (lhs - rhs).norm() / std::max(1.0, lhs.norm());
}

PhRepresentation ph_realize_rom(const PassiveRomBundle& bundle) {
  const Index r = bundle.rom.n();
  const Eigen::LLT<Matrix> llt(sym(bundle.x_tilde.X));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::XNotPd,
                "the reduced LMI solution is not positive definite (reduced "
                "factor not observable?)");
  }
  // X = T^T T with T upper triangular; in z = T x coordinates the LMI
  // solution is the identity, so J/R split off the transformed A directly.
  const Matrix T = llt.matrixL().transpose();
  const auto Tv = T.triangularView<Eigen::Upper>();
  const Matrix a_t = T * Tv.solve<Eigen::OnTheRight>(bundle.rom.A);
  const Matrix b_t = T * bundle.rom.B;
  const Matrix c_t =
      Tv.transpose().solve(bundle.rom.C.transpose()).transpose();

  PhRepresentation ph;
  ph.J = skew(a_t);
  ph.R = -sym(a_t);
  ph.Q = Matrix::Identity(r, r);
  ph.G = 0.5 * (c_t.transpose() + b_t);
  ph.P = 0.5 * (c_t.transpose() - b_t);
  ph.S = sym(bundle.rom.D);
  ph.N = skew(bundle.rom.D);
  ph.validate(1e-8);
  return ph;
}

HankelOrderingReport hankel_ordering_check(const StateSpaceSystem& sys,
                                           const std::vector<KypSolution>& sols,
                                           double tol) {
  if (sols.empty()) {
    throw Error(ErrorCode::InvalidConfig,
                "hankel_ordering_check needs at least the minimal solution");
  }
  const Index n = sys.n();
  // Shared controllability Gramian of (A, B).
  const Matrix P = gramians(sys).P.X;
  const Matrix Lp = gramian_clip_factor(P);  // P = Lp Lp^T

  HankelOrderingReport report;
  report.sigma.reserve(sols.size());
  for (const KypSolution& sol : sols) {
    if (sol.X.rows() != n || sol.X.cols() != n) {
      throw Error(ErrorCode::DimensionMismatch,
                  "LMI solution dimension does not match the system");
    }
    // sigma_k = sqrt(lambda_k(P X)) via the symmetric form Lp^T X Lp.
    Eigen::SelfAdjointEigenSolver<Matrix> es(
        sym(Lp.transpose() * sol.X * Lp));
    if (es.info() != Eigen::Success) {
      throw Error(ErrorCode::NoConvergence, "symmetric eigensolver failed");
    }
    Vector sigma = Vector::Zero(n);
    const Index k = es.eigenvalues().size();
    for (Index i = 0; i < k; ++i) {
      const double lam = es.eigenvalues()(k - 1 - i);  // descending
      sigma(i) = lam > 0.0 ? std::sqrt(lam) : 0.0;
    }
    report.sigma.push_back(std::move(sigma));
  }

  const Vector& ref = report.sigma.front();
  report.worst_gap = std::numeric_limits<double>::infinity();
  report.ok = true;
  for (std::size_t j = 1; j < report.sigma.size(); ++j) {
    const Vector& other = report.sigma[j];
    const double slack = tol * (other.size() > 0 ? other(0) : 0.0);
    for (Index k = 0; k < n; ++k) {
      const double gap = other(k) - ref(k);
      report.worst_gap = std::min(report.worst_gap, gap);
      if (gap < -slack) report.ok = false;
    }
  }
  if (report.sigma.size() == 1) report.worst_gap = 0.0;
  return report;
}

PassiveRomBundle reduce_passive_dual(const StateSpaceSystem& sys,
                                     const KypSolution& dual_sol, Index r,
                                     const ReducerConfig& config,
                                     const InnerReducer& inner) {
  const PassivityReport dual_rep = is_passive_sampled(dual_system(sys));
  if (!dual_rep.passive) {
    throw Error(ErrorCode::DualNotPassive,
                "the dual system fails the sampled passivity check (margin " +
                    std::to_string(dual_rep.worst_margin) + " at w = " +
                    std::to_string(dual_rep.worst_frequency) + ")");
  }

  StateSpaceSystem transposed;
  transposed.A = sys.A.transpose();
  transposed.B = sys.C.transpose();
  transposed.C = sys.B.transpose();
  transposed.D = sys.D.transpose();

  PassiveRomBundle bundle =
      reduce_passive(transposed, dual_sol, r, config, inner);

  // The bundle's ROM approximates G(s)^T; transpose it back to G.
  StateSpaceSystem rom;
  rom.A = bundle.rom.A.transpose();
  rom.B = bundle.rom.C.transpose();
  rom.C = bundle.rom.B.transpose();
  rom.D = bundle.rom.D.transpose();
  bundle.rom = std::move(rom);
  return bundle;
}

}  // namespace pamor
