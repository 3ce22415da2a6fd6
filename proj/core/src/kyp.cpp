// SPDX-License-Identifier: MIT

#include "pamor/kyp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace pamor {

namespace {

double sym_two_norm(const Matrix& W) {
  if (W.rows() == 0) return 0.0;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(sym(W),
                                                 Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eig(const Matrix& W) {
  if (W.rows() == 0) return 0.0;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(sym(W),
                                                 Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Matrix stack_factors(const LureFactors& f) {
  Matrix LM(f.L.rows(), f.L.cols() + f.M.cols());
  LM << f.L, f.M;
  return LM;
}

StateSpaceSystem require_square_standard(const StateSpaceSystem& sys) {
  const StateSpaceSystem ss =
      sys.E ? generalized_to_standard(sys).sys : sys;
  ss.validate();
  if (ss.p() != ss.m()) {
    throw Error(ErrorCode::DimensionMismatch,
                "the passivity LMI requires a square system");
  }
  return ss;
}

}  // namespace

Matrix kyp_residual(const StateSpaceSystem& sys, const Matrix& X) {
  const StateSpaceSystem ss = require_square_standard(sys);
  const Index n = ss.n(), m = ss.m();
  if (X.rows() != n || X.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "X must be n x n");
  }
  if ((X - X.transpose()).norm() > 1e-10 * std::max(1.0, X.norm())) {
    throw Error(ErrorCode::NonSymmetric, "X must be symmetric");
  }
  Matrix W(n + m, n + m);
  W.topLeftCorner(n, n) = -ss.A.transpose() * X - X * ss.A;
  W.topRightCorner(n, m) = ss.C.transpose() - X * ss.B;
  W.bottomLeftCorner(m, n) = W.topRightCorner(n, m).transpose();
  W.bottomRightCorner(m, m) = ss.D + ss.D.transpose();
  return sym(W);
}

KypExtremalPair solve_kyp_extremal(const StateSpaceSystem& sys,
                                   const KypOptions& opts) {
  const StateSpaceSystem ss = require_square_standard(sys);
  const Index n = ss.n(), m = ss.m();
  if (spectral_abscissa(ss.A) >= -1e-10) {
    throw Error(ErrorCode::NotStable, "system must be asymptotically stable");
  }
  const Matrix Dsym = ss.D + ss.D.transpose();
  const double d_scale = sym_two_norm(Dsym);
  const double eps =
      opts.epsilon < 0.0 ? 1e-12 * std::max(1.0, d_scale) : opts.epsilon;
  if (eps == 0.0 && min_eig(Dsym) < 1e-14 * std::max(1.0, d_scale)) {
    throw Error(ErrorCode::SingularFeedthrough,
                "D + D^T is singular; a positive epsilon is required");
  }
  const Matrix R = Dsym + eps * Matrix::Identity(m, m);
  const auto [smin, smax] = solve_are_extremal(ss.A, ss.B, ss.C, R, opts.are);

  const double order_viol = min_eig(Matrix(smax.X - smin.X));
  if (order_viol < -opts.ordering_tol * std::max(1.0, sym_two_norm(smax.X))) {
    throw Error(ErrorCode::NoConvergence,
                "extremal ordering X_min <= X_max violated by " +
                    std::to_string(-order_viol));
  }

  const Eigen::SelfAdjointEigenSolver<Matrix> res(R);
  const Matrix R_half = res.operatorSqrt();
  const Matrix R_inv_half = res.operatorInverseSqrt();

  auto make_solution = [&](const Matrix& X, KypKind kind) {
    KypSolution sol;
    sol.X = sym(X);
    sol.epsilon = eps;
    sol.kind = kind;
    const Matrix W = kyp_residual(ss, sol.X);
    sol.residual_min_eig = min_eig(W);
    const double tol = 1e-8 * W.norm() + 10.0 * eps;
    LureFactors formula{R_inv_half * (ss.C - ss.B.transpose() * sol.X),
                        R_half};
    const double err_formula = (W - stack_factors(formula).transpose() *
                                        stack_factors(formula))
                                   .norm();
    if (err_formula <= tol) {
      sol.factors = formula;
      return sol;
    }
    // The m-row formula is inconsistent (regularized maximal solutions blow
    // up as epsilon^{-1/2}); factorize W(X) itself instead.  Negative
    // eigenvalues are clipped rather than rejected: residual_min_eig keeps
    // the honest infeasibility and verify_kyp reports it, while the solution
    // pair stays usable for ordering curves, truncation and duals.
    const Eigen::SelfAdjointEigenSolver<Matrix> es(W);
    const Vector& ew = es.eigenvalues();  // ascending
    const double cut = 1e-8 * std::max(ew.cwiseAbs().maxCoeff(), 0.0);
    Index rank = 0;
    for (Index i = 0; i < ew.size(); ++i) {
      if (ew(i) > cut) ++rank;
    }
    Matrix F(rank, n + m);
    for (Index k = 0; k < rank; ++k) {
      const Index i = ew.size() - 1 - k;  // descending
      F.row(k) = std::sqrt(ew(i)) * es.eigenvectors().col(i).transpose();
    }
    LureFactors direct{F.leftCols(n), F.rightCols(m)};
    const double err_direct =
        (W - stack_factors(direct).transpose() * stack_factors(direct))
            .norm();
    sol.factors = err_direct < err_formula ? direct : formula;
    return sol;
  };

  KypExtremalPair pair{make_solution(smin.X, KypKind::Min),
                       make_solution(smax.X, KypKind::Max)};
  return pair;
}

LureFromX lure_factors_from_X(const StateSpaceSystem& sys, const Matrix& X,
                              double rank_tol) {
  const StateSpaceSystem ss = require_square_standard(sys);
  const Matrix W = kyp_residual(ss, X);
  const PsdFactor f = psd_factor(W, rank_tol);
  LureFromX out;
  out.factors.L = f.F.leftCols(ss.n());
  out.factors.M = f.F.rightCols(ss.m());
  out.rank = f.rank;
  return out;
}

KypSolution kyp_solution_from_X(const StateSpaceSystem& sys, const Matrix& X,
                                double rank_tol) {
  KypSolution sol;
  sol.X = sym(X);
  sol.factors = lure_factors_from_X(sys, X, rank_tol).factors;
  sol.epsilon = 0.0;
  sol.kind = KypKind::Provided;
  sol.residual_min_eig = min_eig(kyp_residual(sys, sol.X));
  return sol;
}

KypCertificate verify_kyp(const StateSpaceSystem& sys, const KypSolution& sol,
                          const FrequencyGrid& grid, double popov_tol) {
  KypCertificate cert;
  try {
    const StateSpaceSystem ss = require_square_standard(sys);
    const Index n = ss.n(), m = ss.m();
    const Matrix W = kyp_residual(ss, sol.X);
    const double w_two = sym_two_norm(W);
    cert.min_eig_rel = min_eig(W) / std::max(1.0, w_two);

    const Matrix& L = sol.factors.L;
    const Matrix& M = sol.factors.M;
    const double scale = std::max(1.0, W.norm());
    cert.lyap_residual =
        (-ss.A.transpose() * sol.X - sol.X * ss.A - L.transpose() * L).norm() /
        scale;
    cert.cross_residual =
        (ss.C.transpose() - sol.X * ss.B - L.transpose() * M).norm() / scale;
    cert.feedthrough_residual =
        (ss.D + ss.D.transpose() +
         sol.epsilon * Matrix::Identity(m, m) - M.transpose() * M)
            .norm() /
        scale;
    const Matrix LM = stack_factors(sol.factors);
    cert.factor_error = (W - LM.transpose() * LM).norm();

    // Spectral factorization identity Phi(i w) = H(i w)^H H(i w) on 20
    // points drawn from the grid.
    StateSpaceSystem factor;
    factor.A = ss.A;
    factor.B = ss.B;
    factor.C = L;
    factor.D = M;
    const std::size_t count = grid.points.size();
    const std::size_t samples = std::min<std::size_t>(20, count);
    for (std::size_t i = 0; i < samples; ++i) {
      const double w = grid.points[i * (count - 1) / std::max<std::size_t>(
                                                         1, samples - 1)];
      try {
        const ComplexMatrix phi = popov_eval(ss, w);
        const ComplexMatrix H = transfer_eval(factor, Complex(0.0, w));
        const double rel =
            (phi - H.adjoint() * H).norm() / std::max(1.0, phi.norm());
        cert.popov_error = std::max(cert.popov_error, rel);
      } catch (const Error&) {
        continue;  // pole on the sample: skip
      }
    }
    const double factor_tol = 1e-8 * W.norm() + 10.0 * sol.epsilon;
    cert.ok = cert.min_eig_rel >= -1e-8 &&
              cert.factor_error <= factor_tol &&
              cert.popov_error <= popov_tol + 100.0 * sol.epsilon;
  } catch (const Error&) {
    cert.ok = false;
  }
  return cert;
}

KypSolution dual_solution(const StateSpaceSystem& sys,
                          const KypSolution& sol) {
  const StateSpaceSystem ss = require_square_standard(sys);
  const Index n = ss.n();
  if (sol.X.rows() != n || sol.X.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "X must be n x n");
  }
  const Eigen::LLT<Matrix> llt(sym(sol.X));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::XNotPd, "X must be positive definite");
  }
  const Matrix Xi = sym(llt.solve(Matrix::Identity(n, n)));
  KypSolution dual;
  dual.X = Xi;
  dual.factors.L = sol.factors.L * Xi;
  dual.factors.M = -sol.factors.M;
  dual.epsilon = sol.epsilon;
  dual.kind = KypKind::Provided;

  StateSpaceSystem transposed;
  transposed.A = ss.A.transpose();
  transposed.B = ss.C.transpose();
  transposed.C = ss.B.transpose();
  transposed.D = ss.D.transpose();
  dual.residual_min_eig = min_eig(kyp_residual(transposed, dual.X));
  return dual;
}

}  // namespace pamor
