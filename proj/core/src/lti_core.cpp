// SPDX-License-Identifier: MIT

#include "pamor/lti_core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

namespace pamor {

namespace {

// Gramian factors carry eigenvalue tails down to roundoff; clipping below
// this keeps representable Hankel ratios down to ~1e-14 without tripping the
// indefiniteness guard on roundoff-negative eigenvalues.
constexpr double kGramianFactorTol = 1e-14;

StateSpaceSystem standardize(const StateSpaceSystem& sys) {
  if (!sys.E) return sys;
  return generalized_to_standard(sys).sys;
}

SchurForm require_stable_schur(const Matrix& A, double tol = 1e-10) {
  SchurForm S = schur_real(A);
  const Index n = S.T.rows();
  for (Index i = 0; i < n;) {
    double re;
    if (i + 1 < n && S.T(i + 1, i) != 0.0) {
      re = 0.5 * (S.T(i, i) + S.T(i + 1, i + 1));
      i += 2;
    } else {
      re = S.T(i, i);
      i += 1;
    }
    if (re >= -tol) {
      throw Error(ErrorCode::NotStable,
                  "system matrix has an eigenvalue with real part " +
                      std::to_string(re));
    }
  }
  return S;
}

// Schur form of A^T derived from a Schur form of A by the antidiagonal flip:
// A = Q T Q^T implies A^T = (Q J)(J T^T J)(Q J)^T with J the reversal.
SchurForm transpose_schur(const SchurForm& S) {
  return {S.Q.rowwise().reverse(), S.T.transpose().reverse()};
}

double sigma_max(const ComplexMatrix& M) {
  if (M.size() == 0) return 0.0;
  return M.jacobiSvd().singularValues()(0);
}

// Clipping factorization for matrices that are PSD by construction (Gramians):
// negative roundoff eigenvalues are dropped rather than rejected.  Returns
// L (n x k) with X ~= L L^T.
Matrix gramian_factor(const Matrix& X, double rel_tol = kGramianFactorTol) {
  const Index n = X.rows();
  if (n == 0) return Matrix(0, 0);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(sym(X));
  const double cut = rel_tol * std::max(0.0, es.eigenvalues().maxCoeff());
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    if (es.eigenvalues()(i) > cut) ++k;
  }
  Matrix L(n, k);
  for (Index j = 0; j < k; ++j) {
    const Index i = n - 1 - j;  // descending eigenvalue order
    L.col(j) = std::sqrt(es.eigenvalues()(i)) * es.eigenvectors().col(i);
  }
  return L;
}

Index rank_above(const Matrix& X, double rel_tol) {
  if (X.rows() == 0) return 0;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(sym(X));
  const double cut = rel_tol * es.eigenvalues().cwiseAbs().maxCoeff();
  Index k = 0;
  for (Index i = 0; i < X.rows(); ++i) {
    if (es.eigenvalues()(i) > cut) ++k;
  }
  return k;
}

}  // namespace

// ---------------------------------------------------------------------------
// Shared type implementations
// ---------------------------------------------------------------------------

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotStable: return "NotStable";
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::SpectraOverlap: return "SpectraOverlap";
    case ErrorCode::NoHamiltonianSplit: return "NoHamiltonianSplit";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::Indefinite: return "Indefinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularShift: return "SingularShift";
    case ErrorCode::Infinite: return "Infinite";
    case ErrorCode::ESingular: return "ESingular";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularFeedthrough: return "SingularFeedthrough";
    case ErrorCode::UncertifiedSolution: return "UncertifiedSolution";
    case ErrorCode::NotBiorthogonal: return "NotBiorthogonal";
    case ErrorCode::RankDeficientBasis: return "RankDeficientBasis";
    case ErrorCode::NoStableRom: return "NoStableRom";
    case ErrorCode::DefectiveSpectrum: return "DefectiveSpectrum";
    case ErrorCode::InnerRomUnstable: return "InnerRomUnstable";
    case ErrorCode::FeedthroughMismatch: return "FeedthroughMismatch";
    case ErrorCode::NoProjectionData: return "NoProjectionData";
    case ErrorCode::XNotPd: return "XNotPd";
    case ErrorCode::DualNotPassive: return "DualNotPassive";
    case ErrorCode::FeedthroughSingular: return "FeedthroughSingular";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "UnknownError";
}

void StateSpaceSystem::validate() const {
  if (A.rows() != A.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "A must be square");
  }
  if (B.rows() != A.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "B must have n rows");
  }
  if (C.cols() != A.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "C must have n columns");
  }
  if (D.rows() != C.rows() || D.cols() != B.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "D must be p x m");
  }
  if (E) {
    if (E->rows() != A.rows() || E->cols() != A.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "E must be n x n");
    }
    if ((*E - E->transpose()).norm() > 1e-10 * std::max(1.0, E->norm())) {
      throw Error(ErrorCode::NotPositiveDefinite, "E is not symmetric");
    }
    if (Eigen::LLT<Matrix>(sym(*E)).info() != Eigen::Success) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "E is not positive definite");
    }
  }
}

StateSpaceSystem scalar_system(double a, double b, double c, double d) {
  StateSpaceSystem sys;
  sys.A = Matrix::Constant(1, 1, a);
  sys.B = Matrix::Constant(1, 1, b);
  sys.C = Matrix::Constant(1, 1, c);
  sys.D = Matrix::Constant(1, 1, d);
  return sys;
}

StateSpaceSystem PhRepresentation::to_system() const {
  StateSpaceSystem sys;
  sys.A = (J - R) * Q;
  sys.B = G - P;
  sys.C = (G + P).transpose() * Q;
  sys.D = S + N;
  return sys;
}

double PhRepresentation::structure_violation() const {
  const Index nn = J.rows(), mm = G.cols();
  if (J.cols() != nn || R.rows() != nn || R.cols() != nn || Q.rows() != nn ||
      Q.cols() != nn || G.rows() != nn || P.rows() != nn || P.cols() != mm ||
      S.rows() != mm || S.cols() != mm || N.rows() != mm || N.cols() != mm) {
    throw Error(ErrorCode::DimensionMismatch,
                "inconsistent port-Hamiltonian block dimensions");
  }
  double worst = 0.0;
  worst = std::max(worst, (J + J.transpose()).norm() / std::max(1.0, J.norm()));
  worst = std::max(worst, (N + N.transpose()).norm() / std::max(1.0, N.norm()));
  worst = std::max(worst, (Q - Q.transpose()).norm() / std::max(1.0, Q.norm()));
  {
    const Eigen::SelfAdjointEigenSolver<Matrix> es(sym(Q));
    const double scale =
        std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    worst = std::max(worst, std::max(0.0, -es.eigenvalues()(0) / scale));
  }
  Matrix W(nn + mm, nn + mm);
  W << R, P, P.transpose(), S;
  worst = std::max(worst, (W - W.transpose()).norm() / std::max(1.0, W.norm()));
  {
    const Eigen::SelfAdjointEigenSolver<Matrix> es(sym(W));
    const double scale =
        std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    worst = std::max(worst, std::max(0.0, -es.eigenvalues()(0) / scale));
  }
  return worst;
}

bool PhRepresentation::is_valid(double tol) const {
  return structure_violation() <= tol;
}

void PhRepresentation::validate(double tol) const {
  const double v = structure_violation();
  if (v > tol) {
    throw Error(ErrorCode::NotPsd,
                "port-Hamiltonian structure violated (worst deviation " +
                    std::to_string(v) + ")");
  }
}

FrequencyGrid FrequencyGrid::logarithmic(double w_min, double w_max,
                                         int count) {
  if (!(w_min > 0.0) || !(w_max > w_min) || count < 2) {
    throw Error(ErrorCode::InvalidConfig,
                "logarithmic grid needs 0 < w_min < w_max and count >= 2");
  }
  FrequencyGrid g;
  g.spacing = Spacing::Logarithmic;
  g.points.resize(count);
  const double step = std::log(w_max / w_min) / (count - 1);
  for (int i = 0; i < count; ++i) {
    g.points[i] = w_min * std::exp(step * i);
  }
  g.points.back() = w_max;
  return g;
}

FrequencyGrid FrequencyGrid::linear(double w_min, double w_max, int count) {
  if (!(w_max > w_min) || count < 2) {
    throw Error(ErrorCode::InvalidConfig,
                "linear grid needs w_min < w_max and count >= 2");
  }
  FrequencyGrid g;
  g.spacing = Spacing::Linear;
  g.points.resize(count);
  const double step = (w_max - w_min) / (count - 1);
  for (int i = 0; i < count; ++i) g.points[i] = w_min + step * i;
  g.points.back() = w_max;
  return g;
}

FrequencyGrid FrequencyGrid::standard() {
  return logarithmic(1e-4, 1e4, 400);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

ComplexMatrix transfer_eval(const StateSpaceSystem& sys, Complex s) {
  sys.validate();
  const Index n = sys.n();
  if (n == 0) return sys.D.cast<Complex>();
  ComplexMatrix M(n, n);
  if (sys.E) {
    M = s * sys.E->cast<Complex>() - sys.A.cast<Complex>();
  } else {
    M = -sys.A.cast<Complex>();
    M.diagonal().array() += s;
  }
  const ComplexMatrix Bc = sys.B.cast<Complex>();
  const Eigen::PartialPivLU<ComplexMatrix> lu(M);
  const ComplexMatrix X = lu.solve(Bc);
  const double rel =
      (M * X - Bc).norm() / (M.norm() * X.norm() + Bc.norm() + 1e-300);
  if (!X.allFinite() || rel > 1e-8) {
    throw Error(ErrorCode::SingularShift,
                "shifted system matrix is numerically singular");
  }
  return sys.C.cast<Complex>() * X + sys.D.cast<Complex>();
}

ComplexMatrix popov_eval(const StateSpaceSystem& sys, double omega) {
  if (sys.p() != sys.m()) {
    throw Error(ErrorCode::DimensionMismatch,
                "Popov function requires a square system");
  }
  const Complex s(0.0, omega);
  const ComplexMatrix G_pos = transfer_eval(sys, s);
  const ComplexMatrix G_neg = transfer_eval(sys, -s);
  return G_pos + G_neg.transpose();
}

// ---------------------------------------------------------------------------
// Gramians and norms
// ---------------------------------------------------------------------------

GramianPair gramians(const StateSpaceSystem& sys) {
  const StateSpaceSystem ss = standardize(sys);
  ss.validate();
  GramianPair g;
  if (ss.n() == 0) {
    g.P = {Matrix(0, 0), 0.0};
    g.Q = {Matrix(0, 0), 0.0};
    return g;
  }
  const SchurForm S = require_stable_schur(ss.A);
  const SchurForm St = transpose_schur(S);
  // A P + P A^T + B B^T = 0 is the Lyapunov equation of A^T.
  g.P = solve_lyapunov(St, Matrix(ss.B * ss.B.transpose()));
  g.Q = solve_lyapunov(S, Matrix(ss.C.transpose() * ss.C));
  return g;
}

double h2_norm(const StateSpaceSystem& sys) {
  const StateSpaceSystem ss = standardize(sys);
  ss.validate();
  const double scale = std::max(1.0, ss.B.norm() * ss.C.norm());
  if (ss.D.norm() > 1e-14 * scale) {
    throw Error(ErrorCode::Infinite,
                "nonzero feedthrough: the H2 norm is unbounded");
  }
  if (ss.n() == 0) return 0.0;
  const SchurForm St = transpose_schur(require_stable_schur(ss.A));
  const Matrix P = solve_lyapunov(St, Matrix(ss.B * ss.B.transpose())).X;
  return std::sqrt(std::max(0.0, (ss.C * P * ss.C.transpose()).trace()));
}

double h2_error(const StateSpaceSystem& sys, const StateSpaceSystem& rom,
                double feedthrough_tol) {
  const StateSpaceSystem a = standardize(sys);
  const StateSpaceSystem b = standardize(rom);
  a.validate();
  b.validate();
  if (a.m() != b.m() || a.p() != b.p()) {
    throw Error(ErrorCode::DimensionMismatch,
                "systems must share input/output dimensions");
  }
  if ((a.D - b.D).norm() > feedthrough_tol * std::max(1.0, a.D.norm())) {
    throw Error(ErrorCode::Infinite,
                "feedthrough mismatch: the H2 error is unbounded");
  }
  double value = 0.0;
  if (a.n() > 0) {
    const SchurForm St = transpose_schur(require_stable_schur(a.A));
    const Matrix Pa = solve_lyapunov(St, Matrix(a.B * a.B.transpose())).X;
    value += (a.C * Pa * a.C.transpose()).trace();
  }
  if (b.n() > 0) {
    const SchurForm St = transpose_schur(require_stable_schur(b.A));
    const Matrix Pb = solve_lyapunov(St, Matrix(b.B * b.B.transpose())).X;
    value += (b.C * Pb * b.C.transpose()).trace();
  }
  if (a.n() > 0 && b.n() > 0) {
    const Matrix Z = solve_sylvester(a.A, Matrix(b.A.transpose()),
                                     Matrix(a.B * b.B.transpose()));
    value -= 2.0 * (a.C * Z * b.C.transpose()).trace();
  }
  return std::sqrt(std::max(0.0, value));
}

double hinf_norm(const StateSpaceSystem& sys, double rel_tol) {
  const StateSpaceSystem ss = standardize(sys);
  ss.validate();
  if (!(rel_tol > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "rel_tol must be positive");
  }
  const Index n = ss.n(), m = ss.m(), p = ss.p();
  const double sig_d = ss.D.size() > 0 ? svd(ss.D).S(0) : 0.0;
  if (n == 0 || m == 0 || p == 0) return sig_d;
  require_stable_schur(ss.A);

  // Seed the lower bound from a frequency sweep: standard decades plus the
  // pole frequencies, where resonance peaks live.
  std::vector<double> omegas;
  for (int k = -4; k <= 4; ++k) {
    omegas.push_back(std::pow(10.0, k));
    omegas.push_back(3.0 * std::pow(10.0, k));
  }
  omegas.push_back(0.0);
  {
    const Eigen::EigenSolver<Matrix> es(ss.A, false);
    for (Index i = 0; i < n; ++i) {
      const Complex lam = es.eigenvalues()(i);
      if (std::abs(lam.imag()) > 0) omegas.push_back(std::abs(lam.imag()));
      omegas.push_back(std::abs(lam));
    }
  }
  auto gain_at = [&](double w) {
    try {
      return sigma_max(transfer_eval(ss, Complex(0.0, w)));
    } catch (const Error&) {
      return 0.0;  // pole on the axis would have failed the stability check
    }
  };
  double lb = sig_d;
  for (double w : omegas) lb = std::max(lb, gain_at(w));
  if (lb == 0.0) return 0.0;  // transfer function vanishes on the sampled axis

  const Matrix& A = ss.A;
  const Matrix& B = ss.B;
  const Matrix& C = ss.C;
  const Matrix& D = ss.D;
  for (int it = 0; it < 60; ++it) {
    const double gamma = lb * (1.0 + 2.0 * rel_tol);
    // gamma is a singular value of G(i w) iff the Hamiltonian below has the
    // eigenvalue i w; no imaginary eigenvalues certifies ||G||_Hinf < gamma.
    const Matrix Rg =
        gamma * gamma * Matrix::Identity(m, m) - D.transpose() * D;
    const Eigen::LLT<Matrix> Rllt(Rg);
    if (Rllt.info() != Eigen::Success) {
      throw Error(ErrorCode::NoConvergence,
                  "gamma iteration produced an invalid test point");
    }
    const Matrix RinvBt = Rllt.solve(B.transpose());
    const Matrix A1 = A + B * Rllt.solve(D.transpose() * C);
    Matrix H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = A1;
    H.topRightCorner(n, n) = B * RinvBt;
    H.bottomLeftCorner(n, n) =
        -C.transpose() *
        (Matrix::Identity(p, p) + D * Rllt.solve(D.transpose())) * C;
    H.bottomRightCorner(n, n) = -A1.transpose();

    const Eigen::EigenSolver<Matrix> es(H, false);
    std::set<double> crossings;
    for (Index i = 0; i < 2 * n; ++i) {
      const Complex lam = es.eigenvalues()(i);
      if (std::abs(lam.real()) <= 1e-8 * (1.0 + std::abs(lam)) &&
          lam.imag() >= 0.0) {
        crossings.insert(lam.imag());
      }
    }
    if (crossings.empty()) return gamma;

    double new_lb = lb;
    std::vector<double> ws(crossings.begin(), crossings.end());
    for (std::size_t i = 0; i < ws.size(); ++i) {
      new_lb = std::max(new_lb, gain_at(ws[i]));
      if (i + 1 < ws.size()) {
        new_lb = std::max(new_lb, gain_at(0.5 * (ws[i] + ws[i + 1])));
      }
    }
    if (new_lb <= lb * (1.0 + 0.05 * rel_tol)) {
      return gamma;  // detections no longer raise the bound: peak reached
    }
    lb = new_lb;
  }
  return lb * (1.0 + 2.0 * rel_tol);
}

Vector hankel_singular_values(const StateSpaceSystem& sys) {
  const StateSpaceSystem ss = standardize(sys);
  ss.validate();
  const Index n = ss.n();
  Vector sigma = Vector::Zero(n);
  if (n == 0) return sigma;
  const GramianPair g = gramians(ss);
  const Matrix Lp = gramian_factor(g.P.X);
  const Index k = Lp.cols();
  if (k == 0) return sigma;
  // lambda(P Q) = lambda(Lp^T Q Lp) up to zero padding.
  const Eigen::SelfAdjointEigenSolver<Matrix> es(
      Matrix(Lp.transpose() * g.Q.X * Lp));
  for (Index i = 0; i < k; ++i) {
    sigma(i) = std::sqrt(std::max(0.0, es.eigenvalues()(k - 1 - i)));
  }
  return sigma;
}

// ---------------------------------------------------------------------------
// Passivity sampling, duals, realization changes
// ---------------------------------------------------------------------------

PassivityReport is_passive_sampled(const StateSpaceSystem& sys,
                                   const FrequencyGrid& grid) {
  if (grid.points.empty()) {
    throw Error(ErrorCode::InvalidConfig, "frequency grid is empty");
  }
  PassivityReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  double max_mag = 0.0;
  for (double w : grid.points) {
    ComplexMatrix phi;
    try {
      phi = popov_eval(sys, w);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SingularShift) {
        ++rep.skipped;
        continue;
      }
      throw;
    }
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(
        ComplexMatrix(0.5 * (phi + phi.adjoint())));
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
    max_mag = std::max(max_mag, hi);
    if (lo < rep.worst_margin) {
      rep.worst_margin = lo;
      rep.worst_frequency = w;
    }
  }
  if (!std::isfinite(rep.worst_margin)) {
    throw Error(ErrorCode::SingularShift,
                "every grid point hit a pole of the Popov function");
  }
  rep.scale = std::max(1.0, max_mag);
  rep.passive = rep.worst_margin >= -1e-8 * rep.scale;
  return rep;
}

StateSpaceSystem dual_system(const StateSpaceSystem& sys) {
  const StateSpaceSystem ss = standardize(sys);
  StateSpaceSystem dual;
  dual.A = -ss.A.transpose();
  dual.B = -ss.C.transpose();
  dual.C = ss.B.transpose();
  dual.D = ss.D.transpose();
  return dual;
}

StandardFormResult generalized_to_standard(const StateSpaceSystem& sys) {
  if (!sys.E) {
    StandardFormResult r{sys, Matrix::Identity(sys.n(), sys.n())};
    return r;
  }
  StateSpaceSystem copy = sys;
  const Matrix E = sym(*copy.E);
  copy.E.reset();
  copy.validate();
  const Eigen::LLT<Matrix> llt(E);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::ESingular, "E is not positive definite");
  }
  const Index n = E.rows();
  StandardFormResult out;
  // z = E x turns E x' = A x + B u into z' = (A E^{-1}) z + B u.
  out.sys.A = llt.solve(copy.A.transpose()).transpose();
  out.sys.B = copy.B;
  out.sys.C = llt.solve(copy.C.transpose()).transpose();
  out.sys.D = copy.D;
  out.q_hamiltonian = sym(llt.solve(Matrix::Identity(n, n)));
  return out;
}

PhRepresentation ph_from_solution(const StateSpaceSystem& sys,
                                  const Matrix& X) {
  const StateSpaceSystem ss = standardize(sys);
  ss.validate();
  const Index n = ss.n(), m = ss.m();
  if (ss.p() != m) {
    throw Error(ErrorCode::DimensionMismatch,
                "port-Hamiltonian form requires a square system");
  }
  if (X.rows() != n || X.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "X must be n x n");
  }
  const Eigen::LLT<Matrix> llt(sym(X));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::XNotPd, "X is not positive definite");
  }
  // LMI residual W(X) must be PSD for the dissipation block to be PSD.
  Matrix W(n + m, n + m);
  W.topLeftCorner(n, n) = -ss.A.transpose() * X - X * ss.A;
  W.topRightCorner(n, m) = ss.C.transpose() - X * ss.B;
  W.bottomLeftCorner(m, n) = W.topRightCorner(n, m).transpose();
  W.bottomRightCorner(m, m) = ss.D + ss.D.transpose();
  const Eigen::SelfAdjointEigenSolver<Matrix> es(sym(W));
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues()(0) < -1e-8 * scale) {
    throw Error(ErrorCode::NotPsd,
                "W(X) has eigenvalue " + std::to_string(es.eigenvalues()(0)) +
                    "; X does not solve the passivity LMI");
  }
  const Matrix Xi = sym(llt.solve(Matrix::Identity(n, n)));
  PhRepresentation ph;
  ph.Q = sym(X);
  ph.J = skew(ss.A * Xi);
  ph.R = -sym(ss.A * Xi);
  ph.G = 0.5 * (Xi * ss.C.transpose() + ss.B);
  ph.P = 0.5 * (Xi * ss.C.transpose() - ss.B);
  ph.S = sym(ss.D);
  ph.N = skew(ss.D);
  return ph;
}

// ---------------------------------------------------------------------------
// Minimal realizations
// ---------------------------------------------------------------------------

MinimalRealization minimal_realization(const StateSpaceSystem& sys,
                                       double trunc_tol) {
  const StateSpaceSystem ss = standardize(sys);
  ss.validate();
  const Index n = ss.n();
  MinimalRealization out;
  out.hsv = Vector::Zero(n);
  if (n == 0) {
    out.sys = ss;
    out.V = Matrix(0, 0);
    out.W = Matrix(0, 0);
    out.kept = 0;
    return out;
  }
  const GramianPair g = gramians(ss);
  const Matrix Lp = gramian_factor(g.P.X);  // P = Lp Lp^T
  const Matrix Lq = gramian_factor(g.Q.X);  // Q = Lq Lq^T
  const SvdResult dec = svd(Matrix(Lq.transpose() * Lp));
  const Index kmax = dec.S.size();
  for (Index i = 0; i < kmax; ++i) out.hsv(i) = dec.S(i);
  const double s1 = kmax > 0 ? dec.S(0) : 0.0;
  Index r = 0;
  while (r < kmax && dec.S(r) > trunc_tol * s1 && dec.S(r) > 0.0) ++r;
  const Vector scale = dec.S.head(r).cwiseSqrt().cwiseInverse();
  out.W = Lq * dec.U.leftCols(r) * scale.asDiagonal();
  out.V = Lp * dec.V.leftCols(r) * scale.asDiagonal();
  out.kept = r;
  out.sys.A = out.W.transpose() * ss.A * out.V;
  out.sys.B = out.W.transpose() * ss.B;
  out.sys.C = ss.C * out.V;
  out.sys.D = ss.D;
  return out;
}

PhTruncation ph_minimal_realization(const PhRepresentation& ph,
                                    double trunc_tol) {
  ph.validate(1e-8);
  const StateSpaceSystem sys = ph.to_system();
  const SchurForm St = transpose_schur(require_stable_schur(sys.A));
  const Matrix P = solve_lyapunov(St, Matrix(sys.B * sys.B.transpose())).X;
  const Matrix Lp = gramian_factor(P);
  const Eigen::LLT<Matrix> qllt(sym(ph.Q));
  if (qllt.info() != Eigen::Success) {
    throw Error(ErrorCode::XNotPd, "energy matrix Q is not positive definite");
  }
  const Matrix Lq = qllt.matrixL();
  const SvdResult dec = svd(Matrix(Lq.transpose() * Lp));
  const double s1 = dec.S.size() > 0 ? dec.S(0) : 0.0;
  Index r = 0;
  while (r < dec.S.size() && dec.S(r) > trunc_tol * s1 && dec.S(r) > 0.0) ++r;
  const Vector scale = dec.S.head(r).cwiseSqrt().cwiseInverse();
  PhTruncation out;
  out.sigma = dec.S;
  out.kept = r;
  out.V = Lp * dec.V.leftCols(r) * scale.asDiagonal();
  out.W = Lq * dec.U.leftCols(r) * scale.asDiagonal();
  out.ph.J = skew(Matrix(out.W.transpose() * ph.J * out.W));
  out.ph.R = sym(Matrix(out.W.transpose() * ph.R * out.W));
  out.ph.Q = Matrix(dec.S.head(r).asDiagonal());
  out.ph.G = out.W.transpose() * ph.G;
  out.ph.P = out.W.transpose() * ph.P;
  out.ph.S = ph.S;
  out.ph.N = ph.N;
  return out;
}

MinimalityRank minimality_rank(const StateSpaceSystem& sys, double tol) {
  const GramianPair g = gramians(sys);
  MinimalityRank r;
  r.controllable = rank_above(g.P.X, tol);
  r.observable = rank_above(g.Q.X, tol);
  return r;
}

}  // namespace pamor
