// SPDX-License-Identifier: MIT

#include "pamor/reducers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace pamor {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Deterministic standard-normal generator: explicit Box-Muller on top of
// std::mt19937_64 so random bases are bit-identical across platforms
// (std::normal_distribution is implementation-defined).
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_unit();
    const double u2 = uniform_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  Matrix matrix(Index rows, Index cols) {
    Matrix out(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) {
        out(i, j) = (*this)();
      }
    }
    return out;
  }

 private:
  // Uniform in (0, 1]; the +1 keeps log() finite.
  double uniform_unit() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

bool is_real_point(Complex s) {
  return std::abs(s.imag()) <= 1e-13 * std::max(1.0, std::abs(s.real()));
}

void require_standard(const StateSpaceSystem& sys, const char* who) {
  if (sys.E.has_value()) {
    throw Error(ErrorCode::InvalidConfig,
                std::string(who) +
                    " requires a standard-form system; apply "
                    "generalized_to_standard first");
  }
}

Matrix thin_q(const Matrix& M) {
  Eigen::HouseholderQR<Matrix> qr(M);
  return qr.householderQ() * Matrix::Identity(M.rows(), M.cols());
}

// In-place W <- W (V^T W)^{-1}; throws RankDeficientBasis when V^T W is
// numerically singular.
void right_normalize(const Matrix& V, Matrix& W) {
  Eigen::FullPivLU<Matrix> lu(V.transpose() * W);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::RankDeficientBasis,
                "V^T W is singular; the bases cannot be biorthogonalized");
  }
  W = W * lu.inverse();
}

// Solves (s I - A) v = rhs for a real shift with a singularity guard.
Vector solve_shifted_real(const Matrix& A, double sigma, const Vector& rhs) {
  const Index n = A.rows();
  Matrix K = -A;
  K.diagonal().array() += sigma;
  Eigen::PartialPivLU<Matrix> lu(K);
  Vector v = lu.solve(rhs);
  const double resid = (K * v - rhs).norm();
  if (!v.allFinite() || resid > 1e-8 * std::max(1.0, rhs.norm())) {
    throw Error(ErrorCode::SingularShift,
                "interpolation point " + std::to_string(sigma) +
                    " is numerically an eigenvalue (n = " + std::to_string(n) +
                    ")");
  }
  return v;
}

ComplexVector solve_shifted_complex(const Matrix& A, Complex s,
                                    const ComplexVector& rhs) {
  ComplexMatrix K = (-A).cast<Complex>();
  K.diagonal().array() += s;
  Eigen::PartialPivLU<ComplexMatrix> lu(K);
  ComplexVector v = lu.solve(rhs);
  const double resid = (K * v - rhs).norm();
  if (!v.allFinite() || resid > 1e-8 * std::max(1.0, rhs.norm())) {
    throw Error(ErrorCode::SingularShift,
                "complex interpolation point is numerically an eigenvalue");
  }
  return v;
}

// Raw realified Krylov columns spanning { (s_i I - A)^{-1} Bmat d_i }:
// one column per real point, a (real, imaginary) column pair per conjugate
// pair.  Conjugate partners are located by value so the caller may pass the
// points in any order; each pair is consumed once.
Matrix realified_krylov(const Matrix& A, const Matrix& Bmat,
                        const std::vector<Complex>& points,
                        const ComplexMatrix& dirs) {
  const Index n = A.rows();
  const Index q = static_cast<Index>(points.size());
  Matrix cols(n, q);
  std::vector<bool> used(points.size(), false);
  Index filled = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    const Complex s = points[i];
    if (is_real_point(s)) {
      const Vector rhs = Bmat * dirs.col(static_cast<Index>(i)).real();
      cols.col(filled++) = solve_shifted_real(A, s.real(), rhs);
      continue;
    }
    // Locate the unconsumed conjugate partner.
    const double match_tol = 1e-10 * (1.0 + std::abs(s));
    std::size_t partner = points.size();
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (!used[j] && std::abs(points[j] - std::conj(s)) <= match_tol) {
        const double dir_gap =
            (dirs.col(static_cast<Index>(j)) -
             dirs.col(static_cast<Index>(i)).conjugate())
                .norm();
        if (dir_gap <= 1e-8 * std::max(1.0, dirs.col(static_cast<Index>(i))
                                                .norm())) {
          partner = j;
          break;
        }
      }
    }
    if (partner == points.size()) {
      throw Error(ErrorCode::InvalidConfig,
                  "interpolation data is not closed under conjugation");
    }
    used[partner] = true;
    const ComplexVector rhs = Bmat * dirs.col(static_cast<Index>(i));
    const ComplexVector v = solve_shifted_complex(A, s, rhs);
    cols.col(filled++) = v.real();
    cols.col(filled++) = v.imag();
  }
  return cols;
}

void check_interp_dims(const InterpolationData& interp, Index m, Index p) {
  const Index q = static_cast<Index>(interp.points.size());
  if (q < 1 || interp.right_dirs.cols() != q || interp.left_dirs.cols() != q ||
      interp.right_dirs.rows() != m || interp.left_dirs.rows() != p) {
    throw Error(ErrorCode::DimensionMismatch,
                "interpolation data needs m x q right and p x q left "
                "directions matching the point count");
  }
}

// Projection without the public biorthogonality re-check; used internally
// where W^T V = I holds by construction.
StateSpaceSystem project_unchecked(const StateSpaceSystem& sys,
                                   const Matrix& V, const Matrix& W) {
  StateSpaceSystem rom;
  rom.A = W.transpose() * (sys.A * V);
  rom.B = W.transpose() * sys.B;
  rom.C = sys.C * V;
  rom.D = sys.D;
  return rom;
}

// Interpolation data from the poles of a ROM: mirrored poles as points,
// residue directions as tangents, points reflected into the open right
// half-plane.  Sorted by (Re, -Im) so conjugate pairs sit adjacent.
InterpolationData mirrored_pole_data(const ComplexVector& lam,
                                     const ComplexMatrix& bt,
                                     const ComplexMatrix& ct) {
  const Index r = lam.size();
  std::vector<Index> order(static_cast<std::size_t>(r));
  for (Index i = 0; i < r; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (lam(a).real() != lam(b).real()) return lam(a).real() < lam(b).real();
    return lam(a).imag() > lam(b).imag();
  });
  InterpolationData data;
  data.points.resize(static_cast<std::size_t>(r));
  data.right_dirs.resize(bt.cols(), r);
  data.left_dirs.resize(ct.rows(), r);
  for (Index k = 0; k < r; ++k) {
    const Index i = order[static_cast<std::size_t>(k)];
    Complex s = -lam(i);
    if (s.real() <= 0.0) {
      s = Complex(1e-8 + std::abs(s.real()), s.imag());
    }
    data.points[static_cast<std::size_t>(k)] = s;
    data.right_dirs.col(k) = bt.row(i).transpose();
    data.left_dirs.col(k) = ct.col(i);
  }
  return data;
}

// Eigendecomposition pieces for the pole-interpolation map.  Throws
// NoConvergence / DefectiveSpectrum on pathological iterates; irka treats
// that as a failed attempt and redraws.
struct RomSpectrum {
  ComplexVector lam;
  ComplexMatrix vectors;    // right eigenvectors (columns)
  ComplexMatrix inv_vectors;
};

RomSpectrum rom_spectrum(const Matrix& Ar) {
  Eigen::EigenSolver<Matrix> es(Ar);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "eigenvalue iteration failed");
  }
  RomSpectrum spec;
  spec.lam = es.eigenvalues();
  spec.vectors = es.eigenvectors();
  Eigen::FullPivLU<ComplexMatrix> lu(spec.vectors);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::DefectiveSpectrum,
                "eigenvector matrix is numerically singular");
  }
  spec.inv_vectors = lu.inverse();
  return spec;
}

InterpolationData data_from_rom(const StateSpaceSystem& rom) {
  const RomSpectrum spec = rom_spectrum(rom.A);
  const ComplexMatrix bt = spec.inv_vectors * rom.B.cast<Complex>();
  const ComplexMatrix ct = rom.C.cast<Complex>() * spec.vectors;
  return mirrored_pole_data(spec.lam, bt, ct);
}

// Relative l2 change between two point sets under a greedy nearest-distance
// matching.  A sort-based alignment is unstable when points share their real
// part to within eigensolver noise (uniformly damped chains do), which makes
// identical sets look far apart; matching by distance is permutation-safe.
double point_change(const std::vector<Complex>& next,
                    const std::vector<Complex>& prev) {
  const std::size_t r = next.size();
  struct Candidate {
    double d2;
    std::size_t i, j;
  };
  std::vector<Candidate> cands;
  cands.reserve(r * r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      cands.push_back({std::norm(next[i] - prev[j]), i, j});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a,
                                           const Candidate& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<bool> used_i(r, false), used_j(r, false);
  double diff2 = 0.0;
  std::size_t matched = 0;
  for (const Candidate& c : cands) {
    if (used_i[c.i] || used_j[c.j]) continue;
    used_i[c.i] = true;
    used_j[c.j] = true;
    diff2 += c.d2;
    if (++matched == r) break;
  }
  double base2 = 0.0;
  for (const Complex& p : prev) base2 += std::norm(p);
  return std::sqrt(diff2) / std::max(std::sqrt(base2), 1e-300);
}

// One IRKA run from a random initial basis; throws on numerical breakdown
// (caught by the attempt loop).
RomResult irka_single(const StateSpaceSystem& sys, Index r,
                      const ReducerConfig& config, GaussianRng& rng) {
  RomResult out;
  Matrix V = thin_q(rng.matrix(sys.n(), r));
  Matrix W = thin_q(rng.matrix(sys.n(), r));
  right_normalize(V, W);
  InterpolationData data = data_from_rom(project_unchecked(sys, V, W));

  // A non-convergent run can oscillate between stable and unstable iterates;
  // remember the stable iterate closest to the fixed point so the run still
  // returns a usable interpolatory model instead of the arbitrary final phase.
  bool have_stable = false;
  double stable_ds = kInf;
  RomResult stable;

  for (int it = 1; it <= config.max_iters; ++it) {
    out.iterations = it;
    std::tie(V, W) = tangential_basis(sys, data);
    const StateSpaceSystem rom = project_unchecked(sys, V, W);
    InterpolationData next = data_from_rom(rom);
    const double ds = point_change(next.points, data.points);
    out.history.push_back(ds);
    if (spectral_abscissa(rom.A) < 0.0 && ds <= stable_ds) {
      have_stable = true;
      stable_ds = ds;
      stable.rom = rom;
      stable.V = V;
      stable.W = W;
      stable.interp = data;  // the data these bases interpolate at
    }
    if (ds < config.conv_tol) {
      out.converged = true;
      out.rom = rom;
      break;
    }
    if (it == config.max_iters) {
      out.rom = rom;
      break;
    }
    data = std::move(next);
  }
  if (spectral_abscissa(out.rom.A) >= 0.0 && have_stable) {
    out.rom = std::move(stable.rom);
    out.V = std::move(stable.V);
    out.W = std::move(stable.W);
    out.interp = std::move(stable.interp);
    return out;
  }
  out.V = std::move(V);
  out.W = std::move(W);
  out.interp = std::move(data);  // the data the final bases interpolate at
  return out;
}

// One pH-IRKA run: V-only iteration with W = Q V (V^T Q V)^{-1}.
PhRomResult ph_irka_single(const PhRepresentation& ph, Index r,
                           const ReducerConfig& config, GaussianRng& rng) {
  const Matrix A = (ph.J - ph.R) * ph.Q;
  const Matrix B_in = ph.G - ph.P;
  const Index n = ph.Q.rows();

  PhRomResult out;
  Matrix V = thin_q(rng.matrix(n, r));
  Matrix W;
  std::vector<Complex> prev_points;
  InterpolationData used;  // data behind the current V (empty on iteration 1)

  for (int it = 1; it <= config.max_iters; ++it) {
    out.iterations = it;
    Eigen::FullPivLU<Matrix> lu(V.transpose() * (ph.Q * V));
    if (!lu.isInvertible()) {
      throw Error(ErrorCode::RankDeficientBasis,
                  "V^T Q V is singular in the energy inner product");
    }
    W = (ph.Q * V) * lu.inverse();
    out.rom.J = skew(W.transpose() * (ph.J * W));
    out.rom.R = sym(W.transpose() * (ph.R * W));
    out.rom.Q = sym(V.transpose() * (ph.Q * V));
    out.rom.G = W.transpose() * ph.G;
    out.rom.P = W.transpose() * ph.P;
    out.rom.S = ph.S;
    out.rom.N = ph.N;

    // Interpolation data from the reduced poles and left eigenvectors.
    const Matrix Ar = (out.rom.J - out.rom.R) * out.rom.Q;
    const RomSpectrum spec = rom_spectrum(Ar);
    ComplexMatrix Y = spec.inv_vectors;  // rows are left eigenvectors
    for (Index i = 0; i < Y.rows(); ++i) {
      const double len = Y.row(i).norm();
      if (len > 0.0) Y.row(i) /= len;
    }
    const ComplexMatrix bt = Y * (out.rom.G + out.rom.P).cast<Complex>();
    // The structure-preserving iteration conjugates its tangent directions
    // (b_i^T = y_i^* (G + P) with unit left eigenvectors y_i).  Left data is
    // unused by the V-only iteration; mirror the right side so the stored
    // InterpolationData stays well-formed.
    InterpolationData next =
        mirrored_pole_data(spec.lam, bt.conjugate(), bt.adjoint());

    if (!prev_points.empty()) {
      const double ds = point_change(next.points, prev_points);
      out.history.push_back(ds);
      if (ds < config.conv_tol) {
        out.converged = true;
        break;
      }
    }
    if (it == config.max_iters) break;

    prev_points = next.points;
    used = next;
    V = thin_q(realified_krylov(A, B_in, next.points, next.right_dirs));
  }

  out.rom_sys = out.rom.to_system();
  out.V = std::move(V);
  out.W = std::move(W);
  out.interp = used.points.empty() ? InterpolationData{} : used;
  return out;
}

// Semidefinite factor X = F^T F by eigenvalue clipping.  Unlike psd_factor
// this never throws: extremal LMI solutions routinely carry O(eps) negative
// eigenvalues (they are clipped to zero along with the numerically zero
// positive ones).
Matrix clip_factor(const Matrix& X) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(X));
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "symmetric eigensolver failed");
  }
  const Vector& vals = es.eigenvalues();  // ascending
  const Index n = vals.size();
  const double cut = 1e-14 * std::max(std::abs(vals(0)),
                                      n > 0 ? std::abs(vals(n - 1)) : 0.0);
  Index rank = 0;
  for (Index i = 0; i < n; ++i) {
    if (vals(i) > cut) ++rank;
  }
  Matrix F(rank, n);
  for (Index k = 0; k < rank; ++k) {
    const Index i = n - 1 - k;  // descending eigenvalue order
    F.row(k) = std::sqrt(vals(i)) * es.eigenvectors().col(i).transpose();
  }
  return F;
}

double scored_h2_error(const StateSpaceSystem& sys,
                       const StateSpaceSystem& rom) {
  try {
    const double err = h2_error(sys, rom);
    return std::isfinite(err) ? err : kInf;
  } catch (const Error&) {
    return kInf;
  }
}

}  // namespace

StateSpaceSystem projection_rom(const StateSpaceSystem& sys, const Matrix& V,
                                const Matrix& W) {
  require_standard(sys, "projection_rom");
  const Index n = sys.n();
  const Index r = V.cols();
  if (V.rows() != n || W.rows() != n || W.cols() != r || r < 1 || r > n) {
    throw Error(ErrorCode::DimensionMismatch,
                "projection bases must be n x r with 1 <= r <= n");
  }
  const double biorth = (W.transpose() * V - Matrix::Identity(r, r)).norm();
  if (!(biorth <= 1e-8)) {
    throw Error(ErrorCode::NotBiorthogonal,
                "||W^T V - I||_F = " + std::to_string(biorth) +
                    " exceeds 1e-8; biorthogonalize the bases first");
  }
  if (Eigen::ColPivHouseholderQR<Matrix>(V).rank() < r ||
      Eigen::ColPivHouseholderQR<Matrix>(W).rank() < r) {
    throw Error(ErrorCode::RankDeficientBasis,
                "projection basis does not have full column rank");
  }
  return project_unchecked(sys, V, W);
}

void biorthogonalize(Matrix& V, Matrix& W) {
  if (V.rows() != W.rows() || V.cols() != W.cols() || V.cols() < 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "biorthogonalize needs two bases of identical shape");
  }
  V = thin_q(V);
  W = thin_q(W);
  right_normalize(V, W);
}

std::pair<Matrix, Matrix> tangential_basis(const StateSpaceSystem& sys,
                                           const InterpolationData& interp) {
  require_standard(sys, "tangential_basis");
  check_interp_dims(interp, sys.m(), sys.p());
  Matrix V = realified_krylov(sys.A, sys.B, interp.points, interp.right_dirs);
  Matrix W = realified_krylov(sys.A.transpose(), sys.C.transpose(),
                              interp.points, interp.left_dirs);
  const Matrix v_raw = V;
  const Matrix w_raw = W;
  biorthogonalize(V, W);
  // Span self-check: every raw direction must be reproduced by the
  // orthonormalized basis (Q from Householder QR spans the raw columns).
  const Matrix q_v = thin_q(v_raw);
  const Matrix q_w = thin_q(w_raw);
  for (Index j = 0; j < v_raw.cols(); ++j) {
    const double v_out =
        (v_raw.col(j) - q_v * (q_v.transpose() * v_raw.col(j))).norm();
    const double w_out =
        (w_raw.col(j) - q_w * (q_w.transpose() * w_raw.col(j))).norm();
    if (v_out > 1e-8 * std::max(1.0, v_raw.col(j).norm()) ||
        w_out > 1e-8 * std::max(1.0, w_raw.col(j).norm())) {
      throw Error(ErrorCode::RankDeficientBasis,
                  "orthonormalized basis fails to span a raw Krylov column");
    }
  }
  return {std::move(V), std::move(W)};
}

RomResult irka(const StateSpaceSystem& sys, Index r,
               const ReducerConfig& config) {
  require_standard(sys, "irka");
  sys.validate();
  const Index n = sys.n();
  if (r < 1 || r > n) {
    throw Error(ErrorCode::InvalidConfig,
                "irka needs 1 <= r <= n, got r = " + std::to_string(r));
  }
  if (config.max_iters < 1) {
    throw Error(ErrorCode::InvalidConfig, "max_iters must be at least 1");
  }
  if (spectral_abscissa(sys.A) >= 0.0) {
    throw Error(ErrorCode::NotStable,
                "irka requires an asymptotically stable system");
  }

  const int restarts = std::max(1, config.restarts);
  const int attempts_per_seed = 1 + std::max(0, config.stability_retry);
  bool have_best = false;
  double best_err = kInf;
  RomResult best;

  for (int k = 0; k < restarts; ++k) {
    GaussianRng rng(config.seed + static_cast<std::uint64_t>(k));
    for (int attempt = 0; attempt < attempts_per_seed; ++attempt) {
      RomResult candidate;
      try {
        candidate = irka_single(sys, r, config, rng);
      } catch (const Error&) {
        continue;  // numerical breakdown: redraw the initial basis
      }
      if (spectral_abscissa(candidate.rom.A) >= 0.0) {
        continue;  // unstable final ROM: redraw the initial basis
      }
      const double err = scored_h2_error(sys, candidate.rom);
      if (!have_best || err < best_err ||
          (err == best_err && candidate.converged && !best.converged)) {
        best = std::move(candidate);
        best_err = err;
        have_best = true;
      }
      break;  // stable result for this seed
    }
  }
  if (!have_best) {
    throw Error(ErrorCode::NoStableRom,
                "every IRKA attempt ended with an unstable reduced model");
  }
  return best;
}

PoleResidue pole_residue(const StateSpaceSystem& rom) {
  require_standard(rom, "pole_residue");
  rom.validate();
  Eigen::EigenSolver<Matrix> es(rom.A);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "eigenvalue iteration failed");
  }
  const ComplexMatrix S = es.eigenvectors();
  const Eigen::JacobiSVD<ComplexMatrix> svd_s(S);
  const double smin = svd_s.singularValues().minCoeff();
  const double cond =
      smin > 0.0 ? svd_s.singularValues().maxCoeff() / smin : kInf;
  if (!(cond < 1e8)) {
    throw Error(ErrorCode::DefectiveSpectrum,
                "eigenvector condition number " + std::to_string(cond) +
                    " exceeds 1e8; no pole-residue form");
  }
  const ComplexVector lam = es.eigenvalues();
  const ComplexMatrix bt = S.fullPivLu().solve(rom.B.cast<Complex>());
  const ComplexMatrix ct = rom.C.cast<Complex>() * S;

  const Index r = lam.size();
  std::vector<Index> order(static_cast<std::size_t>(r));
  for (Index i = 0; i < r; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (lam(a).real() != lam(b).real()) return lam(a).real() < lam(b).real();
    return lam(a).imag() > lam(b).imag();
  });
  PoleResidue out;
  out.poles.resize(r);
  out.b_dirs.resize(r, rom.m());
  out.c_dirs.resize(rom.p(), r);
  for (Index k = 0; k < r; ++k) {
    const Index i = order[static_cast<std::size_t>(k)];
    out.poles(k) = lam(i);
    out.b_dirs.row(k) = bt.row(i);
    out.c_dirs.col(k) = ct.col(i);
  }
  return out;
}

PhRomResult ph_irka(const PhRepresentation& ph, Index r,
                    const ReducerConfig& config) {
  ph.validate(1e-8);
  const Index n = ph.Q.rows();
  if (r < 1 || r > n) {
    throw Error(ErrorCode::InvalidConfig,
                "ph_irka needs 1 <= r <= n, got r = " + std::to_string(r));
  }
  if (config.max_iters < 1) {
    throw Error(ErrorCode::InvalidConfig, "max_iters must be at least 1");
  }
  const StateSpaceSystem full = ph.to_system();
  if (spectral_abscissa(full.A) >= 0.0) {
    throw Error(ErrorCode::NotStable,
                "ph_irka requires an asymptotically stable system");
  }

  const int restarts = std::max(1, config.restarts);
  const int attempts_per_seed = 1 + std::max(0, config.stability_retry);
  bool have_best = false;
  double best_err = kInf;
  PhRomResult best;

  for (int k = 0; k < restarts; ++k) {
    GaussianRng rng(config.seed + static_cast<std::uint64_t>(k));
    for (int attempt = 0; attempt < attempts_per_seed; ++attempt) {
      PhRomResult candidate;
      try {
        candidate = ph_irka_single(ph, r, config, rng);
      } catch (const Error&) {
        continue;
      }
      if (spectral_abscissa(candidate.rom_sys.A) >= 0.0) {
        continue;
      }
      const double err = scored_h2_error(full, candidate.rom_sys);
      if (!have_best || err < best_err ||
          (err == best_err && candidate.converged && !best.converged)) {
        best = std::move(candidate);
        best_err = err;
        have_best = true;
      }
      break;
    }
  }
  if (!have_best) {
    throw Error(ErrorCode::NoStableRom,
                "every pH-IRKA attempt ended with an unstable reduced model");
  }
  return best;
}

PrbtResult prbt(const StateSpaceSystem& sys, Index r, const Matrix& x_min,
                const Matrix& x_max) {
  require_standard(sys, "prbt");
  sys.validate();
  const Index n = sys.n();
  if (x_min.rows() != n || x_min.cols() != n || x_max.rows() != n ||
      x_max.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "LMI solutions must be n x n");
  }
  // Y_min = X_max^{-1} (minimal solution of the dual inequality).
  const Eigen::LLT<Matrix> llt(sym(x_max));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::XNotPd,
                "maximal solution is not positive definite; no dual Gramian");
  }
  const Matrix y_min = sym(llt.solve(Matrix::Identity(n, n)));

  // Balance X_min against Y_min through clipped semidefinite factors (not
  // Cholesky, which an O(eps) negative eigenvalue breaks).
  const Matrix f_x = clip_factor(x_min);  // X_min = f_x^T f_x
  const Matrix f_y = clip_factor(y_min);  // Y_min = f_y^T f_y
  const SvdResult sv = svd(f_y * f_x.transpose());

  const Index available = sv.S.size();
  const double lead = available > 0 ? sv.S(0) : 0.0;
  if (r < 1 || r > available || !(sv.S(r - 1) > 1e-14 * std::max(1.0, lead))) {
    throw Error(ErrorCode::InvalidConfig,
                "requested order " + std::to_string(r) +
                    " exceeds the numerical rank of the balancing product");
  }

  const Vector scale = sv.S.head(r).array().sqrt().inverse().matrix();
  PrbtResult out;
  out.V = f_y.transpose() * sv.U.leftCols(r) * scale.asDiagonal();
  out.W = f_x.transpose() * sv.V.leftCols(r) * scale.asDiagonal();
  // Tidy the O(eps) biorthogonality drift before projecting.
  const Matrix cross = out.W.transpose() * out.V;
  if ((cross - Matrix::Identity(r, r)).norm() > 1e-10) {
    right_normalize(out.V, out.W);
  }
  out.characteristic_values = sv.S;
  out.rom = projection_rom(sys, out.V, out.W);
  return out;
}

PrbtResult prbt(const StateSpaceSystem& sys, Index r,
                const KypOptions& kyp_opts) {
  const KypExtremalPair pair = solve_kyp_extremal(sys, kyp_opts);
  return prbt(sys, r, pair.min.X, pair.max.X);
}

InterpolationReport verify_interpolation(const StateSpaceSystem& sys,
                                         const StateSpaceSystem& rom,
                                         const InterpolationData& interp,
                                         double tol) {
  if (sys.m() != rom.m() || sys.p() != rom.p()) {
    throw Error(ErrorCode::DimensionMismatch,
                "full and reduced models must share input/output dimensions");
  }
  check_interp_dims(interp, sys.m(), sys.p());

  // Derivative G'(s) = -C (s E - A)^{-1} E (s E - A)^{-1} B.
  const auto derivative = [](const StateSpaceSystem& g,
                             Complex s) -> ComplexMatrix {
    ComplexMatrix K = -g.A.cast<Complex>();
    if (g.E.has_value()) {
      K += s * g.E->cast<Complex>();
    } else {
      K.diagonal().array() += s;
    }
    const Eigen::PartialPivLU<ComplexMatrix> lu(K);
    const ComplexMatrix x1 = lu.solve(g.B.cast<Complex>());
    const ComplexMatrix ex1 = g.E.has_value() ? (g.E->cast<Complex>() * x1)
                                              : x1;
    const ComplexMatrix x2 = lu.solve(ex1);
    ComplexMatrix d = -(g.C.cast<Complex>() * x2);
    if (!d.allFinite()) {
      throw Error(ErrorCode::SingularShift, "derivative at a pole");
    }
    return d;
  };

  InterpolationReport report;
  const std::size_t q = interp.points.size();
  report.value_error.assign(q, kInf);
  report.left_error.assign(q, kInf);
  report.hermite_error.assign(q, kInf);
  for (std::size_t i = 0; i < q; ++i) {
    const Complex s = interp.points[i];
    const ComplexVector rd = interp.right_dirs.col(static_cast<Index>(i));
    const ComplexVector ld = interp.left_dirs.col(static_cast<Index>(i));
    try {
      const ComplexMatrix g = transfer_eval(sys, s);
      const ComplexMatrix gr = transfer_eval(rom, s);
      const ComplexMatrix dg = derivative(sys, s);
      const ComplexMatrix dgr = derivative(rom, s);
      // Relative to the full model's magnitudes at the point.
      const double g_scale = std::max(g.norm() * rd.norm(), 1e-300);
      const double left_scale = std::max(ld.norm() * g.norm(), 1e-300);
      const double herm_scale =
          std::max(ld.norm() * dg.norm() * rd.norm(), 1e-300);
      report.value_error[i] = ((g - gr) * rd).norm() / g_scale;
      report.left_error[i] =
          (ld.transpose() * (g - gr)).norm() / left_scale;
      report.hermite_error[i] =
          std::abs((ld.transpose() * (dg - dgr) * rd)(0, 0)) / herm_scale;
    } catch (const Error&) {
      // Point at a pole: the infinite defaults stand.
    }
    report.worst = std::max({report.worst, report.value_error[i],
                             report.left_error[i], report.hermite_error[i]});
  }
  report.ok = report.worst <= tol;
  return report;
}

}  // namespace pamor
