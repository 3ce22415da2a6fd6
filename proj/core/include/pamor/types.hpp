// SPDX-License-Identifier: MIT
//
// Common value types and the error taxonomy shared by all pamor modules.
// Systems and matrices are immutable values; every operation in the library
// is a pure function of its inputs and safe to call concurrently.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pamor {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Error taxonomy
// ---------------------------------------------------------------------------

enum class ErrorCode {
  // dense-linalg
  NotStable,
  NonSymmetric,
  SpectraOverlap,
  NoHamiltonianSplit,
  NotPositiveDefinite,
  Indefinite,
  NoConvergence,
  // lti-core
  SingularShift,
  Infinite,
  ESingular,
  NotPsd,
  DimensionMismatch,
  // kyp
  SingularFeedthrough,
  UncertifiedSolution,
  // reducers
  NotBiorthogonal,
  RankDeficientBasis,
  NoStableRom,
  DefectiveSpectrum,
  // spectral-factor-mor
  InnerRomUnstable,
  FeedthroughMismatch,
  NoProjectionData,
  XNotPd,
  DualNotPassive,
  // contractive
  FeedthroughSingular,
  // models-io / cli
  InvalidConfig,
  IoError,
  ParseError,
};

// Coarse classification used by the CLI to map failures to exit codes
// (1 = usage, 2 = numerical, 3 = I/O).
enum class ErrorCategory { Usage, Numerical, Io };

constexpr ErrorCategory error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
      return ErrorCategory::Usage;
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Numerical;
  }
}

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }
  ErrorCategory category() const { return error_category(code_); }

 private:
  ErrorCode code_;
};

// ---------------------------------------------------------------------------
// StateSpaceSystem
// ---------------------------------------------------------------------------

// Linear time-invariant system
//
//   E x' = A x + B u,   y = C x + D u
//
// with E optional (absent means E = I).  When E is present it must be
// symmetric positive definite; the transfer function is C (sE - A)^{-1} B + D.
struct StateSpaceSystem {
  Matrix A;  // n x n
  Matrix B;  // n x m
  Matrix C;  // p x n
  Matrix D;  // p x m
  std::optional<Matrix> E;  // n x n SPD when present

  Index n() const { return A.rows(); }
  Index m() const { return B.cols(); }
  Index p() const { return C.rows(); }

  // Throws DimensionMismatch / NotPositiveDefinite on inconsistent data.
  void validate() const;
};

// Convenience constructor for 1x1 systems.
StateSpaceSystem scalar_system(double a, double b, double c, double d);

// ---------------------------------------------------------------------------
// PhRepresentation
// ---------------------------------------------------------------------------

// Structured decomposition of a passive system,
//
//   A = (J - R) Q,  B = G - P,  C = (G + P)^T Q,  D = S + N,
//
// with J, N skew-symmetric, Q symmetric positive definite and the dissipation
// block [[R, P], [P^T, S]] symmetric positive semidefinite.
struct PhRepresentation {
  Matrix J, R, Q;  // n x n
  Matrix G, P;     // n x m
  Matrix S, N;     // m x m

  Index n() const { return J.rows(); }
  Index m() const { return G.cols(); }

  StateSpaceSystem to_system() const;

  // Checks the structural invariants above with relative tolerance `tol`
  // (scaled by the magnitude of the blocks); returns the worst violation.
  double structure_violation() const;
  bool is_valid(double tol = 1e-10) const;
  void validate(double tol = 1e-10) const;  // throws NotPsd on violation
};

// ---------------------------------------------------------------------------
// FrequencyGrid
// ---------------------------------------------------------------------------

struct FrequencyGrid {
  enum class Spacing { Linear, Logarithmic };

  std::vector<double> points;  // strictly increasing frequencies [rad/s]
  Spacing spacing = Spacing::Logarithmic;

  static FrequencyGrid logarithmic(double w_min, double w_max, int count);
  static FrequencyGrid linear(double w_min, double w_max, int count);
  // Default analysis grid: 400 logarithmic points on [1e-4, 1e4] rad/s.
  static FrequencyGrid standard();
};

// ---------------------------------------------------------------------------
// Small shared helpers
// ---------------------------------------------------------------------------

inline Matrix sym(const Matrix& M) { return 0.5 * (M + M.transpose()); }
inline Matrix skew(const Matrix& M) { return 0.5 * (M - M.transpose()); }

}  // namespace pamor
