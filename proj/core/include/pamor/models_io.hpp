// SPDX-License-Identifier: MIT
//
// Benchmark model generators (mass-spring-damper chain, linear poroelasticity
// with artificial damping) and artifact serialization: Matrix Market files,
// line-oriented model manifests, CSV tables, and SVG line plots.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pamor/types.hpp"

namespace pamor {

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

// Chain of n/2 mass-spring-damper cells in energy coordinates.
struct MsdConfig {
  Index n = 1000;        // state dimension, even (two states per cell)
  double masses = 4.0;
  double stiffness = 4.0;
  double damping = 1.0;
  Index inputs = 2;      // forces on the first `inputs` masses
};

// Port-Hamiltonian chain model: states alternate elongation/momentum, J is
// the canonical skew coupling, R collects dampers on the momentum states,
// Q = diag(stiffness, 1/mass, ...), inputs force the first masses, and
// C = B^T Q reads the corresponding velocities.  Throws InvalidConfig.
PhRepresentation generate_msd(const MsdConfig& cfg);

// Linear poroelasticity on the unit square (displacement u, its velocity
// proxy w, pore pressure p) discretized with continuous piecewise-linear
// elements on a uniform triangulation (each grid square split along its main
// diagonal), homogeneous Dirichlet boundary, spatially constant body force
// and injection inputs (m = 2).
struct PoroConfig {
  Index mesh_divisions = 15;      // elements per side; n = 5 (N-1)^2 states
  double mu = 12.0;               // first Lame parameter
  double lambda = 6.0;            // second Lame parameter
  double rho = 1e-3;              // density
  double alpha = 0.79;            // Biot-Willis coefficient
  double inv_m = 7.80e3;          // inverse Biot modulus 1/M
  double kappa_over_nu = 633.33;  // permeability over viscosity
  double eta = 1e-3;              // artificial damping shift
};

// Generalized port-Hamiltonian form E xdot = (J - R - eta I) x + B v,
// y = B^T x with E SPD, J skew, R PSD.  sys.E carries E; J and R are the
// undamped structure blocks.  Throws InvalidConfig.
struct PoroModel {
  StateSpaceSystem sys;
  Matrix J;
  Matrix R;
  double eta;
};
PoroModel generate_poro(const PoroConfig& cfg);

// ---------------------------------------------------------------------------
// Matrix Market
// ---------------------------------------------------------------------------

// Reads `%%MatrixMarket matrix coordinate|array real general|symmetric`.
// Throws ParseError naming the offending line, IoError on filesystem faults.
Matrix read_matrix_market(const std::filesystem::path& path);

// Writes array format for dense content, coordinate format when at most a
// quarter of the entries are nonzero; 17 significant digits so the round
// trip is bit-exact.
void write_matrix_market(const Matrix& M, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

// Line-oriented model description: `format = pamor-manifest-v1`, `name = ...`,
// matrix roles as `A = files/a.mtx` (paths relative to the manifest), and
// parameter echoes as `param.<key> = <value>`.
struct ModelManifest {
  std::string name;
  std::map<std::string, std::filesystem::path> files;  // role -> path
  std::map<std::string, std::string> params;
};

// A manifest with its referenced matrices loaded and assembled.  A state-
// space system requires roles A, B, C (D defaults to zero, logged; E
// optional); a port-Hamiltonian representation requires J, R, Q, G
// (P, S, N default to zero).  Either or both may be present.
struct LoadedModel {
  ModelManifest manifest;
  std::map<std::string, Matrix> matrices;
  std::optional<StateSpaceSystem> sys;
  std::optional<PhRepresentation> ph;
};

LoadedModel read_manifest(const std::filesystem::path& path);

// Writes the matrices (one Matrix Market file per role, under
// `<name>_<role>.mtx` beside the manifest) and the manifest itself.
void write_manifest(const std::string& name,
                    const std::map<std::string, Matrix>& matrices,
                    const std::map<std::string, std::string>& params,
                    const std::filesystem::path& manifest_path);

// ---------------------------------------------------------------------------
// CSV and SVG
// ---------------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
void write_csv(const CsvTable& table, const std::filesystem::path& path);
CsvTable read_csv(const std::filesystem::path& path);

// 17-significant-digit decimal form of a double (round-trip exact).
std::string format_double(double v);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};
struct PlotOptions {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  int width = 800;
  int height = 520;
};
void write_svg_plot(const std::vector<PlotSeries>& series,
                    const PlotOptions& options,
                    const std::filesystem::path& path);

}  // namespace pamor
