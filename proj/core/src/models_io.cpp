// SPDX-License-Identifier: MIT

#include "pamor/models_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace pamor {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

PhRepresentation generate_msd(const MsdConfig& cfg) {
  if (cfg.n < 2 || cfg.n % 2 != 0) {
    throw Error(ErrorCode::InvalidConfig,
                "msd needs an even state dimension n >= 2, got " +
                    std::to_string(cfg.n));
  }
  const Index cells = cfg.n / 2;
  if (cfg.inputs < 1 || cfg.inputs > cells) {
    throw Error(ErrorCode::InvalidConfig,
                "msd needs 1 <= inputs <= n/2, got " +
                    std::to_string(cfg.inputs));
  }
  if (!(cfg.masses > 0.0) || !(cfg.stiffness > 0.0) || !(cfg.damping >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig,
                "msd needs masses > 0, stiffness > 0, damping >= 0");
  }

  // States alternate (elongation, momentum) per cell: q_i = 2i, p_i = 2i+1.
  const Index n = cfg.n;
  PhRepresentation ph;
  ph.J = Matrix::Zero(n, n);
  ph.R = Matrix::Zero(n, n);
  ph.Q = Matrix::Zero(n, n);
  for (Index i = 0; i < cells; ++i) {
    const Index q = 2 * i;
    const Index p = 2 * i + 1;
    ph.J(q, p) = 1.0;
    ph.J(p, q) = -1.0;
    if (i + 1 < cells) {
      // Elongation q_i also responds to the next cell's momentum.
      const Index p_next = 2 * (i + 1) + 1;
      ph.J(q, p_next) = -1.0;
      ph.J(p_next, q) = 1.0;
    }
    ph.R(p, p) = cfg.damping;
    ph.Q(q, q) = cfg.stiffness;
    ph.Q(p, p) = 1.0 / cfg.masses;
  }
  ph.G = Matrix::Zero(n, cfg.inputs);
  for (Index j = 0; j < cfg.inputs; ++j) {
    ph.G(2 * j + 1, j) = 1.0;  // force on mass j
  }
  ph.P = Matrix::Zero(n, cfg.inputs);
  ph.S = Matrix::Zero(cfg.inputs, cfg.inputs);
  ph.N = Matrix::Zero(cfg.inputs, cfg.inputs);
  ph.validate(1e-12);
  return ph;
}

namespace {

// Linear P1 triangle: area and constant basis gradients.
struct TriangleGeometry {
  double area = 0.0;
  std::array<std::array<double, 2>, 3> grad{};  // grad[k] = grad lambda_k
};

TriangleGeometry triangle_geometry(const std::array<double, 3>& x,
                                   const std::array<double, 3>& y) {
  TriangleGeometry geo;
  const double det =
      (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]);
  geo.area = 0.5 * std::abs(det);
  for (int k = 0; k < 3; ++k) {
    const int k1 = (k + 1) % 3;
    const int k2 = (k + 2) % 3;
    geo.grad[static_cast<std::size_t>(k)] = {(y[k1] - y[k2]) / det,
                                             (x[k2] - x[k1]) / det};
  }
  return geo;
}

}  // namespace

PoroModel generate_poro(const PoroConfig& cfg) {
  const Index N = cfg.mesh_divisions;
  if (N < 2) {
    throw Error(ErrorCode::InvalidConfig,
                "poro needs at least 2 mesh divisions per side");
  }
  if (!(cfg.mu > 0.0) || !(cfg.lambda >= 0.0) || !(cfg.rho > 0.0) ||
      !(cfg.inv_m > 0.0) || !(cfg.kappa_over_nu > 0.0) || !(cfg.eta >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig,
                "poro needs mu, rho, 1/M, kappa/nu > 0 and lambda, eta >= 0");
  }

  const Index side = N - 1;             // interior nodes per direction
  const Index ni = side * side;         // pressure dofs
  const Index nu = 2 * ni;              // displacement/velocity dofs
  const double h = 1.0 / static_cast<double>(N);

  // Interior index of grid node (i, j), or -1 on the Dirichlet boundary.
  const auto interior = [&](Index i, Index j) -> Index {
    if (i < 1 || i > side || j < 1 || j > side) return -1;
    return (j - 1) * side + (i - 1);
  };

  Matrix mass_p = Matrix::Zero(ni, ni);   // scalar P1 mass
  Matrix stiff_p = Matrix::Zero(ni, ni);  // scalar P1 stiffness
  Matrix mass_u = Matrix::Zero(nu, nu);   // vector P1 mass
  Matrix stiff_u = Matrix::Zero(nu, nu);  // linear elasticity
  Matrix div_coupling = Matrix::Zero(ni, nu);  // D(i, (j,k)) = int l_i d_k l_j
  Vector load = Vector::Zero(ni);              // int phi_i

  // Each grid square is split along its main diagonal into two triangles.
  const std::array<std::array<std::array<Index, 2>, 3>, 2> local_nodes = {{
      {{{0, 0}, {1, 0}, {1, 1}}},
      {{{0, 0}, {1, 1}, {0, 1}}},
  }};
  for (Index sq_j = 0; sq_j < N; ++sq_j) {
    for (Index sq_i = 0; sq_i < N; ++sq_i) {
      for (const auto& tri : local_nodes) {
        std::array<double, 3> x{};
        std::array<double, 3> y{};
        std::array<Index, 3> dof{};
        for (std::size_t a = 0; a < 3; ++a) {
          const Index gi = sq_i + tri[a][0];
          const Index gj = sq_j + tri[a][1];
          x[a] = h * static_cast<double>(gi);
          y[a] = h * static_cast<double>(gj);
          dof[a] = interior(gi, gj);
        }
        const TriangleGeometry geo = triangle_geometry(x, y);
        const double T = geo.area;
        for (std::size_t a = 0; a < 3; ++a) {
          const Index ia = dof[a];
          if (ia < 0) continue;
          load(ia) += T / 3.0;
          const auto& ga = geo.grad[a];
          for (std::size_t b = 0; b < 3; ++b) {
            const Index ib = dof[b];
            const auto& gb = geo.grad[b];
            // Divergence coupling needs only the trial node inside.
            for (int k = 0; k < 2; ++k) {
              if (ib >= 0) {
                div_coupling(ia, 2 * ib + k) +=
                    T / 3.0 * gb[static_cast<std::size_t>(k)];
              }
            }
            if (ib < 0) continue;
            const double mass_ab = (a == b ? T / 6.0 : T / 12.0);
            const double lap_ab = T * (ga[0] * gb[0] + ga[1] * gb[1]);
            mass_p(ia, ib) += mass_ab;
            stiff_p(ia, ib) += lap_ab;
            for (int k = 0; k < 2; ++k) {
              mass_u(2 * ia + k, 2 * ib + k) += mass_ab;
              for (int l = 0; l < 2; ++l) {
                // 2 mu eps(phi):eps(psi) + lambda div(phi) div(psi)
                const double el =
                    cfg.mu * ((k == l ? lap_ab / T : 0.0) +
                              ga[static_cast<std::size_t>(l)] *
                                  gb[static_cast<std::size_t>(k)]) +
                    cfg.lambda * ga[static_cast<std::size_t>(k)] *
                        gb[static_cast<std::size_t>(l)];
                stiff_u(2 * ia + k, 2 * ib + l) += T * el;
              }
            }
          }
        }
      }
    }
  }
  mass_p = sym(mass_p);
  stiff_p = sym(stiff_p);
  mass_u = sym(mass_u);
  stiff_u = sym(stiff_u);

  // State x = (w, u, p) with w the velocity proxy.
  const Index n = nu + nu + ni;
  PoroModel model;
  model.eta = cfg.eta;
  Matrix E = Matrix::Zero(n, n);
  E.topLeftCorner(nu, nu) = cfg.rho * mass_u;
  E.block(nu, nu, nu, nu) = stiff_u;
  E.bottomRightCorner(ni, ni) = cfg.inv_m * mass_p;

  model.J = Matrix::Zero(n, n);
  model.J.block(0, nu, nu, nu) = -stiff_u;
  model.J.block(nu, 0, nu, nu) = stiff_u;
  model.J.block(0, 2 * nu, nu, ni) = cfg.alpha * div_coupling.transpose();
  model.J.block(2 * nu, 0, ni, nu) = -cfg.alpha * div_coupling;

  model.R = Matrix::Zero(n, n);
  model.R.bottomRightCorner(ni, ni) = cfg.kappa_over_nu * stiff_p;

  // Constant body force f = (1, 1) on the velocity block, constant
  // injection g = 1 on the pressure block.
  Matrix B = Matrix::Zero(n, 2);
  for (Index i = 0; i < ni; ++i) {
    B(2 * i, 0) = load(i);
    B(2 * i + 1, 0) = load(i);
    B(2 * nu + i, 1) = load(i);
  }

  model.sys.A = model.J - model.R -
                cfg.eta * Matrix::Identity(n, n);
  model.sys.B = B;
  model.sys.C = B.transpose();
  model.sys.D = Matrix::Zero(2, 2);
  model.sys.E = E;
  model.sys.validate();
  return model;
}

// ---------------------------------------------------------------------------
// Matrix Market
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void parse_fail(const fs::path& path, long line,
                             const std::string& message) {
  throw Error(ErrorCode::ParseError,
              path.string() + ":" + std::to_string(line) + ": " + message);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

Matrix read_matrix_market(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError,
                "cannot open " + path.string() + " for reading");
  }
  long line_no = 0;
  std::string line;
  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  ++line_no;

  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix") {
    parse_fail(path, line_no, "expected a %%MatrixMarket matrix header");
  }
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (format != "coordinate" && format != "array") {
    parse_fail(path, line_no, "unsupported format '" + format + "'");
  }
  if (field != "real" && field != "integer" && field != "double") {
    parse_fail(path, line_no, "unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric" &&
      symmetry != "skew-symmetric") {
    parse_fail(path, line_no, "unsupported symmetry '" + symmetry + "'");
  }

  // First non-comment, non-blank line carries the size.
  auto next_data_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      std::size_t pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '%') continue;
      return true;
    }
    return false;
  };

  if (!next_data_line()) parse_fail(path, line_no, "missing size line");
  std::istringstream size_line(line);
  long rows = 0, cols = 0, nnz = 0;
  if (!(size_line >> rows >> cols)) {
    parse_fail(path, line_no, "malformed size line '" + line + "'");
  }
  if (format == "coordinate" && !(size_line >> nnz)) {
    parse_fail(path, line_no, "coordinate size line needs a nonzero count");
  }
  if (rows < 0 || cols < 0) parse_fail(path, line_no, "negative dimension");

  Matrix M = Matrix::Zero(rows, cols);
  if (format == "coordinate") {
    for (long e = 0; e < nnz; ++e) {
      if (!next_data_line()) {
        parse_fail(path, line_no,
                   "expected " + std::to_string(nnz) + " entries, got " +
                       std::to_string(e));
      }
      std::istringstream entry(line);
      long i = 0, j = 0;
      double v = 0.0;
      if (!(entry >> i >> j >> v)) {
        parse_fail(path, line_no, "malformed entry '" + line + "'");
      }
      if (i < 1 || i > rows || j < 1 || j > cols) {
        parse_fail(path, line_no, "index out of range in '" + line + "'");
      }
      M(i - 1, j - 1) = v;
      if (symmetry == "symmetric" && i != j) M(j - 1, i - 1) = v;
      if (symmetry == "skew-symmetric" && i != j) M(j - 1, i - 1) = -v;
    }
  } else {
    const bool packed = symmetry != "general";
    if (packed && rows != cols) {
      parse_fail(path, line_no, "packed array needs a square matrix");
    }
    for (long j = 0; j < cols; ++j) {
      for (long i = packed ? j : 0; i < rows; ++i) {
        if (symmetry == "skew-symmetric" && i == j) continue;
        if (!next_data_line()) {
          parse_fail(path, line_no, "array data ended early");
        }
        std::istringstream entry(line);
        double v = 0.0;
        if (!(entry >> v)) {
          parse_fail(path, line_no, "malformed value '" + line + "'");
        }
        M(i, j) = v;
        if (symmetry == "symmetric") M(j, i) = v;
        if (symmetry == "skew-symmetric") M(j, i) = -v;
      }
    }
  }
  return M;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_market(const Matrix& M, const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::IoError,
                "cannot open " + path.string() + " for writing");
  }
  const Index rows = M.rows();
  const Index cols = M.cols();
  Index nnz = 0;
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      if (M(i, j) != 0.0) ++nnz;
    }
  }
  const bool sparse = 4 * nnz <= rows * cols;
  if (sparse) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << rows << " " << cols << " " << nnz << "\n";
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) {
        if (M(i, j) != 0.0) {
          out << (i + 1) << " " << (j + 1) << " " << format_double(M(i, j))
              << "\n";
        }
      }
    }
  } else {
    out << "%%MatrixMarket matrix array real general\n";
    out << rows << " " << cols << "\n";
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) {
        out << format_double(M(i, j)) << "\n";
      }
    }
  }
  if (!out.good()) {
    throw Error(ErrorCode::IoError, "write failed for " + path.string());
  }
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const std::size_t first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const std::size_t last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

constexpr const char* kManifestFormat = "pamor-manifest-v1";

Matrix zero_like(Index rows, Index cols) { return Matrix::Zero(rows, cols); }

const Matrix* find_role(const std::map<std::string, Matrix>& matrices,
                        const std::string& role) {
  const auto it = matrices.find(role);
  return it == matrices.end() ? nullptr : &it->second;
}

}  // namespace

LoadedModel read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError,
                "cannot open " + path.string() + " for reading");
  }
  LoadedModel model;
  model.manifest.name = path.stem().string();
  bool format_seen = false;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      parse_fail(path, line_no, "expected 'key = value', got '" + stripped +
                                    "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      parse_fail(path, line_no, "empty key or value");
    }
    if (key == "format") {
      if (value != kManifestFormat) {
        parse_fail(path, line_no,
                   "unsupported format '" + value + "', expected " +
                       std::string(kManifestFormat));
      }
      format_seen = true;
    } else if (key == "name") {
      model.manifest.name = value;
    } else if (key.rfind("param.", 0) == 0) {
      model.manifest.params[key.substr(6)] = value;
    } else {
      model.manifest.files[key] = value;
    }
  }
  if (!format_seen) {
    parse_fail(path, 1,
               "missing 'format = " + std::string(kManifestFormat) + "' line");
  }

  const fs::path base = path.parent_path();
  for (const auto& [role, rel] : model.manifest.files) {
    model.matrices[role] = read_matrix_market(base / rel);
  }

  // Assemble a state-space system when A, B, C are present.
  const Matrix* A = find_role(model.matrices, "A");
  const Matrix* B = find_role(model.matrices, "B");
  const Matrix* C = find_role(model.matrices, "C");
  if (A && B && C) {
    StateSpaceSystem sys;
    sys.A = *A;
    sys.B = *B;
    sys.C = *C;
    const Matrix* D = find_role(model.matrices, "D");
    sys.D = D ? *D : zero_like(C->rows(), B->cols());
    if (const Matrix* E = find_role(model.matrices, "E")) sys.E = *E;
    try {
      sys.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::DimensionMismatch,
                  path.string() + ": inconsistent state-space roles (" +
                      e.what() + ")");
    }
    model.sys = std::move(sys);
  }

  // Assemble a port-Hamiltonian representation when J, R, Q, G are present.
  const Matrix* J = find_role(model.matrices, "J");
  const Matrix* R = find_role(model.matrices, "R");
  const Matrix* Q = find_role(model.matrices, "Q");
  const Matrix* G = find_role(model.matrices, "G");
  if (J && R && Q && G) {
    PhRepresentation ph;
    ph.J = *J;
    ph.R = *R;
    ph.Q = *Q;
    ph.G = *G;
    const Matrix* P = find_role(model.matrices, "P");
    const Matrix* S = find_role(model.matrices, "S");
    const Matrix* Np = find_role(model.matrices, "N");
    ph.P = P ? *P : zero_like(G->rows(), G->cols());
    ph.S = S ? *S : zero_like(G->cols(), G->cols());
    ph.N = Np ? *Np : zero_like(G->cols(), G->cols());
    if (ph.J.rows() != ph.J.cols() || ph.R.rows() != ph.J.rows() ||
        ph.Q.rows() != ph.J.rows() || ph.G.rows() != ph.J.rows() ||
        ph.P.rows() != ph.G.rows() || ph.P.cols() != ph.G.cols() ||
        ph.S.rows() != ph.G.cols() || ph.N.rows() != ph.G.cols()) {
      throw Error(ErrorCode::DimensionMismatch,
                  path.string() + ": inconsistent port-Hamiltonian roles");
    }
    model.ph = std::move(ph);
  }
  return model;
}

void write_manifest(const std::string& name,
                    const std::map<std::string, Matrix>& matrices,
                    const std::map<std::string, std::string>& params,
                    const fs::path& manifest_path) {
  const fs::path dir = manifest_path.parent_path();
  std::error_code ec;
  if (!dir.empty()) fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::IoError,
                "cannot create directory " + dir.string() + ": " +
                    ec.message());
  }
  std::ofstream out(manifest_path);
  if (!out) {
    throw Error(ErrorCode::IoError,
                "cannot open " + manifest_path.string() + " for writing");
  }
  out << "format = " << kManifestFormat << "\n";
  out << "name = " << name << "\n";
  for (const auto& [role, M] : matrices) {
    const std::string file = name + "_" + role + ".mtx";
    write_matrix_market(M, dir / file);
    out << role << " = " << file << "\n";
  }
  for (const auto& [key, value] : params) {
    out << "param." << key << " = " << value << "\n";
  }
  if (!out.good()) {
    throw Error(ErrorCode::IoError,
                "write failed for " + manifest_path.string());
  }
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_csv(const CsvTable& table, const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::IoError,
                "cannot open " + path.string() + " for writing");
  }
  const auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ",";
      out << row[i];
    }
    out << "\n";
  };
  write_row(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw Error(ErrorCode::InvalidConfig,
                  "CSV row width " + std::to_string(row.size()) +
                      " does not match header width " +
                      std::to_string(table.header.size()));
    }
    write_row(row);
  }
  if (!out.good()) {
    throw Error(ErrorCode::IoError, "write failed for " + path.string());
  }
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError,
                "cannot open " + path.string() + " for reading");
  }
  const auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
  };
  CsvTable table;
  std::string line;
  if (std::getline(in, line)) table.header = split(line);
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    table.rows.push_back(split(line));
  }
  return table;
}

// ---------------------------------------------------------------------------
// SVG plots
// ---------------------------------------------------------------------------

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr std::array<const char*, 8> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct AxisScale {
  bool log = false;
  double lo = 0.0;
  double hi = 1.0;
  double px0 = 0.0;  // pixel at lo
  double px1 = 1.0;  // pixel at hi

  double to_px(double v) const {
    double t;
    if (log) {
      t = (std::log10(v) - std::log10(lo)) /
          (std::log10(hi) - std::log10(lo));
    } else {
      t = (v - lo) / (hi - lo);
    }
    return px0 + t * (px1 - px0);
  }

  bool admissible(double v) const {
    return std::isfinite(v) && (!log || v > 0.0);
  }
};

std::string short_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

void write_svg_plot(const std::vector<PlotSeries>& series,
                    const PlotOptions& options, const fs::path& path) {
  if (series.empty()) {
    throw Error(ErrorCode::InvalidConfig, "plot needs at least one series");
  }
  AxisScale xs, ys;
  xs.log = options.logx;
  ys.log = options.logy;
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const PlotSeries& s : series) {
    if (s.x.size() != s.y.size()) {
      throw Error(ErrorCode::InvalidConfig,
                  "series '" + s.label + "' has mismatched x/y lengths");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!xs.admissible(s.x[i]) || !ys.admissible(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin) || !std::isfinite(ymin)) {
    throw Error(ErrorCode::InvalidConfig,
                "plot has no drawable data points");
  }
  // Pad degenerate ranges.
  if (xmin == xmax) {
    xmin = xs.log ? xmin / 2.0 : xmin - 1.0;
    xmax = xs.log ? xmax * 2.0 : xmax + 1.0;
  }
  if (ymin == ymax) {
    ymin = ys.log ? ymin / 2.0 : ymin - 1.0;
    ymax = ys.log ? ymax * 2.0 : ymax + 1.0;
  }

  const double w = options.width;
  const double h = options.height;
  const double ml = 76, mr = 24, mt = 42, mb = 54;
  xs.lo = xmin;
  xs.hi = xmax;
  xs.px0 = ml;
  xs.px1 = w - mr;
  ys.lo = ymin;
  ys.hi = ymax;
  ys.px0 = h - mb;  // y axis grows upward
  ys.px1 = mt;

  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::IoError,
                "cannot open " + path.string() + " for writing");
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h
      << "\">\n";
  out << "<rect width=\"" << w << "\" height=\"" << h
      << "\" fill=\"white\"/>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\""
      << (w - ml - mr) << "\" height=\"" << (h - mt - mb)
      << "\" fill=\"none\" stroke=\"#333\"/>\n";

  // Ticks: decades on log axes, five uniform steps otherwise.
  const auto ticks = [](const AxisScale& ax) {
    std::vector<double> t;
    if (ax.log) {
      const int lo = static_cast<int>(std::ceil(std::log10(ax.lo) - 1e-9));
      const int hi = static_cast<int>(std::floor(std::log10(ax.hi) + 1e-9));
      int step = 1 + (hi - lo) / 10;  // at most ~10 labeled decades
      for (int k = lo; k <= hi; k += step) t.push_back(std::pow(10.0, k));
    } else {
      for (int k = 0; k <= 5; ++k) {
        t.push_back(ax.lo + (ax.hi - ax.lo) * k / 5.0);
      }
    }
    return t;
  };
  out << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">\n";
  for (double t : ticks(xs)) {
    const double px = xs.to_px(t);
    out << "<line x1=\"" << px << "\" y1=\"" << (h - mb) << "\" x2=\"" << px
        << "\" y2=\"" << (h - mb + 5) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << px << "\" y=\"" << (h - mb + 18)
        << "\" text-anchor=\"middle\">" << short_number(t) << "</text>\n";
  }
  for (double t : ticks(ys)) {
    const double py = ys.to_px(t);
    out << "<line x1=\"" << (ml - 5) << "\" y1=\"" << py << "\" x2=\"" << ml
        << "\" y2=\"" << py << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << (ml - 8) << "\" y=\"" << (py + 4)
        << "\" text-anchor=\"end\">" << short_number(t) << "</text>\n";
  }
  out << "<text x=\"" << (ml + (w - ml - mr) / 2) << "\" y=\"" << (h - 14)
      << "\" text-anchor=\"middle\">" << xml_escape(options.xlabel)
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << (mt + (h - mt - mb) / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (mt + (h - mt - mb) / 2) << ")\">" << xml_escape(options.ylabel)
      << "</text>\n";
  out << "<text x=\"" << (w / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-size=\"15\">" << xml_escape(options.title) << "</text>\n";
  out << "</g>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const char* color = kPalette[si % kPalette.size()];
    std::ostringstream pts;
    bool any = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!xs.admissible(s.x[i]) || !ys.admissible(s.y[i])) continue;
      pts << xs.to_px(s.x[i]) << "," << ys.to_px(s.y[i]) << " ";
      any = true;
    }
    if (!any) continue;
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.8\" points=\"" << pts.str() << "\"/>\n";
  }

  // Legend inside the top-right corner of the plot area.
  out << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const double ly = mt + 16 + 16 * static_cast<double>(si);
    const double lx = w - mr - 150;
    out << "<line x1=\"" << lx << "\" y1=\"" << (ly - 4) << "\" x2=\""
        << (lx + 22) << "\" y2=\"" << (ly - 4) << "\" stroke=\""
        << kPalette[si % kPalette.size()] << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << (lx + 28) << "\" y=\"" << ly << "\">"
        << xml_escape(series[si].label) << "</text>\n";
  }
  out << "</g>\n</svg>\n";
  if (!out.good()) {
    throw Error(ErrorCode::IoError, "write failed for " + path.string());
  }
}

}  // namespace pamor
