// SPDX-License-Identifier: MIT
//
// pamor — command-line surface for the passive model reduction library.
//
//   pamor generate msd|poro ...   write a benchmark model as a manifest
//   pamor reduce ...              reduce one model, report error metrics
//   pamor sweep ...               reduce over a range of orders, CSV + SVG
//   pamor analyze ...             passivity certificates and Hankel curves
//
// Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O failure.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pamor/pamor.hpp"

namespace fs = std::filesystem;
using namespace pamor;

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

int exit_code_for(const Error& err) {
  switch (err.category()) {
    case ErrorCategory::Usage:
      return 1;
    case ErrorCategory::Io:
      return 3;
    case ErrorCategory::Numerical:
      break;
  }
  return 2;
}

// --output-dir flag beats PAMOR_OUTPUT_DIR beats the current directory.
// The directory is created when missing.
fs::path resolve_output_dir(const std::string& flag_value) {
  fs::path dir = fs::current_path();
  if (!flag_value.empty()) {
    dir = fs::path(flag_value);
  } else if (const char* env = std::getenv("PAMOR_OUTPUT_DIR"); env && *env) {
    dir = fs::path(env);
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::IoError,
                "cannot create output directory " + dir.string());
  }
  return dir;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Parallel difference G - Gr used for H-infinity error norms.
StateSpaceSystem difference_system(const StateSpaceSystem& g,
                                   const StateSpaceSystem& gr) {
  const Index n = g.n(), nr = gr.n();
  StateSpaceSystem d;
  d.A = Matrix::Zero(n + nr, n + nr);
  d.A.topLeftCorner(n, n) = g.A;
  d.A.bottomRightCorner(nr, nr) = gr.A;
  d.B = Matrix::Zero(n + nr, g.m());
  d.B.topRows(n) = g.B;
  d.B.bottomRows(nr) = gr.B;
  d.C = Matrix::Zero(g.p(), n + nr);
  d.C.leftCols(n) = g.C;
  d.C.rightCols(nr) = -gr.C;
  d.D = g.D - gr.D;
  return d;
}

// ---------------------------------------------------------------------------
// Model loading
// ---------------------------------------------------------------------------

// A model in working coordinates: descriptor inputs are folded to standard
// form via z = E x, structured (port-Hamiltonian) data rides along when the
// manifest provides it or the folded system admits it.
struct WorkModel {
  std::string name;
  StateSpaceSystem sys;
  std::optional<PhRepresentation> ph;
  Index original_n = 0;
  bool folded_descriptor = false;
  bool minimalized = false;
  Index minimal_kept = 0;
};

WorkModel load_model(const fs::path& manifest_path) {
  const LoadedModel loaded = read_manifest(manifest_path);
  WorkModel model;
  model.name = loaded.manifest.name;
  if (loaded.sys) {
    model.sys = *loaded.sys;
    model.original_n = model.sys.n();
    if (model.sys.E) {
      const StandardFormResult std_form = generalized_to_standard(model.sys);
      model.sys = std_form.sys;
      model.folded_descriptor = true;
      // The energy matrix E^{-1} solves the passivity LMI of the folded
      // system exactly when the descriptor model carries J-R structure with
      // collocated outputs; in that case a structured form is available.
      try {
        model.ph = ph_from_solution(model.sys, std_form.q_hamiltonian);
      } catch (const Error&) {
        // Not structurally passive in energy coordinates; proceed without.
      }
    } else if (loaded.ph) {
      model.ph = *loaded.ph;
    }
  } else if (loaded.ph) {
    model.ph = *loaded.ph;
    model.sys = loaded.ph->to_system();
    model.original_n = model.sys.n();
  } else {
    throw Error(ErrorCode::InvalidConfig,
                "manifest provides neither a state-space system (A, B, C) "
                "nor a structured form (J, R, Q, G)");
  }
  model.sys.validate();
  return model;
}

// Replace the model by its minimal realization: structure-preserving
// truncation when a structured form is present, balanced truncation
// otherwise.  Error metrics downstream are relative to this realization.
void minimalize(WorkModel& model, double tol) {
  if (model.ph) {
    PhTruncation cut = ph_minimal_realization(*model.ph, tol);
    if (cut.kept == model.sys.n()) return;
    model.ph = cut.ph;
    model.sys = cut.ph.to_system();
    model.minimalized = true;
    model.minimal_kept = cut.kept;
    return;
  }
  MinimalRealization cut = minimal_realization(model.sys, tol);
  if (cut.kept == model.sys.n()) return;
  model.sys = cut.sys;
  model.ph.reset();
  model.minimalized = true;
  model.minimal_kept = cut.kept;
}

// ---------------------------------------------------------------------------
// Method tokens
// ---------------------------------------------------------------------------

enum class Method { SpectralFactor, Irka, PhIrka, Prbt };
enum class Kind { Min, Max, Q, None };

struct MethodToken {
  Method method;
  Kind kind;  // None for methods that ignore the solution kind
};

Kind parse_kind(const std::string& text) {
  if (text == "min") return Kind::Min;
  if (text == "max") return Kind::Max;
  if (text == "q") return Kind::Q;
  throw Error(ErrorCode::InvalidConfig,
              "unknown solution kind '" + text + "' (expected min, max, q)");
}

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::Min:
      return "min";
    case Kind::Max:
      return "max";
    case Kind::Q:
      return "q";
    case Kind::None:
      break;
  }
  return "-";
}

// Per-method default solution kinds: an explicit --kind overrides both,
// otherwise the spectral factorization uses the minimal solution (the
// best-performing choice) and pH interpolation uses the energy matrix it is
// built around.
struct KindDefaults {
  Kind spectral = Kind::Min;
  Kind ph = Kind::Q;
};

KindDefaults kind_defaults(const std::string& kind_flag) {
  if (kind_flag.empty()) return {};
  const Kind k = parse_kind(kind_flag);
  return {k, k};
}

// A token is `method` or `method:kind`; `all` expands to the four methods
// with the per-method defaults applied to the ones that need a solution kind.
std::vector<MethodToken> parse_method_tokens(const std::string& text,
                                             const KindDefaults& defaults) {
  std::vector<MethodToken> tokens;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    if (item == "all") {
      tokens.push_back({Method::SpectralFactor, defaults.spectral});
      tokens.push_back({Method::Irka, Kind::None});
      tokens.push_back({Method::PhIrka, defaults.ph});
      tokens.push_back({Method::Prbt, Kind::None});
      continue;
    }
    std::string name = item;
    std::optional<Kind> explicit_kind;
    if (const auto colon = item.find(':'); colon != std::string::npos) {
      name = item.substr(0, colon);
      explicit_kind = parse_kind(item.substr(colon + 1));
    }
    const Kind kind = explicit_kind.value_or(
        name == "ph-irka" ? defaults.ph : defaults.spectral);
    if (name == "spectral-factor") {
      tokens.push_back({Method::SpectralFactor, kind});
    } else if (name == "irka") {
      tokens.push_back({Method::Irka, Kind::None});
    } else if (name == "ph-irka") {
      tokens.push_back({Method::PhIrka, kind});
    } else if (name == "prbt") {
      tokens.push_back({Method::Prbt, Kind::None});
    } else {
      throw Error(ErrorCode::InvalidConfig,
                  "unknown method '" + name +
                      "' (expected spectral-factor, irka, ph-irka, prbt)");
    }
  }
  if (tokens.empty()) {
    throw Error(ErrorCode::InvalidConfig, "no reduction method selected");
  }
  return tokens;
}

std::string token_label(const MethodToken& token) {
  std::string label;
  switch (token.method) {
    case Method::SpectralFactor:
      label = "spectral-factor";
      break;
    case Method::Irka:
      return "irka";
    case Method::PhIrka:
      label = "ph-irka";
      break;
    case Method::Prbt:
      return "prbt";
  }
  return label + "(" + kind_name(token.kind) + ")";
}

// ---------------------------------------------------------------------------
// Reduction engine shared by `reduce` and `sweep`
// ---------------------------------------------------------------------------

// Everything the per-(r, method) jobs read; prepared once, then immutable.
struct ReductionContext {
  const WorkModel* model = nullptr;
  double epsilon = -1.0;  // LMI regularization (negative selects the default)
  std::optional<KypExtremalPair> extremal;    // for kinds min/max and prbt
  std::optional<KypSolution> q_solution;      // structured form's Q as X
  std::optional<PhRepresentation> ph_min;     // pH built from X_min
  std::optional<PhRepresentation> ph_max;     // pH built from X_max
};

bool needs_extremal(const MethodToken& token) {
  if (token.method == Method::Prbt) return true;
  if (token.method == Method::SpectralFactor ||
      token.method == Method::PhIrka) {
    return token.kind == Kind::Min || token.kind == Kind::Max;
  }
  return false;
}

ReductionContext prepare_context(const WorkModel& model,
                                 const std::vector<MethodToken>& tokens,
                                 double epsilon) {
  ReductionContext ctx;
  ctx.model = &model;
  ctx.epsilon = epsilon;
  KypOptions opts;
  opts.epsilon = epsilon;
  bool want_extremal = false;
  bool want_q = false;
  bool want_ph_min = false, want_ph_max = false;
  for (const MethodToken& token : tokens) {
    want_extremal = want_extremal || needs_extremal(token);
    if (token.kind == Kind::Q && (token.method == Method::SpectralFactor ||
                                  token.method == Method::PhIrka)) {
      want_q = true;
    }
    if (token.method == Method::PhIrka && token.kind == Kind::Min)
      want_ph_min = true;
    if (token.method == Method::PhIrka && token.kind == Kind::Max)
      want_ph_max = true;
  }
  if (want_extremal) {
    ctx.extremal = solve_kyp_extremal(model.sys, opts);
    if (want_ph_min) {
      ctx.ph_min = ph_from_solution(model.sys, ctx.extremal->min.X);
    }
    if (want_ph_max) {
      ctx.ph_max = ph_from_solution(model.sys, ctx.extremal->max.X);
    }
  }
  if (want_q) {
    if (!model.ph) {
      throw Error(ErrorCode::InvalidConfig,
                  "solution kind 'q' needs a structured (port-Hamiltonian) "
                  "model; this manifest provides none");
    }
    ctx.q_solution = kyp_solution_from_X(model.sys, model.ph->Q);
  }
  return ctx;
}

struct ReductionOutcome {
  StateSpaceSystem rom;
  std::optional<PhRepresentation> rom_ph;
  double h2_error_abs = std::numeric_limits<double>::quiet_NaN();
  double hinf_error_abs = std::numeric_limits<double>::quiet_NaN();
  double bound_rhs = std::numeric_limits<double>::quiet_NaN();
  bool bound_holds = false;
  bool has_bound = false;
  double passivity_margin = std::numeric_limits<double>::quiet_NaN();
  bool margin_checked = false;
  bool passive = false;
  bool converged = true;
  double wall_time_s = 0.0;
};

const KypSolution& select_solution(const ReductionContext& ctx, Kind kind) {
  switch (kind) {
    case Kind::Min:
      return ctx.extremal->min;
    case Kind::Max:
      return ctx.extremal->max;
    case Kind::Q:
      return *ctx.q_solution;
    case Kind::None:
      break;
  }
  throw Error(ErrorCode::InvalidConfig,
              "method requires a solution kind (min, max, q)");
}

ReductionOutcome run_reduction(const ReductionContext& ctx,
                               const MethodToken& token, Index r,
                               const ReducerConfig& config) {
  const StateSpaceSystem& fom = ctx.model->sys;
  ReductionOutcome out;
  const auto start = std::chrono::steady_clock::now();

  switch (token.method) {
    case Method::SpectralFactor: {
      const KypSolution& sol = select_solution(ctx, token.kind);
      PassiveRomBundle bundle = reduce_passive(fom, sol, r, config);
      out.rom = bundle.rom;
      out.converged = bundle.inner_converged;
      out.h2_error_abs = h2_error(fom, bundle.rom);
      StateSpaceSystem factor{fom.A, fom.B, sol.factors.L, sol.factors.M, {}};
      const H2BoundReport bound =
          h2_bound(factor, bundle.rom_spectral, out.h2_error_abs);
      out.bound_rhs = bound.rhs;
      out.bound_holds = bound.holds;
      out.has_bound = true;
      try {
        out.rom_ph = ph_realize_rom(bundle);
      } catch (const Error&) {
        // Reduced LMI solution numerically rank-deficient; the unstructured
        // realization is still valid output.
      }
      break;
    }
    case Method::Irka: {
      RomResult res = irka(fom, r, config);
      out.rom = res.rom;
      out.converged = res.converged;
      out.h2_error_abs = h2_error(fom, res.rom);
      break;
    }
    case Method::PhIrka: {
      const PhRepresentation* ph = nullptr;
      if (token.kind == Kind::Q) {
        ph = &*ctx.model->ph;
      } else if (token.kind == Kind::Min) {
        ph = &*ctx.ph_min;
      } else if (token.kind == Kind::Max) {
        ph = &*ctx.ph_max;
      } else {
        throw Error(ErrorCode::InvalidConfig,
                    "ph-irka requires a solution kind (min, max, q)");
      }
      PhRomResult res = ph_irka(*ph, r, config);
      out.rom = res.rom_sys;
      out.rom_ph = res.rom;
      out.converged = res.converged;
      out.h2_error_abs = h2_error(fom, res.rom_sys);
      break;
    }
    case Method::Prbt: {
      PrbtResult res = prbt(fom, r, ctx.extremal->min.X, ctx.extremal->max.X);
      out.rom = res.rom;
      out.h2_error_abs = h2_error(fom, res.rom);
      break;
    }
  }

  out.hinf_error_abs = hinf_norm(difference_system(fom, out.rom));
  if (token.method != Method::Irka) {
    // Passivity-preserving methods must certify their claim per row.
    const PassivityReport report = is_passive_sampled(out.rom);
    out.margin_checked = true;
    out.passivity_margin = report.worst_margin;
    out.passive = report.passive;
  }
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

// CSV row in the reduce/sweep schema; `status` is appended by sweep only.
std::vector<std::string> csv_row(const MethodToken& token, Index r,
                                 const ReductionOutcome& out) {
  std::string method_name;
  switch (token.method) {
    case Method::SpectralFactor:
      method_name = "spectral-factor";
      break;
    case Method::Irka:
      method_name = "irka";
      break;
    case Method::PhIrka:
      method_name = "ph-irka";
      break;
    case Method::Prbt:
      method_name = "prbt";
      break;
  }
  return {std::to_string(r),
          method_name,
          kind_name(token.kind),
          format_double(out.h2_error_abs),
          format_double(out.hinf_error_abs),
          format_double(out.bound_rhs),
          format_double(out.wall_time_s)};
}

const std::vector<std::string> kCsvHeader = {
    "r",          "method",       "solution_kind", "h2_error",
    "hinf_error", "h2_bound_rhs", "wall_time_s"};

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateMsdArgs {
  MsdConfig cfg;
  std::string name = "msd";
  std::string output_dir;
};

int cmd_generate_msd(const GenerateMsdArgs& args) {
  const PhRepresentation ph = generate_msd(args.cfg);
  const StateSpaceSystem sys = ph.to_system();

  std::map<std::string, Matrix> matrices = {
      {"J", ph.J}, {"R", ph.R}, {"Q", ph.Q}, {"G", ph.G},
      {"A", sys.A}, {"B", sys.B}, {"C", sys.C}};
  std::map<std::string, std::string> params = {
      {"model", "msd"},
      {"n", std::to_string(args.cfg.n)},
      {"masses", format_double(args.cfg.masses)},
      {"stiffness", format_double(args.cfg.stiffness)},
      {"damping", format_double(args.cfg.damping)},
      {"inputs", std::to_string(args.cfg.inputs)}};

  const fs::path dir = resolve_output_dir(args.output_dir);
  const fs::path manifest = dir / (args.name + ".manifest");
  write_manifest(args.name, matrices, params, manifest);

  std::cout << "wrote " << manifest.string() << " (" << matrices.size()
            << " matrix files; D = 0 omitted, defaulted on read)\n";
  std::cout << "structural validation:\n";
  std::cout << "  n = " << sys.n() << ", m = " << sys.m() << "\n";
  std::cout << "  skew residual  |J + J^T|_F = "
            << fmt((ph.J + ph.J.transpose()).norm()) << "\n";
  std::cout << "  sym residuals  |R - R^T|_F = "
            << fmt((ph.R - ph.R.transpose()).norm())
            << ", |Q - Q^T|_F = " << fmt((ph.Q - ph.Q.transpose()).norm())
            << "\n";
  std::cout << "  structured-form invariants: pass (generator-certified, tol "
               "1e-12)\n";
  return 0;
}

struct GeneratePoroArgs {
  PoroConfig cfg;
  std::string name = "poro";
  std::string output_dir;
};

int cmd_generate_poro(const GeneratePoroArgs& args) {
  const PoroModel model = generate_poro(args.cfg);
  const StateSpaceSystem& sys = model.sys;

  std::map<std::string, Matrix> matrices = {
      {"A", sys.A}, {"B", sys.B}, {"C", sys.C}, {"E", *sys.E}};
  std::map<std::string, std::string> params = {
      {"model", "poro"},
      {"mesh_divisions", std::to_string(args.cfg.mesh_divisions)},
      {"mu", format_double(args.cfg.mu)},
      {"lambda", format_double(args.cfg.lambda)},
      {"rho", format_double(args.cfg.rho)},
      {"alpha", format_double(args.cfg.alpha)},
      {"inv_M", format_double(args.cfg.inv_m)},
      {"kappa_over_nu", format_double(args.cfg.kappa_over_nu)},
      {"eta", format_double(args.cfg.eta)},
      {"n", std::to_string(sys.n())}};

  const fs::path dir = resolve_output_dir(args.output_dir);
  const fs::path manifest = dir / (args.name + ".manifest");
  write_manifest(args.name, matrices, params, manifest);

  // E SPD is certified by the generator (Cholesky inside validate); report
  // the cheap structural residuals of the J - R - eta I split.
  const Matrix j_part = skew(model.J);
  std::cout << "wrote " << manifest.string()
            << " (4 matrix files; D = 0 omitted, defaulted on read)\n";
  std::cout << "structural validation:\n";
  std::cout << "  n = " << sys.n() << " (5 (N-1)^2 for N = "
            << args.cfg.mesh_divisions << "), m = " << sys.m() << "\n";
  std::cout << "  E symmetric positive definite: pass (generator-certified)\n";
  std::cout << "  skew residual  |J + J^T|_F = "
            << fmt((model.J + model.J.transpose()).norm()) << "\n";
  std::cout << "  damping split  |A - (J - R - eta I)|_F = "
            << fmt((sys.A - (j_part - model.R -
                             model.eta * Matrix::Identity(sys.n(), sys.n())))
                       .norm())
            << "\n";
  std::cout << "  collocation    |C - B^T|_F = "
            << fmt((sys.C - sys.B.transpose()).norm()) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// reduce
// ---------------------------------------------------------------------------

struct ReduceArgs {
  std::string model_path;
  std::string method = "spectral-factor";
  std::string kind;  // empty: per-method default (spectral-factor:min, ph-irka:q)
  Index r = 0;
  ReducerConfig config;
  double epsilon = -1.0;
  bool no_minimal = false;
  double minimal_tol = 1e-6;
  std::string name;  // defaults to "<model>_rom"
  std::string output_dir;
};

int cmd_reduce(const ReduceArgs& args) {
  WorkModel model = load_model(args.model_path);
  if (!args.no_minimal) minimalize(model, args.minimal_tol);

  const MethodToken token =
      parse_method_tokens(args.method, kind_defaults(args.kind)).at(0);
  if (args.r < 1 || args.r >= model.sys.n()) {
    throw Error(ErrorCode::InvalidConfig,
                "reduced order r must satisfy 1 <= r < n = " +
                    std::to_string(model.sys.n()) + ", got " +
                    std::to_string(args.r));
  }

  const ReductionContext ctx = prepare_context(model, {token}, args.epsilon);
  const ReductionOutcome out = run_reduction(ctx, token, args.r, args.config);

  const double g_h2 = h2_norm(model.sys);
  std::cout << "model " << model.name << ": n = " << model.original_n;
  if (model.folded_descriptor) std::cout << " (descriptor folded to z = E x)";
  if (model.minimalized) {
    std::cout << ", minimal realization kept " << model.minimal_kept
              << " states";
  }
  std::cout << "\n";
  if (model.minimalized) {
    std::cout << "error metrics are relative to the minimal realization\n";
  }
  std::cout << "method " << token_label(token) << ", r = " << args.r
            << ", seed = " << args.config.seed << ", restarts = "
            << args.config.restarts << "\n";
  if (!out.converged) {
    std::cout << "note: inner iteration stopped at the iteration cap without "
                 "meeting the shift tolerance\n";
  }
  std::cout << "  |G - Gr|_H2   = " << fmt(out.h2_error_abs) << "  (relative "
            << fmt(out.h2_error_abs / std::max(g_h2, 1e-300)) << ")\n";
  std::cout << "  |G - Gr|_Hinf = " << fmt(out.hinf_error_abs) << "\n";
  if (out.has_bound) {
    std::cout << "  spectral-factor H2 bound: |G - Gr|_H2 <= "
              << fmt(out.bound_rhs) << "  ("
              << (out.bound_holds ? "holds" : "VIOLATED") << ")\n";
  }
  if (out.margin_checked) {
    std::cout << "  sampled passivity margin of the ROM: "
              << fmt(out.passivity_margin) << "  ("
              << (out.passive ? "passive" : "NOT PASSIVE") << ")\n";
  }
  std::cout << "  wall time: " << fmt(out.wall_time_s) << " s\n";

  const fs::path dir = resolve_output_dir(args.output_dir);
  const std::string rom_name =
      args.name.empty() ? model.name + "_rom" : args.name;

  std::map<std::string, Matrix> matrices = {{"A", out.rom.A},
                                            {"B", out.rom.B},
                                            {"C", out.rom.C},
                                            {"D", out.rom.D}};
  if (out.rom_ph) {
    matrices["J"] = out.rom_ph->J;
    matrices["R"] = out.rom_ph->R;
    matrices["Q"] = out.rom_ph->Q;
    matrices["G"] = out.rom_ph->G;
    matrices["P"] = out.rom_ph->P;
    matrices["S"] = out.rom_ph->S;
    matrices["N"] = out.rom_ph->N;
  }
  std::map<std::string, std::string> params = {
      {"source", model.name},
      {"method", token_label(token)},
      {"r", std::to_string(args.r)},
      {"seed", std::to_string(args.config.seed)}};
  const fs::path manifest = dir / (rom_name + ".manifest");
  write_manifest(rom_name, matrices, params, manifest);

  CsvTable table;
  table.header = kCsvHeader;
  table.rows.push_back(csv_row(token, args.r, out));
  const fs::path csv_path = dir / (rom_name + ".csv");
  write_csv(table, csv_path);
  std::cout << "wrote " << manifest.string() << " and " << csv_path.string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string model_path;
  std::string methods = "all";
  std::string kind;  // empty: per-method default (spectral-factor:min, ph-irka:q)
  Index r_min = 2;
  Index r_max = 20;
  Index r_step = 2;
  unsigned jobs = 0;  // 0 selects hardware_concurrency
  ReducerConfig config;
  double epsilon = -1.0;
  bool no_minimal = false;
  double minimal_tol = 1e-6;
  std::string name;  // defaults to "<model>_sweep"
  std::string output_dir;
};

int cmd_sweep(const SweepArgs& args) {
  if (args.r_min < 1 || args.r_step < 1 || args.r_max < args.r_min) {
    throw Error(ErrorCode::InvalidConfig,
                "order range needs 1 <= r-min <= r-max and r-step >= 1");
  }
  WorkModel model = load_model(args.model_path);
  if (!args.no_minimal) minimalize(model, args.minimal_tol);

  std::vector<Index> orders;
  for (Index r = args.r_min; r <= args.r_max; r += args.r_step) {
    if (r < model.sys.n()) orders.push_back(r);
  }
  if (orders.empty()) {
    throw Error(ErrorCode::InvalidConfig,
                "order range is empty after clipping to r < n = " +
                    std::to_string(model.sys.n()));
  }

  const std::vector<MethodToken> tokens =
      parse_method_tokens(args.methods, kind_defaults(args.kind));
  const ReductionContext ctx = prepare_context(model, tokens, args.epsilon);

  struct Job {
    MethodToken token;
    Index r;
  };
  std::vector<Job> jobs;
  for (const Index r : orders) {
    for (const MethodToken& token : tokens) jobs.push_back({token, r});
  }

  struct SlotResult {
    std::vector<std::string> row;
    std::string label;
    Index r;
    double h2 = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
  };
  std::vector<SlotResult> results(jobs.size());

  // Bounded worker pool over an atomic job cursor; every job writes only its
  // own slot, the shared context is read-only, so rows stay deterministic
  // for a fixed seed regardless of scheduling.
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(
      args.jobs == 0 ? hw : args.jobs, static_cast<unsigned>(jobs.size()));
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      SlotResult& slot = results[i];
      slot.label = token_label(job.token);
      slot.r = job.r;
      try {
        const ReductionOutcome out =
            run_reduction(ctx, job.token, job.r, args.config);
        slot.row = csv_row(job.token, job.r, out);
        if (out.margin_checked && !out.passive) {
          slot.row.push_back("nonpassive margin=" +
                             format_double(out.passivity_margin));
        } else {
          slot.row.push_back("ok");
          slot.ok = true;
          slot.h2 = out.h2_error_abs;
        }
      } catch (const Error& err) {
        ReductionOutcome empty;
        slot.row = csv_row(job.token, job.r, empty);
        slot.row.push_back(std::string("error: ") +
                           error_code_name(err.code()));
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < workers; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  CsvTable table;
  table.header = kCsvHeader;
  table.header.push_back("status");
  for (const SlotResult& slot : results) table.rows.push_back(slot.row);

  const fs::path dir = resolve_output_dir(args.output_dir);
  const std::string out_name =
      args.name.empty() ? model.name + "_sweep" : args.name;
  const fs::path csv_path = dir / (out_name + ".csv");
  write_csv(table, csv_path);

  // One H2-error series per method token, log-scale y, skipping failed rows.
  std::vector<PlotSeries> series;
  for (const MethodToken& token : tokens) {
    PlotSeries s;
    s.label = token_label(token);
    for (const SlotResult& slot : results) {
      if (slot.ok && slot.label == s.label && slot.h2 > 0.0) {
        s.x.push_back(static_cast<double>(slot.r));
        s.y.push_back(slot.h2);
      }
    }
    if (!s.x.empty()) series.push_back(std::move(s));
  }
  PlotOptions plot;
  plot.title = model.name + ": H2 error vs reduced order";
  plot.xlabel = "reduced order r";
  plot.ylabel = "|G - Gr|_H2";
  plot.logy = true;
  const fs::path svg_path = dir / (out_name + ".svg");
  if (!series.empty()) write_svg_plot(series, plot, svg_path);

  std::size_t ok_rows = 0;
  for (const SlotResult& slot : results) ok_rows += slot.ok ? 1u : 0u;
  std::cout << "sweep: " << results.size() << " rows (" << ok_rows
            << " ok) across " << orders.size() << " orders x "
            << tokens.size() << " methods, " << workers << " worker(s)\n";
  std::cout << "wrote " << csv_path.string();
  if (!series.empty()) std::cout << " and " << svg_path.string();
  std::cout << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string model_path;
  std::string kinds = "min,q,max";
  double epsilon = -1.0;
  bool no_minimal = false;
  double minimal_tol = 1e-6;
  std::string name;  // defaults to "<model>_analysis"
  std::string output_dir;
};

int cmd_analyze(const AnalyzeArgs& args) {
  WorkModel model = load_model(args.model_path);
  if (!args.no_minimal) minimalize(model, args.minimal_tol);
  const StateSpaceSystem& sys = model.sys;

  std::cout << "model " << model.name << ": n = " << model.original_n;
  if (model.minimalized) {
    std::cout << " (minimal realization kept " << model.minimal_kept << ")";
  }
  std::cout << ", m = " << sys.m() << "\n";

  const PassivityReport passivity = is_passive_sampled(sys);
  std::cout << "sampled passivity margin: " << fmt(passivity.worst_margin)
            << " at w = " << fmt(passivity.worst_frequency) << " ("
            << (passivity.passive ? "passive" : "NOT PASSIVE") << ")\n";
  if (!passivity.passive) {
    std::cerr << "analysis aborted: the model fails the sampled passivity "
                 "check\n";
    return 2;
  }

  std::vector<Kind> kinds;
  {
    std::stringstream stream(args.kinds);
    std::string item;
    while (std::getline(stream, item, ',')) {
      if (!item.empty()) kinds.push_back(parse_kind(item));
    }
  }
  if (kinds.empty()) {
    throw Error(ErrorCode::InvalidConfig, "no solution kinds requested");
  }

  KypOptions opts;
  opts.epsilon = args.epsilon;
  const KypExtremalPair pair = solve_kyp_extremal(sys, opts);

  bool all_certified = true;
  std::vector<KypSolution> solutions;
  std::vector<std::string> labels;
  for (const Kind kind : kinds) {
    std::optional<KypSolution> sol;
    switch (kind) {
      case Kind::Min:
        sol = pair.min;
        break;
      case Kind::Max:
        sol = pair.max;
        break;
      case Kind::Q:
        if (!model.ph) {
          std::cout << "kind q: skipped (no structured form in the model)\n";
          continue;
        }
        sol = kyp_solution_from_X(sys, model.ph->Q);
        break;
      case Kind::None:
        continue;
    }
    const KypCertificate cert = verify_kyp(sys, *sol);
    all_certified = all_certified && cert.ok;
    std::cout << "kind " << kind_name(kind) << ": "
              << (cert.ok ? "certified" : "CERTIFICATION FAILED")
              << "  min_eig_rel = " << fmt(cert.min_eig_rel)
              << ", factor_error = " << fmt(cert.factor_error)
              << ", popov_error = " << fmt(cert.popov_error) << "\n";
    StateSpaceSystem factor{sys.A, sys.B, sol->factors.L, sol->factors.M, {}};
    std::cout << "         bound components: |H|_Hinf = "
              << fmt(hinf_norm(factor)) << "\n";
    solutions.push_back(std::move(*sol));
    labels.push_back(kind_name(kind));
  }
  std::cout << "bound components: |G|_H2 = " << fmt(h2_norm(sys)) << "\n";

  if (solutions.empty()) {
    throw Error(ErrorCode::InvalidConfig,
                "no admissible solution kinds to analyze");
  }

  const HankelOrderingReport ordering = hankel_ordering_check(sys, solutions);
  std::cout << "characteristic-value ordering vs '" << labels.front()
            << "': " << (ordering.ok ? "holds" : "VIOLATED")
            << " (worst gap " << fmt(ordering.worst_gap) << ")\n";

  const Vector fom_hsv = hankel_singular_values(sys);

  CsvTable table;
  table.header = {"k", "hsv_fom"};
  for (const std::string& label : labels) table.header.push_back("sigma_" + label);
  for (Index k = 0; k < sys.n(); ++k) {
    std::vector<std::string> row = {std::to_string(k + 1),
                                    format_double(fom_hsv(k))};
    for (const Vector& sigma : ordering.sigma) {
      row.push_back(format_double(sigma(k)));
    }
    table.rows.push_back(row);
  }

  const fs::path dir = resolve_output_dir(args.output_dir);
  const std::string out_name =
      args.name.empty() ? model.name + "_analysis" : args.name;
  const fs::path csv_path = dir / (out_name + "_hankel.csv");
  write_csv(table, csv_path);

  std::vector<PlotSeries> series;
  auto add_series = [&](const std::string& label, const Vector& values) {
    PlotSeries s;
    s.label = label;
    for (Index k = 0; k < values.size(); ++k) {
      if (values(k) > 0.0) {
        s.x.push_back(static_cast<double>(k + 1));
        s.y.push_back(values(k));
      }
    }
    if (!s.x.empty()) series.push_back(std::move(s));
  };
  add_series("fom hsv", fom_hsv);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    add_series("sigma(" + labels[j] + ")", ordering.sigma[j]);
  }
  PlotOptions plot;
  plot.title = model.name + ": characteristic values per solution kind";
  plot.xlabel = "index k";
  plot.ylabel = "sigma_k";
  plot.logy = true;
  const fs::path svg_path = dir / (out_name + "_hankel.svg");
  write_svg_plot(series, plot, svg_path);
  std::cout << "wrote " << csv_path.string() << " and " << svg_path.string()
            << "\n";

  if (!all_certified) {
    std::cerr << "analysis found uncertified solutions\n";
    return 2;
  }
  return ordering.ok ? 0 : 2;
}

// ---------------------------------------------------------------------------
// Flag wiring
// ---------------------------------------------------------------------------

void add_reducer_flags(CLI::App* cmd, ReducerConfig& config, double& epsilon) {
  cmd->add_option("--seed", config.seed, "base random seed (default 0)");
  cmd->add_option("--restarts", config.restarts,
                  "independent random restarts, best H2 error wins");
  cmd->add_option("--max-iters", config.max_iters,
                  "inner iteration cap per restart");
  cmd->add_option("--conv-tol", config.conv_tol,
                  "relative shift-change convergence tolerance");
  cmd->add_option("--epsilon", epsilon,
                  "LMI feedthrough regularization (negative = default "
                  "1e-12 * max(1, |D + D^T|))");
}

void add_minimal_flags(CLI::App* cmd, bool& no_minimal, double& minimal_tol) {
  cmd->add_flag("--no-minimal", no_minimal,
                "work on the model as loaded instead of its minimal "
                "realization");
  cmd->add_option("--minimal-tol", minimal_tol,
                  "relative truncation tolerance for the minimal "
                  "realization (default 1e-6)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pamor: passivity-preserving model reduction via spectral factors"};
  app.require_subcommand(1);

  GenerateMsdArgs msd_args;
  GeneratePoroArgs poro_args;
  ReduceArgs reduce_args;
  SweepArgs sweep_args;
  AnalyzeArgs analyze_args;
  int rc = 0;

  CLI::App* generate =
      app.add_subcommand("generate", "write a benchmark model manifest");
  generate->require_subcommand(1);

  CLI::App* msd = generate->add_subcommand(
      "msd", "mass-spring-damper chain in energy coordinates");
  msd->add_option("--n", msd_args.cfg.n, "even state dimension (default 1000)");
  msd->add_option("--masses", msd_args.cfg.masses, "cell mass (default 4)");
  msd->add_option("--stiffness", msd_args.cfg.stiffness,
                  "spring stiffness (default 4)");
  msd->add_option("--damping", msd_args.cfg.damping,
                  "damper constant (default 1)");
  msd->add_option("--inputs", msd_args.cfg.inputs,
                  "forces on the first masses (default 2)");
  msd->add_option("--name", msd_args.name, "output base name (default msd)");
  msd->add_option("-o,--output-dir", msd_args.output_dir,
                  "output directory (default $PAMOR_OUTPUT_DIR or .)");
  msd->callback([&] { rc = cmd_generate_msd(msd_args); });

  CLI::App* poro = generate->add_subcommand(
      "poro", "poroelastic plate model with artificial damping");
  poro->add_option("--mesh", poro_args.cfg.mesh_divisions,
                   "grid divisions per side, n = 5 (mesh-1)^2 (default 15)");
  poro->add_option("--mu", poro_args.cfg.mu, "shear modulus (default 12)");
  poro->add_option("--lambda", poro_args.cfg.lambda,
                   "first Lame parameter (default 6)");
  poro->add_option("--rho", poro_args.cfg.rho, "density (default 1e-3)");
  poro->add_option("--alpha", poro_args.cfg.alpha,
                   "coupling coefficient (default 0.79)");
  poro->add_option("--inv-M", poro_args.cfg.inv_m,
                   "inverse Biot modulus (default 7.80e3)");
  poro->add_option("--kappa-over-nu", poro_args.cfg.kappa_over_nu,
                   "permeability over viscosity (default 633.33)");
  poro->add_option("--eta", poro_args.cfg.eta,
                   "artificial damping shift (default 1e-3)");
  poro->add_option("--name", poro_args.name, "output base name (default poro)");
  poro->add_option("-o,--output-dir", poro_args.output_dir,
                   "output directory (default $PAMOR_OUTPUT_DIR or .)");
  poro->callback([&] { rc = cmd_generate_poro(poro_args); });

  CLI::App* reduce =
      app.add_subcommand("reduce", "reduce one model and report error metrics");
  reduce->add_option("-m,--model", reduce_args.model_path, "model manifest")
      ->required();
  reduce->add_option("--method", reduce_args.method,
                     "spectral-factor | irka | ph-irka | prbt");
  reduce->add_option("--kind", reduce_args.kind,
                     "LMI solution kind: min | max | q (default: min for "
                     "spectral-factor, q for ph-irka; ignored by irka and "
                     "prbt)");
  reduce->add_option("-r,--order", reduce_args.r, "reduced order")->required();
  add_reducer_flags(reduce, reduce_args.config, reduce_args.epsilon);
  add_minimal_flags(reduce, reduce_args.no_minimal, reduce_args.minimal_tol);
  reduce->add_option("--name", reduce_args.name,
                     "output base name (default <model>_rom)");
  reduce->add_option("-o,--output-dir", reduce_args.output_dir,
                     "output directory (default $PAMOR_OUTPUT_DIR or .)");
  reduce->callback([&] { rc = cmd_reduce(reduce_args); });

  CLI::App* sweep = app.add_subcommand(
      "sweep", "reduce across an order range, write CSV and SVG");
  sweep->add_option("-m,--model", sweep_args.model_path, "model manifest")
      ->required();
  sweep->add_option("--methods", sweep_args.methods,
                    "comma list of method[:kind] tokens, or 'all'");
  sweep->add_option("--kind", sweep_args.kind,
                    "solution kind override for kinded methods (default: min "
                    "for spectral-factor, q for ph-irka)");
  sweep->add_option("--r-min", sweep_args.r_min, "smallest order (default 2)");
  sweep->add_option("--r-max", sweep_args.r_max, "largest order (default 20)");
  sweep->add_option("--r-step", sweep_args.r_step, "order step (default 2)");
  sweep->add_option("-j,--jobs", sweep_args.jobs,
                    "worker threads (default: hardware concurrency)");
  add_reducer_flags(sweep, sweep_args.config, sweep_args.epsilon);
  add_minimal_flags(sweep, sweep_args.no_minimal, sweep_args.minimal_tol);
  sweep->add_option("--name", sweep_args.name,
                    "output base name (default <model>_sweep)");
  sweep->add_option("-o,--output-dir", sweep_args.output_dir,
                    "output directory (default $PAMOR_OUTPUT_DIR or .)");
  sweep->callback([&] { rc = cmd_sweep(sweep_args); });

  CLI::App* analyze = app.add_subcommand(
      "analyze", "passivity certificates and characteristic-value curves");
  analyze->add_option("-m,--model", analyze_args.model_path, "model manifest")
      ->required();
  analyze->add_option("--kinds", analyze_args.kinds,
                      "comma list of solution kinds (default min,q,max)");
  analyze->add_option("--epsilon", analyze_args.epsilon,
                      "LMI feedthrough regularization (negative = default)");
  add_minimal_flags(analyze, analyze_args.no_minimal,
                    analyze_args.minimal_tol);
  analyze->add_option("--name", analyze_args.name,
                      "output base name (default <model>_analysis)");
  analyze->add_option("-o,--output-dir", analyze_args.output_dir,
                      "output directory (default $PAMOR_OUTPUT_DIR or .)");
  analyze->callback([&] { rc = cmd_analyze(analyze_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const Error& err) {
    std::cerr << "pamor: " << err.what() << "\n";
    return exit_code_for(err);
  } catch (const std::exception& ex) {
    std::cerr << "pamor: unexpected failure: " << ex.what() << "\n";
    return 2;
  }
  return rc;
}
