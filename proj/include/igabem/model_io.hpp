#pragma once

#include <optional>
#include <string>
#include <vector>

#include "igabem/solver.hpp"

namespace igabem {

inline constexpr int kSchemaVersion = 1;

const char* library_version();

struct SurfaceSpec {
  std::string name;
  NurbsSurface surface;
};

struct PatchSpec {
  std::string surface;
  Refinement refine;
  std::array<ComponentBc, 3> bc;
};

struct GeneralSpec {
  std::string name;
  std::string bottom;
  std::string top;
  std::array<int, 3> grid{2, 2, 2};
  double E = 1.0;
  double nu = 0.0;
  SigmaMode sigma_mode = SigmaMode::Linear;
  std::array<int, 3> region_subdivision{1, 1, 1};
};

struct BarSpec {
  std::string name;
  Vec3 start;
  Vec3 end;
  double radius = 0.0;
  int points = 2;
  double E = 1.0;
  double nu = 0.0;
};

struct ProbeSpec {
  std::string id;
  Vec3 point;
};

/// Parameters a sweep may vary: "bar_points" (all bars) or "quadrature_order".
struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
};

struct OutputSpec {
  std::vector<ProbeSpec> probes;
  std::optional<SweepSpec> sweep;
  bool vtk = false;
};

/// Declarative model: raw surfaces plus directives; `build_model` applies them.
struct ModelFile {
  std::string name;
  std::string description;
  double E = 1.0;
  double nu = 0.0;
  std::vector<SurfaceSpec> surfaces;
  std::vector<PatchSpec> patches;
  std::vector<GeneralSpec> generals;
  std::vector<BarSpec> bars;
  SolveOptions solver;
  QuadratureOptions quadrature;
  OutputSpec output;
};

/// Parses and validates (including the watertight check). Throws ParseError
/// whose path is a JSON pointer to the offending item.
ModelFile parse_model(const std::string& text);
/// Reads a file; a missing or unreadable file is a ParseError naming the path.
ModelFile load_model(const std::string& path);

/// Canonical JSON text; parse_model(serialise_model(m)) reproduces m.
std::string serialise_model(const ModelFile& m);
/// SHA-256 (hex) of the canonical serialisation.
std::string model_hash(const ModelFile& m);

Model build_model(const ModelFile& m);

bool is_sweep_parameter(const std::string& name);
/// Copy of the model with one sweep parameter set. Throws ParseError for
/// unknown parameter names.
ModelFile with_parameter(const ModelFile& m, const std::string& parameter, double value);

struct GridRecord {
  std::string inclusion;
  bool bar = false;
  int index = 0;
  bool on_boundary = false;
  Vec3 position;
  Vec3 u;
  Vec6 strain;
  Vec6 sigma0;
  Vec6 stress;
  double bar_force = 0.0;
};

struct ProbeRecord {
  std::string id;
  Vec3 point;
  Vec3 u;
};

/// Everything written to results.json, plus the wall time which is kept
/// out of it so reruns are byte-identical.
struct ResultBundle {
  std::string model_name;
  std::string model_hash;
  std::string version;
  std::string method;
  double tol = 0.0;
  int max_iter = 0;
  int quadrature_order = 0;
  std::vector<std::pair<std::string, std::string>> overrides;
  int unknowns = 0;
  std::vector<double> x;
  std::vector<Vec3> node_position;
  std::vector<Vec3> node_displacement;
  std::vector<std::string> patch_names;
  std::vector<std::vector<Vec3>> traction;  // per patch control point
  std::vector<GridRecord> grid;
  std::vector<ProbeRecord> probes;
  int iterations = 0;
  bool converged = true;
  double residual = 0.0;
  std::vector<double> increments;
  double seconds = 0.0;
};

ResultBundle make_bundle(const ModelFile& file, const Model& model, const SystemMatrices& sys,
                         const SolveResult& res);

/// Text of results.json: fixed key order, 17 significant digits.
std::string results_json(const ResultBundle& b);
ResultBundle parse_results(const std::string& text);
ResultBundle read_results(const std::string& path);

std::string probes_csv(const ResultBundle& b);

struct SweepRow {
  double value = 0.0;
  std::vector<ProbeRecord> probes;
};

std::string convergence_csv(const std::string& parameter, const std::vector<SweepRow>& rows,
                            const std::string& model_hash);

/// Legacy VTK unstructured grid of the boundary with the displacement field.
std::string boundary_vtk(const Model& model, const ResultBundle& b, int samples = 6);

/// Writes results.json and probes.csv (and boundary.vtk when `vtk` is given)
/// into `dir`, creating it. Throws IoError naming the path.
void write_results(const ResultBundle& b, const std::string& dir, const Model* vtk = nullptr);
void write_text(const std::string& path, const std::string& text);

}  // namespace igabem
