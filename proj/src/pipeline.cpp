#include "igabem/pipeline.hpp"

#include <chrono>
#include <cstdio>

#include "igabem/error.hpp"

namespace igabem {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ModelFile apply_overrides(const ModelFile& file, const RunOverrides& o,
                          std::vector<std::pair<std::string, std::string>>* record) {
  ModelFile f = file;
  auto note = [&](const char* k, const std::string& v) {
    if (record) record->emplace_back(k, v);
  };
  if (o.method) {
    f.solver.method = *o.method;
    note("method", to_string(*o.method));
  }
  if (o.tol) {
    f.solver.tol = *o.tol;
    note("tol", g17(*o.tol));
  }
  if (o.max_iter) {
    f.solver.max_iter = *o.max_iter;
    note("max_iter", std::to_string(*o.max_iter));
  }
  if (o.quadrature_order) {
    f = with_parameter(f, "quadrature_order", *o.quadrature_order);
    note("quadrature_order", std::to_string(*o.quadrature_order));
  }
  validate(f.solver);
  return f;
}

RunOutput run_model(const ModelFile& file, const RunOverrides& overrides) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutput out;
  std::vector<std::pair<std::string, std::string>> record;
  out.file = apply_overrides(file, overrides, &record);
  out.model = build_model(out.file);
  try {
    out.sys = assemble(out.model, {overrides.threads});
  } catch (const AssemblyError&) {
    throw;
  } catch (const Error& e) {
    throw AssemblyError(e.what());
  }
  try {
    out.result = solve(out.sys, out.file.solver);
    out.bundle = make_bundle(out.file, out.model, out.sys, out.result);
  } catch (const SolveError&) {
    throw;
  } catch (const Error& e) {
    throw SolveError(e.what());
  }
  out.bundle.model_hash = model_hash(file);  // the input model; overrides listed separately
  out.bundle.overrides = record;
  out.bundle.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::vector<SweepRow> run_sweep(const ModelFile& file, const std::string& parameter, const std::vector<double>& values,
                                const RunOverrides& overrides) {
  if (!is_sweep_parameter(parameter))
    throw ParseError("/output/sweep/parameter", "unknown sweep parameter '" + parameter + "' (bar_points, quadrature_order)");
  std::vector<SweepRow> rows;
  for (double v : values) {
    const auto run = run_model(with_parameter(file, parameter, v), overrides);
    rows.push_back({v, run.bundle.probes});
  }
  return rows;
}

}  // namespace igabem
