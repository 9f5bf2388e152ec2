#pragma once

#include <optional>
#include <string>
#include <vector>

#include "igabem/model_io.hpp"

namespace igabem {

struct RunOverrides {
  std::optional<SolveMethod> method;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<int> quadrature_order;
  int threads = 0;  // not part of the results: any count gives the same numbers
};

/// Applies overrides to a copy of the model and lists them for provenance.
ModelFile apply_overrides(const ModelFile& file, const RunOverrides& o,
                          std::vector<std::pair<std::string, std::string>>* record = nullptr);

struct RunOutput {
  ModelFile file;
  Model model;
  SystemMatrices sys;
  SolveResult result;
  ResultBundle bundle;
};

/// Build, assemble, solve and collect results. Geometry and integration
/// failures surface as AssemblyError, solver failures as SolveError.
RunOutput run_model(const ModelFile& file, const RunOverrides& overrides = {});

/// One solve per value of a sweep parameter, recording the probes.
std::vector<SweepRow> run_sweep(const ModelFile& file, const std::string& parameter, const std::vector<double>& values,
                                const RunOverrides& overrides = {});

}  // namespace igabem
