#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "igabem/error.hpp"
#include "igabem/pipeline.hpp"
#include "igabem/verify.hpp"
#include "json.hpp"

namespace {

using namespace igabem;
using json = nlohmann::ordered_json;

enum Exit { kOk = 0, kVerifyFailed = 1, kParse = 2, kAssembly = 3, kSolve = 4, kIo = 5 };

struct Common {
  std::string model;
  std::string out = "out";
  std::string method;
  double tol = 0.0;
  int max_iter = 0;
  int quadrature_order = 0;
  int threads = 0;
  bool json = false;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("igabem");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("IGABEM_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only accept it when asked for.
    if (level != spdlog::level::off || std::string(env) == "off")
      spdlog::set_level(level);
    else
      spdlog::warn("IGABEM_LOG='{}' is not a log level; using info", env);
  }
}

RunOverrides overrides(const Common& c) {
  RunOverrides o;
  if (!c.method.empty()) o.method = parse_method(c.method);
  if (c.tol != 0.0) o.tol = c.tol;
  if (c.max_iter != 0) o.max_iter = c.max_iter;
  if (c.quadrature_order != 0) o.quadrature_order = c.quadrature_order;
  o.threads = c.threads;
  return o;
}

void add_overrides(CLI::App* sub, Common& c) {
  sub->add_option("--method", c.method, "Override the solve method (onestep, coupled, newton)");
  sub->add_option("--tol", c.tol, "Override the Newton tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", c.max_iter, "Override the Newton iteration cap")->check(CLI::PositiveNumber);
  sub->add_option("--quadrature-order", c.quadrature_order, "Override the base Gauss order")
      ->check(CLI::PositiveNumber);
  sub->add_option("--threads", c.threads, "Worker threads for assembly (0 = available parallelism)")
      ->check(CLI::NonNegativeNumber);
}

int cmd_solve(const Common& c, bool vtk) {
  const auto file = load_model(c.model);
  const auto o = overrides(c);
  apply_overrides(file, o);  // reject bad overrides before any work
  spdlog::info("solving '{}' ({} patches, {} general, {} linear inclusions)", file.name, file.patches.size(),
               file.generals.size(), file.bars.size());
  const auto run = run_model(file, o);
  spdlog::info("{} unknowns, {} grid points, method {}, {:.3f} s", run.bundle.unknowns, run.sys.grid.size(),
               run.bundle.method, run.bundle.seconds);
  write_results(run.bundle, c.out, (vtk || run.file.output.vtk) ? &run.model : nullptr);
  spdlog::info("results written to {}", c.out);
  if (c.json) {
    json j;
    j["status"] = "ok";
    j["model_hash"] = run.bundle.model_hash;
    j["unknowns"] = run.bundle.unknowns;
    j["method"] = run.bundle.method;
    j["iterations"] = run.bundle.iterations;
    j["residual"] = run.bundle.residual;
    j["seconds"] = run.bundle.seconds;
    j["out"] = c.out;
    json probes = json::array();
    for (const auto& p : run.bundle.probes) probes.push_back({{"id", p.id}, {"u", {p.u[0], p.u[1], p.u[2]}}});
    j["probes"] = probes;
    std::cout << j.dump() << '\n';
  } else {
    for (const auto& p : run.bundle.probes)
      std::printf("%s: u = (%.10g, %.10g, %.10g)\n", p.id.c_str(), p.u[0], p.u[1], p.u[2]);
  }
  return kOk;
}

int cmd_sweep(const Common& c, std::string parameter, std::vector<double> values) {
  const auto file = load_model(c.model);
  const auto o = overrides(c);
  apply_overrides(file, o);
  if (parameter.empty() && file.output.sweep) parameter = file.output.sweep->parameter;
  if (values.empty() && file.output.sweep) values = file.output.sweep->values;
  if (parameter.empty()) throw ParseError("/output/sweep", "no sweep parameter given on the command line or in the model");
  if (!is_sweep_parameter(parameter))
    throw ParseError("/output/sweep/parameter", "unknown sweep parameter '" + parameter + "' (bar_points, quadrature_order)");
  if (values.empty()) throw ParseError("/output/sweep/values", "no sweep values");
  std::vector<SweepRow> rows;
  for (double v : values) {
    spdlog::info("{} = {}", parameter, v);
    auto r = run_sweep(file, parameter, {v}, o);
    rows.push_back(std::move(r.front()));
  }
  const std::string csv = convergence_csv(parameter, rows, model_hash(file));
  std::error_code ec;
  std::filesystem::create_directories(c.out, ec);
  if (ec) throw IoError("cannot create directory '" + c.out + "': " + ec.message());
  const auto path = (std::filesystem::path(c.out) / "convergence.csv").string();
  write_text(path, csv);
  spdlog::info("{} rows written to {}", rows.size(), path);
  if (c.json) {
    json j;
    j["status"] = "ok";
    j["parameter"] = parameter;
    json out = json::array();
    for (const auto& r : rows) {
      json pr = json::array();
      for (const auto& p : r.probes) pr.push_back({{"id", p.id}, {"u", {p.u[0], p.u[1], p.u[2]}}});
      out.push_back({{"value", r.value}, {"probes", pr}});
    }
    j["rows"] = out;
    j["file"] = path;
    std::cout << j.dump() << '\n';
  } else {
    std::cout << csv;
  }
  return kOk;
}

int cmd_verify(bool as_json, double perturb) {
  VerifyOptions o;
  o.kernel_constant_scale = perturb;
  if (perturb != 1.0) spdlog::warn("kernel constant perturbed by factor {} for the analytic bar integrals", perturb);
  const auto reports = run_verification(o);
  bool all = true;
  json rows = json::array();
  if (!as_json) std::printf("%-38s %-6s %-12s %-12s %s\n", "check", "result", "measured", "tolerance", "detail");
  for (const auto& r : reports) {
    all = all && r.pass;
    if (as_json)
      rows.push_back({{"id", r.id}, {"pass", r.pass}, {"measured", r.measured}, {"reference", r.reference},
                      {"tolerance", r.tolerance}, {"detail", r.detail}});
    else
      std::printf("%-38s %-6s %-12.4g %-12.4g %s\n", r.id.c_str(), r.pass ? "PASS" : "FAIL", r.measured, r.tolerance,
                  r.detail.c_str());
  }
  if (as_json) std::cout << json{{"status", all ? "pass" : "fail"}, {"checks", rows}}.dump() << '\n';
  return all ? kOk : kVerifyFailed;
}

int cmd_info(const Common& c) {
  const auto file = load_model(c.model);
  const auto model = build_model(file);
  DofMap dofs;
  GridLayout grid;
  try {
    check_watertight(model.patches);
    dofs = build_dof_map(model.patches);
    grid = make_grid_layout(model);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw AssemblyError(e.what());
  }
  json j;
  j["name"] = file.name;
  j["description"] = file.description;
  j["model_hash"] = model_hash(file);
  j["version"] = library_version();
  j["patches"] = file.patches.size();
  j["nodes"] = dofs.nodes.size();
  j["unknowns"] = dofs.unknowns;
  j["general_inclusions"] = file.generals.size();
  j["linear_inclusions"] = file.bars.size();
  j["grid_points"] = grid.size();
  j["method"] = to_string(file.solver.method);
  if (c.json) {
    std::cout << j.dump() << '\n';
  } else {
    for (const auto& [k, v] : j.items()) std::cout << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  }
  return kOk;
}

int guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    spdlog::error("parse error: {}", e.what());
    return kParse;
  } catch (const DomainError& e) {
    spdlog::error("invalid option: {}", e.what());
    return kParse;
  } catch (const GeometryError& e) {
    spdlog::error("geometry error: {}", e.what());
    return kAssembly;
  } catch (const AssemblyError& e) {
    spdlog::error("assembly error: {}", e.what());
    return kAssembly;
  } catch (const SolveError& e) {
    spdlog::error("solve error: {}", e.what());
    return kSolve;
  } catch (const IoError& e) {
    spdlog::error("I/O error: {}", e.what());
    return kIo;
  } catch (const std::exception& e) {
    spdlog::error("error: {}", e.what());
    return kSolve;
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Isogeometric BEM solver for elastic domains with inclusions"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);

  Common solve_opts, sweep_opts, info_opts;
  bool vtk = false;
  auto* solve = app.add_subcommand("solve", "Solve a model and write results");
  solve->add_option("model", solve_opts.model, "Model file (JSON)")->required();
  solve->add_option("-o,--out", solve_opts.out, "Output directory");
  solve->add_flag("--vtk", vtk, "Also write boundary.vtk");
  solve->add_flag("--json", solve_opts.json, "Machine-readable summary on stdout");
  add_overrides(solve, solve_opts);

  std::string parameter;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Solve once per parameter value and write convergence.csv");
  sweep->add_option("model", sweep_opts.model, "Model file (JSON)")->required();
  sweep->add_option("-o,--out", sweep_opts.out, "Output directory");
  sweep->add_option("-p,--parameter", parameter, "bar_points or quadrature_order (default: from the model)");
  sweep->add_option("--values", values, "Comma-separated values (default: from the model)")->delimiter(',');
  sweep->add_flag("--json", sweep_opts.json, "Machine-readable rows on stdout");
  add_overrides(sweep, sweep_opts);

  bool verify_json = false;
  double perturb = 1.0;
  auto* verify = app.add_subcommand("verify", "Run the built-in oracle checks");
  verify->add_flag("--json", verify_json, "Machine-readable report on stdout");
  // Negative control: scales the kernel constant inside the analytic bar integrals.
  verify->add_option("--perturb-kernel-constant", perturb)->group("");

  auto* info = app.add_subcommand("info", "Summarise a model without solving");
  info->add_option("model", info_opts.model, "Model file (JSON)")->required();
  info->add_flag("--json", info_opts.json, "Machine-readable summary on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  if (*solve) return guarded([&] { return cmd_solve(solve_opts, vtk); });
  if (*sweep) return guarded([&] { return cmd_sweep(sweep_opts, parameter, values); });
  if (*verify) return guarded([&] { return cmd_verify(verify_json, perturb); });
  return guarded([&] { return cmd_info(info_opts); });
}
