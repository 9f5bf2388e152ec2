#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "igabem/error.hpp"
#include "igabem/pipeline.hpp"
#include "igabem/verify.hpp"

namespace py = pybind11;
using namespace igabem;

namespace {

py::list probes_list(const std::vector<ProbeRecord>& probes) {
  py::list out;
  for (const auto& p : probes) {
    py::dict d;
    d["id"] = p.id;
    d["point"] = p.point;
    d["u"] = p.u;
    out.append(d);
  }
  return out;
}

Eigen::MatrixXd rows3(const std::vector<Vec3>& v) {
  Eigen::MatrixXd m(v.size(), 3);
  for (std::size_t i = 0; i < v.size(); ++i) m.row(i) = v[i].transpose();
  return m;
}

RunOverrides make_overrides(std::optional<std::string> method, std::optional<double> tol,
                            std::optional<int> max_iter, std::optional<int> quadrature_order, int threads) {
  RunOverrides o;
  if (method) o.method = parse_method(*method);
  o.tol = tol;
  o.max_iter = max_iter;
  o.quadrature_order = quadrature_order;
  o.threads = threads;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Isogeometric BEM for elastic domains with general and bar inclusions";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<DomainError>(m, "DomainError", base);
  py::register_exception<GeometryError>(m, "GeometryError", base);
  py::register_exception<AssemblyError>(m, "AssemblyError", base);
  py::register_exception<SolveError>(m, "SolveError", base);
  py::register_exception<IoError>(m, "IoError", base);

  m.def("version", &library_version);

  py::class_<ModelFile>(m, "ModelFile")
      .def_readonly("name", &ModelFile::name)
      .def_readonly("description", &ModelFile::description)
      .def_readonly("E", &ModelFile::E)
      .def_readonly("nu", &ModelFile::nu)
      .def_property_readonly("patch_count", [](const ModelFile& f) { return f.patches.size(); })
      .def_property_readonly("general_inclusion_count", [](const ModelFile& f) { return f.generals.size(); })
      .def_property_readonly("linear_inclusion_count", [](const ModelFile& f) { return f.bars.size(); })
      .def_property_readonly("bar_points", [](const ModelFile& f) {
        std::vector<int> v;
        for (const auto& b : f.bars) v.push_back(b.points);
        return v;
      })
      .def_property_readonly("hash", [](const ModelFile& f) { return model_hash(f); })
      .def("serialise", &serialise_model)
      .def("with_parameter", &with_parameter, py::arg("parameter"), py::arg("value"))
      .def("__repr__", [](const ModelFile& f) {
        return "<ModelFile '" + f.name + "' patches=" + std::to_string(f.patches.size()) + ">";
      });

  m.def("parse_model", &parse_model, py::arg("text"));
  m.def("load_model", &load_model, py::arg("path"));

  py::class_<RunOutput>(m, "Solution")
      .def_property_readonly("x", [](const RunOutput& r) { return r.result.x; })
      .def_property_readonly("unknowns", [](const RunOutput& r) { return r.bundle.unknowns; })
      .def_property_readonly("method", [](const RunOutput& r) { return r.bundle.method; })
      .def_property_readonly("iterations", [](const RunOutput& r) { return r.bundle.iterations; })
      .def_property_readonly("converged", [](const RunOutput& r) { return r.bundle.converged; })
      .def_property_readonly("residual", [](const RunOutput& r) { return r.bundle.residual; })
      .def_property_readonly("increments", [](const RunOutput& r) { return r.bundle.increments; })
      .def_property_readonly("model_hash", [](const RunOutput& r) { return r.bundle.model_hash; })
      .def_property_readonly("node_positions", [](const RunOutput& r) { return rows3(r.bundle.node_position); })
      .def_property_readonly("node_displacements",
                             [](const RunOutput& r) { return rows3(r.bundle.node_displacement); })
      .def_property_readonly("grid_strain", [](const RunOutput& r) { return r.result.strain; })
      .def_property_readonly("grid_sigma0", [](const RunOutput& r) { return r.result.sigma0; })
      .def_property_readonly("probes", [](const RunOutput& r) { return probes_list(r.bundle.probes); })
      .def("displacement_at",
           [](const RunOutput& r, const Vec3& p) { return probe_displacement(r.model, r.sys, r.result, p); },
           py::arg("point"))
      .def("results_json", [](const RunOutput& r) { return results_json(r.bundle); })
      .def("write", [](const RunOutput& r, const std::string& dir, bool vtk) {
        write_results(r.bundle, dir, vtk ? &r.model : nullptr);
      }, py::arg("directory"), py::arg("vtk") = false);

  m.def(
      "solve",
      [](const ModelFile& f, std::optional<std::string> method, std::optional<double> tol,
         std::optional<int> max_iter, std::optional<int> quadrature_order, int threads) {
        const auto o = make_overrides(method, tol, max_iter, quadrature_order, threads);
        py::gil_scoped_release release;
        return run_model(f, o);
      },
      py::arg("model"), py::kw_only(), py::arg("method") = py::none(), py::arg("tol") = py::none(),
      py::arg("max_iter") = py::none(), py::arg("quadrature_order") = py::none(), py::arg("threads") = 0);

  m.def(
      "sweep",
      [](const ModelFile& f, const std::string& parameter, const std::vector<double>& values, int threads) {
        RunOverrides o;
        o.threads = threads;
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_sweep(f, parameter, values, o);
        }
        py::list out;
        for (const auto& r : rows) out.append(py::make_tuple(r.value, probes_list(r.probes)));
        return out;
      },
      py::arg("model"), py::arg("parameter"), py::arg("values"), py::kw_only(), py::arg("threads") = 0);

  m.def(
      "verify",
      [](double scale) {
        VerifyOptions o;
        o.kernel_constant_scale = scale;
        py::list out;
        for (const auto& r : run_verification(o)) {
          py::dict d;
          d["id"] = r.id;
          d["pass"] = r.pass;
          d["measured"] = r.measured;
          d["tolerance"] = r.tolerance;
          d["detail"] = r.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("kernel_constant_scale") = 1.0);

  m.def(
      "kelvin_U",
      [](const Vec3& s, const Vec3& x, double E, double nu) { return kelvin_U(s, x, ElasticConstants::make(E, nu)); },
      py::arg("source"), py::arg("field"), py::arg("E"), py::arg("nu"));
  m.def(
      "kernel_E",
      [](const Vec3& s, const Vec3& x, double E, double nu) { return kernel_E(s, x, ElasticConstants::make(E, nu)); },
      py::arg("source"), py::arg("field"), py::arg("E"), py::arg("nu"));
  m.def("mixtures_estimate", &mixtures_estimate, py::arg("traction"), py::arg("length"), py::arg("area"), py::arg("E"),
        py::arg("E_incl"), py::arg("radius"));
}
