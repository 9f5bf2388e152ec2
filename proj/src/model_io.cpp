#include "igabem/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "igabem/error.hpp"
#include "json.hpp"

#ifndef IGABEM_VERSION
#define IGABEM_VERSION "0.0.0"
#endif

namespace igabem {

namespace {

using json = nlohmann::ordered_json;

std::string pointer_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

// Read-only view of a JSON value that knows its JSON pointer.
class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const json& raw() const { return *j_; }
  const std::string& path() const { return path_; }
  [[noreturn]] void fail(const std::string& reason) const { throw ParseError(path_.empty() ? "/" : path_, reason); }

  void expect_object(std::initializer_list<const char*> keys) const {
    if (!j_->is_object()) fail("expected an object");
    for (const auto& [k, v] : j_->items()) {
      bool known = false;
      for (const char* a : keys) known = known || k == a;
      if (!known) throw ParseError(path_ + "/" + pointer_token(k), "unknown key '" + k + "'");
    }
  }
  bool has(const char* key) const { return j_->contains(key); }
  Node at(const char* key) const {
    if (!j_->contains(key)) fail(std::string("missing required key '") + key + "'");
    return Node((*j_)[key], path_ + "/" + pointer_token(key));
  }
  std::optional<Node> opt(const char* key) const {
    if (!j_->contains(key)) return std::nullopt;
    return at(key);
  }
  std::size_t size() const {
    if (!j_->is_array()) fail("expected an array");
    return j_->size();
  }
  Node item(std::size_t i) const { return Node((*j_)[i], path_ + "/" + std::to_string(i)); }

  double number() const {
    if (!j_->is_number()) fail("expected a number");
    const double v = j_->get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  int integer() const {
    if (!j_->is_number_integer()) fail("expected an integer");
    const auto v = j_->get<long long>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail("integer out of range");
    return static_cast<int>(v);
  }
  std::string string() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }
  bool boolean() const {
    if (!j_->is_boolean()) fail("expected true or false");
    return j_->get<bool>();
  }
  std::vector<double> numbers() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(item(i).number());
    return out;
  }
  Vec3 vec3() const {
    if (size() != 3) fail("expected 3 numbers");
    return Vec3(item(0).number(), item(1).number(), item(2).number());
  }
  std::array<int, 3> int3() const {
    if (size() != 3) fail("expected 3 integers");
    return {item(0).integer(), item(1).integer(), item(2).integer()};
  }

 private:
  const json* j_;
  std::string path_;
};

double positive(const Node& n) {
  const double v = n.number();
  if (!(v > 0.0)) n.fail("must be positive");
  return v;
}

double poisson(const Node& n) {
  const double v = n.number();
  if (!(v > -1.0 && v < 0.5)) n.fail("Poisson's ratio must lie in (-1, 0.5)");
  return v;
}

SurfaceSpec parse_surface(const Node& n) {
  n.expect_object({"name", "degree_u", "degree_v", "knots_u", "knots_v", "control_points", "weights"});
  SurfaceSpec s;
  s.name = n.at("name").string();
  const auto cp = n.at("control_points");
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < cp.size(); ++i) pts.push_back(cp.item(i).vec3());
  std::vector<double> w;
  if (auto wn = n.opt("weights")) w = wn->numbers();
  try {
    KnotVector ku(n.at("knots_u").numbers(), n.at("degree_u").integer());
    KnotVector kv(n.at("knots_v").numbers(), n.at("degree_v").integer());
    s.surface = NurbsSurface(ku, kv, pts, w);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    n.fail(e.what());
  }
  return s;
}

ComponentBc parse_bc(const Node& n) {
  n.expect_object({"type", "value"});
  ComponentBc bc;
  const auto type = n.at("type");
  const std::string t = type.string();
  if (t == "displacement")
    bc.kind = BcKind::Displacement;
  else if (t == "traction")
    bc.kind = BcKind::Traction;
  else
    type.fail("expected \"displacement\" or \"traction\"");
  bc.value = n.has("value") ? n.at("value").number() : 0.0;
  return bc;
}

PatchSpec parse_patch(const Node& n) {
  n.expect_object({"surface", "refine", "bc"});
  PatchSpec p;
  p.surface = n.at("surface").string();
  if (auto r = n.opt("refine")) {
    r->expect_object({"elevate_u", "elevate_v", "insert_u", "insert_v"});
    auto count = [&](const char* key) {
      if (!r->has(key)) return 0;
      const auto c = r->at(key);
      const int v = c.integer();
      if (v < 0) c.fail("must be >= 0");
      return v;
    };
    p.refine.elevate_u = count("elevate_u");
    p.refine.elevate_v = count("elevate_v");
    if (r->has("insert_u")) p.refine.insert_u = r->at("insert_u").numbers();
    if (r->has("insert_v")) p.refine.insert_v = r->at("insert_v").numbers();
  }
  if (auto bc = n.opt("bc")) {
    bc->expect_object({"x", "y", "z"});
    const char* names[3] = {"x", "y", "z"};
    for (int c = 0; c < 3; ++c)
      if (bc->has(names[c])) p.bc[c] = parse_bc(bc->at(names[c]));
  }
  return p;
}

GeneralSpec parse_general(const Node& n) {
  n.expect_object({"name", "bottom", "top", "grid", "E", "nu", "sigma_mode", "region_subdivision"});
  GeneralSpec g;
  g.name = n.at("name").string();
  g.bottom = n.at("bottom").string();
  g.top = n.at("top").string();
  const auto grid = n.at("grid");
  g.grid = grid.int3();
  for (int v : g.grid)
    if (v < 2) grid.fail("grid dimensions must be >= 2");
  g.E = positive(n.at("E"));
  g.nu = n.has("nu") ? poisson(n.at("nu")) : 0.0;
  if (auto m = n.opt("sigma_mode")) {
    const std::string s = m->string();
    if (s == "linear")
      g.sigma_mode = SigmaMode::Linear;
    else if (s == "constant")
      g.sigma_mode = SigmaMode::Constant;
    else
      m->fail("expected \"linear\" or \"constant\"");
  }
  if (auto rs = n.opt("region_subdivision")) {
    g.region_subdivision = rs->int3();
    for (int v : g.region_subdivision)
      if (v < 1) rs->fail("region subdivision must be >= 1");
  }
  return g;
}

BarSpec parse_bar(const Node& n) {
  n.expect_object({"name", "start", "end", "radius", "points", "E", "nu"});
  BarSpec b;
  b.name = n.at("name").string();
  b.start = n.at("start").vec3();
  b.end = n.at("end").vec3();
  b.radius = positive(n.at("radius"));
  const auto pts = n.at("points");
  b.points = pts.integer();
  if (b.points < 2) pts.fail("at least 2 internal points required");
  b.E = positive(n.at("E"));
  b.nu = n.has("nu") ? poisson(n.at("nu")) : 0.0;
  return b;
}

SolveOptions parse_solver(const Node& n) {
  n.expect_object({"method", "tol", "max_iter"});
  SolveOptions o;
  if (auto m = n.opt("method")) {
    try {
      o.method = parse_method(m->string());
    } catch (const DomainError& e) {
      m->fail(e.what());
    }
  }
  if (auto t = n.opt("tol")) o.tol = positive(*t);
  if (auto it = n.opt("max_iter")) {
    o.max_iter = it->integer();
    if (o.max_iter < 1) it->fail("must be >= 1");
  }
  return o;
}

QuadratureOptions parse_quadrature(const Node& n) {
  n.expect_object({"base_order", "max_order", "subdivision_ratio", "max_depth", "singular_order",
                   "volume_singular_order", "fan_layout"});
  QuadratureOptions q;
  auto ival = [&](const char* key, int& dst) {
    if (n.has(key)) dst = n.at(key).integer();
  };
  ival("base_order", q.base_order);
  ival("max_order", q.max_order);
  ival("max_depth", q.max_depth);
  ival("singular_order", q.singular_order);
  ival("volume_singular_order", q.volume_singular_order);
  if (n.has("subdivision_ratio")) q.subdivision_ratio = n.at("subdivision_ratio").number();
  if (auto f = n.opt("fan_layout")) {
    const std::string s = f->string();
    if (s == "triangles")
      q.fan_layout = FanLayout::Triangles;
    else if (s == "rectangles")
      q.fan_layout = FanLayout::Rectangles;
    else
      f->fail("expected \"triangles\" or \"rectangles\"");
  }
  try {
    validate(q);
  } catch (const DomainError& e) {
    n.fail(e.what());
  }
  return q;
}

OutputSpec parse_output(const Node& n) {
  n.expect_object({"probes", "sweep", "vtk"});
  OutputSpec o;
  if (auto p = n.opt("probes")) {
    std::set<std::string> ids;
    for (std::size_t i = 0; i < p->size(); ++i) {
      const auto item = p->item(i);
      item.expect_object({"id", "point"});
      ProbeSpec s{item.at("id").string(), item.at("point").vec3()};
      if (!ids.insert(s.id).second) item.at("id").fail("duplicate probe id '" + s.id + "'");
      o.probes.push_back(s);
    }
  }
  if (auto s = n.opt("sweep")) {
    s->expect_object({"parameter", "values"});
    SweepSpec sw;
    const auto param = s->at("parameter");
    sw.parameter = param.string();
    if (!is_sweep_parameter(sw.parameter)) param.fail("unknown sweep parameter '" + sw.parameter + "'");
    sw.values = s->at("values").numbers();
    o.sweep = sw;
  }
  if (auto v = n.opt("vtk")) o.vtk = v->boolean();
  return o;
}

template <class T>
const T* find_named(const std::vector<T>& items, const std::string& name) {
  for (const auto& i : items)
    if (i.name == name) return &i;
  return nullptr;
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

const char* bc_name(BcKind k) { return k == BcKind::Displacement ? "displacement" : "traction"; }

// ---- results text ---------------------------------------------------------

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void dump_fixed(const json& j, std::string& out, int level) {
  const std::string pad(2 * level, ' '), pad_in(2 * (level + 1), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + json(k).dump() + ": ";
        dump_fixed(v, out, level + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      bool flat = true;
      for (const auto& v : j) flat = flat && (v.is_primitive());
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_fixed(j[i], out, level + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad_in;
        dump_fixed(j[i], out, level + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? fmt17(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

json vec6_json(const Vec6& v) {
  json a = json::array();
  for (int i = 0; i < 6; ++i) a.push_back(v[i]);
  return a;
}

double num_or_nan(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

Vec3 to_vec3(const json& j) { return Vec3(num_or_nan(j.at(0)), num_or_nan(j.at(1)), num_or_nan(j.at(2))); }

Vec6 to_vec6(const json& j) {
  Vec6 v;
  for (int i = 0; i < 6; ++i) v[i] = num_or_nan(j.at(i));
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string header_comment(const std::string& hash) {
  return "# model_hash=" + hash + " version=" + library_version() + "\n";
}

}  // namespace

const char* library_version() { return IGABEM_VERSION; }

bool is_sweep_parameter(const std::string& name) { return name == "bar_points" || name == "quadrature_order"; }

ModelFile parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("invalid JSON: ") + e.what());
  }
  const Node root(j, "");
  root.expect_object({"schema_version", "name", "description", "material", "surfaces", "patches", "inclusions",
                      "solver", "quadrature", "output"});
  const auto ver = root.at("schema_version");
  if (ver.integer() != kSchemaVersion)
    ver.fail("unsupported schema version " + std::to_string(ver.integer()) + " (expected " +
             std::to_string(kSchemaVersion) + ")");
  ModelFile m;
  if (auto n = root.opt("name")) m.name = n->string();
  if (auto d = root.opt("description")) m.description = d->string();
  const auto mat = root.at("material");
  mat.expect_object({"E", "nu"});
  m.E = positive(mat.at("E"));
  m.nu = mat.has("nu") ? poisson(mat.at("nu")) : 0.0;

  const auto surfaces = root.at("surfaces");
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    auto s = parse_surface(surfaces.item(i));
    if (find_named(m.surfaces, s.name)) surfaces.item(i).at("name").fail("duplicate surface name '" + s.name + "'");
    m.surfaces.push_back(std::move(s));
  }
  const auto patches = root.at("patches");
  for (std::size_t i = 0; i < patches.size(); ++i) m.patches.push_back(parse_patch(patches.item(i)));
  if (auto inc = root.opt("inclusions")) {
    inc->expect_object({"general", "linear"});
    std::set<std::string> names;
    if (auto g = inc->opt("general"))
      for (std::size_t i = 0; i < g->size(); ++i) {
        m.generals.push_back(parse_general(g->item(i)));
        if (!names.insert(m.generals.back().name).second) g->item(i).at("name").fail("duplicate inclusion name");
      }
    if (auto l = inc->opt("linear"))
      for (std::size_t i = 0; i < l->size(); ++i) {
        m.bars.push_back(parse_bar(l->item(i)));
        if (!names.insert(m.bars.back().name).second) l->item(i).at("name").fail("duplicate inclusion name");
      }
  }
  if (auto s = root.opt("solver")) m.solver = parse_solver(*s);
  if (auto q = root.opt("quadrature")) m.quadrature = parse_quadrature(*q);
  if (auto o = root.opt("output")) m.output = parse_output(*o);
  (void)build_model(m);  // geometry checks with JSON pointers
  return m;
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("", "cannot open model file '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  try {
    return parse_model(s.str());
  } catch (const ParseError& e) {
    throw ParseError(e.path(), std::string(e.what()) + " [in " + path + "]");
  }
}

Model build_model(const ModelFile& f) {
  Model m;
  m.material = ElasticConstants::make(f.E, f.nu);
  m.quadrature = f.quadrature;
  auto surface = [&](const std::string& name, const std::string& path) -> const NurbsSurface& {
    const auto* s = find_named(f.surfaces, name);
    if (!s) throw ParseError(path, "unknown surface '" + name + "'");
    return s->surface;
  };
  if (f.patches.empty()) throw ParseError("/patches", "at least one patch is required");
  for (std::size_t i = 0; i < f.patches.size(); ++i) {
    const auto& p = f.patches[i];
    const std::string path = "/patches/" + std::to_string(i);
    BoundaryPatch b;
    b.name = p.surface;
    b.bc = p.bc;
    try {
      b.surface = refine(surface(p.surface, path + "/surface"), p.refine);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(path + "/refine", e.what());
    }
    m.patches.push_back(std::move(b));
  }
  try {
    check_watertight(m.patches);
    (void)build_dof_map(m.patches);
  } catch (const Error& e) {
    throw ParseError("/patches", e.what());
  }
  for (std::size_t i = 0; i < f.generals.size(); ++i) {
    const auto& g = f.generals[i];
    const std::string path = "/inclusions/general/" + std::to_string(i);
    GeneralInclusion incl;
    incl.name = g.name;
    incl.bottom = surface(g.bottom, path + "/bottom");
    incl.top = surface(g.top, path + "/top");
    incl.grid = g.grid;
    incl.material = ElasticConstants::make(g.E, g.nu);
    incl.sigma_mode = g.sigma_mode;
    incl.region_subdivision = g.region_subdivision;
    try {
      validate(incl);
    } catch (const Error& e) {
      throw ParseError(path, e.what());
    }
    m.generals.push_back(std::move(incl));
  }
  for (std::size_t i = 0; i < f.bars.size(); ++i) {
    const auto& b = f.bars[i];
    LinearInclusion bar;
    bar.name = b.name;
    bar.axis = NurbsCurve(KnotVector({0, 0, 1, 1}, 1), {b.start, b.end});
    bar.radius = b.radius;
    bar.points = b.points;
    bar.material = ElasticConstants::make(b.E, b.nu);
    try {
      validate(bar);
    } catch (const Error& e) {
      throw ParseError("/inclusions/linear/" + std::to_string(i), e.what());
    }
    m.bars.push_back(std::move(bar));
  }
  return m;
}

std::string serialise_model(const ModelFile& m) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = m.name;
  j["description"] = m.description;
  j["material"] = {{"E", m.E}, {"nu", m.nu}};
  json surfaces = json::array();
  for (const auto& s : m.surfaces) {
    json pts = json::array();
    for (const auto& p : s.surface.points()) pts.push_back(vec_json(p));
    json o = {{"name", s.name},
              {"degree_u", s.surface.knots_u().degree()},
              {"degree_v", s.surface.knots_v().degree()},
              {"knots_u", s.surface.knots_u().knots()},
              {"knots_v", s.surface.knots_v().knots()},
              {"control_points", pts}};
    bool rational = false;
    for (double w : s.surface.weights()) rational = rational || w != 1.0;
    if (rational) o["weights"] = s.surface.weights();
    surfaces.push_back(o);
  }
  j["surfaces"] = surfaces;
  json patches = json::array();
  const char* comp[3] = {"x", "y", "z"};
  for (const auto& p : m.patches) {
    json bc;
    for (int c = 0; c < 3; ++c) bc[comp[c]] = {{"type", bc_name(p.bc[c].kind)}, {"value", p.bc[c].value}};
    patches.push_back({{"surface", p.surface},
                       {"refine",
                        {{"elevate_u", p.refine.elevate_u},
                         {"elevate_v", p.refine.elevate_v},
                         {"insert_u", p.refine.insert_u},
                         {"insert_v", p.refine.insert_v}}},
                       {"bc", bc}});
  }
  j["patches"] = patches;
  json general = json::array(), linear = json::array();
  for (const auto& g : m.generals)
    general.push_back({{"name", g.name},
                       {"bottom", g.bottom},
                       {"top", g.top},
                       {"grid", g.grid},
                       {"E", g.E},
                       {"nu", g.nu},
                       {"sigma_mode", g.sigma_mode == SigmaMode::Linear ? "linear" : "constant"},
                       {"region_subdivision", g.region_subdivision}});
  for (const auto& b : m.bars)
    linear.push_back({{"name", b.name},
                      {"start", vec_json(b.start)},
                      {"end", vec_json(b.end)},
                      {"radius", b.radius},
                      {"points", b.points},
                      {"E", b.E},
                      {"nu", b.nu}});
  j["inclusions"] = {{"general", general}, {"linear", linear}};
  j["solver"] = {{"method", to_string(m.solver.method)}, {"tol", m.solver.tol}, {"max_iter", m.solver.max_iter}};
  const auto& q = m.quadrature;
  j["quadrature"] = {{"base_order", q.base_order},
                     {"max_order", q.max_order},
                     {"subdivision_ratio", q.subdivision_ratio},
                     {"max_depth", q.max_depth},
                     {"singular_order", q.singular_order},
                     {"volume_singular_order", q.volume_singular_order},
                     {"fan_layout", q.fan_layout == FanLayout::Triangles ? "triangles" : "rectangles"}};
  json probes = json::array();
  for (const auto& p : m.output.probes) probes.push_back({{"id", p.id}, {"point", vec_json(p.point)}});
  json out = {{"probes", probes}, {"vtk", m.output.vtk}};
  if (m.output.sweep) out["sweep"] = {{"parameter", m.output.sweep->parameter}, {"values", m.output.sweep->values}};
  j["output"] = out;
  return j.dump(2) + "\n";
}

std::string model_hash(const ModelFile& m) {
  const std::string text = serialise_model(m);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

ModelFile with_parameter(const ModelFile& m, const std::string& parameter, double value) {
  ModelFile out = m;
  const int n = static_cast<int>(std::lround(value));
  if (std::abs(value - n) > 1e-12) throw ParseError("/output/sweep/values", "sweep values must be integers");
  if (parameter == "bar_points") {
    if (n < 2) throw ParseError("/output/sweep/values", "bar_points must be >= 2");
    for (auto& b : out.bars) b.points = n;
  } else if (parameter == "quadrature_order") {
    out.quadrature.base_order = n;
    out.quadrature.max_order = std::max(out.quadrature.max_order, n);
    try {
      validate(out.quadrature);
    } catch (const DomainError& e) {
      throw ParseError("/output/sweep/values", e.what());
    }
  } else {
    throw ParseError("/output/sweep/parameter",
                     "unknown sweep parameter '" + parameter + "' (bar_points, quadrature_order)");
  }
  return out;
}

ResultBundle make_bundle(const ModelFile& file, const Model& model, const SystemMatrices& sys,
                         const SolveResult& res) {
  ResultBundle b;
  b.model_name = file.name;
  b.model_hash = model_hash(file);
  b.version = library_version();
  b.method = to_string(res.method);
  b.tol = file.solver.tol;
  b.max_iter = file.solver.max_iter;
  b.quadrature_order = file.quadrature.base_order;
  b.unknowns = sys.dofs.unknowns;
  b.x.assign(res.x.data(), res.x.data() + res.x.size());
  const auto bf = boundary_field(model, sys.dofs, res.x);
  b.node_position = sys.dofs.nodes;
  b.node_displacement = bf.displacement;
  for (const auto& p : model.patches) b.patch_names.push_back(p.name);
  b.traction = bf.traction;
  const auto fields = recover_fields(model, sys, res);
  for (int g = 0; g < sys.grid.size(); ++g) {
    const auto& e = sys.grid.points[g];
    GridRecord r;
    r.inclusion = e.bar ? model.bars[e.inclusion].name : model.generals[e.inclusion].name;
    r.bar = e.bar;
    r.index = e.local;
    r.on_boundary = sys.grid_on_boundary[g];
    r.position = e.position;
    r.u = res.u.segment<3>(3 * g);
    r.strain = res.strain.segment<6>(6 * g);
    r.sigma0 = res.sigma0.segment<6>(6 * g);
    r.stress = fields.stress.segment<6>(6 * g);
    r.bar_force = fields.bar_force[g];
    b.grid.push_back(r);
  }
  for (const auto& p : file.output.probes) b.probes.push_back({p.id, p.point, probe_displacement(model, sys, res, p.point)});
  b.iterations = res.iterations;
  b.converged = res.converged;
  b.residual = res.residual;
  b.increments = res.increments;
  return b;
}

std::string results_json(const ResultBundle& b) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["units"] = "dimensionless";
  json overrides = json::object();
  for (const auto& [k, v] : b.overrides) overrides[k] = v;
  j["provenance"] = {{"model", b.model_name},   {"model_hash", b.model_hash},   {"version", b.version},
                     {"method", b.method},      {"tol", b.tol},                 {"max_iter", b.max_iter},
                     {"quadrature_order", b.quadrature_order}, {"overrides", overrides}};
  j["solution"] = {{"unknowns", b.unknowns}, {"iterations", b.iterations}, {"converged", b.converged},
                   {"residual", b.residual}, {"increments", b.increments}, {"x", b.x}};
  json nodes = json::array(), disp = json::array(), patches = json::array();
  for (std::size_t i = 0; i < b.node_position.size(); ++i) {
    nodes.push_back(vec_json(b.node_position[i]));
    disp.push_back(vec_json(b.node_displacement[i]));
  }
  for (std::size_t p = 0; p < b.patch_names.size(); ++p) {
    json t = json::array();
    for (const auto& v : b.traction[p]) t.push_back(vec_json(v));
    patches.push_back({{"name", b.patch_names[p]}, {"traction", t}});
  }
  j["boundary"] = {{"nodes", nodes}, {"displacement", disp}, {"patches", patches}};
  json grid = json::array();
  for (const auto& g : b.grid)
    grid.push_back({{"inclusion", g.inclusion},
                    {"bar", g.bar},
                    {"index", g.index},
                    {"on_boundary", g.on_boundary},
                    {"position", vec_json(g.position)},
                    {"u", vec_json(g.u)},
                    {"strain", vec6_json(g.strain)},
                    {"sigma0", vec6_json(g.sigma0)},
                    {"stress", vec6_json(g.stress)},
                    {"bar_force", g.bar_force}});
  j["grid"] = grid;
  json probes = json::array();
  for (const auto& p : b.probes) probes.push_back({{"id", p.id}, {"point", vec_json(p.point)}, {"u", vec_json(p.u)}});
  j["probes"] = probes;
  std::string out;
  dump_fixed(j, out, 0);
  return out + "\n";
}

ResultBundle parse_results(const std::string& text) {
  ResultBundle b;
  try {
    const json j = json::parse(text);
    const auto& pv = j.at("provenance");
    b.model_name = pv.at("model").get<std::string>();
    b.model_hash = pv.at("model_hash").get<std::string>();
    b.version = pv.at("version").get<std::string>();
    b.method = pv.at("method").get<std::string>();
    b.tol = num_or_nan(pv.at("tol"));
    b.max_iter = pv.at("max_iter").get<int>();
    b.quadrature_order = pv.at("quadrature_order").get<int>();
    for (const auto& [k, v] : pv.at("overrides").items()) b.overrides.emplace_back(k, v.get<std::string>());
    const auto& s = j.at("solution");
    b.unknowns = s.at("unknowns").get<int>();
    b.iterations = s.at("iterations").get<int>();
    b.converged = s.at("converged").get<bool>();
    b.residual = num_or_nan(s.at("residual"));
    for (const auto& v : s.at("increments")) b.increments.push_back(num_or_nan(v));
    for (const auto& v : s.at("x")) b.x.push_back(num_or_nan(v));
    const auto& bd = j.at("boundary");
    for (const auto& v : bd.at("nodes")) b.node_position.push_back(to_vec3(v));
    for (const auto& v : bd.at("displacement")) b.node_displacement.push_back(to_vec3(v));
    for (const auto& p : bd.at("patches")) {
      b.patch_names.push_back(p.at("name").get<std::string>());
      b.traction.emplace_back();
      for (const auto& v : p.at("traction")) b.traction.back().push_back(to_vec3(v));
    }
    for (const auto& g : j.at("grid")) {
      GridRecord r;
      r.inclusion = g.at("inclusion").get<std::string>();
      r.bar = g.at("bar").get<bool>();
      r.index = g.at("index").get<int>();
      r.on_boundary = g.at("on_boundary").get<bool>();
      r.position = to_vec3(g.at("position"));
      r.u = to_vec3(g.at("u"));
      r.strain = to_vec6(g.at("strain"));
      r.sigma0 = to_vec6(g.at("sigma0"));
      r.stress = to_vec6(g.at("stress"));
      r.bar_force = num_or_nan(g.at("bar_force"));
      b.grid.push_back(r);
    }
    for (const auto& p : j.at("probes"))
      b.probes.push_back({p.at("id").get<std::string>(), to_vec3(p.at("point")), to_vec3(p.at("u"))});
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed results: ") + e.what());
  }
  return b;
}

ResultBundle read_results(const std::string& path) {
  try {
    return parse_results(read_file(path));
  } catch (const IoError& e) {
    throw IoError(std::string(e.what()) + " [" + path + "]");
  }
}

std::string probes_csv(const ResultBundle& b) {
  std::string out = header_comment(b.model_hash) + "id,x,y,z,ux,uy,uz\n";
  for (const auto& p : b.probes) {
    out += p.id;
    for (int i = 0; i < 3; ++i) out += "," + fmt17(p.point[i]);
    for (int i = 0; i < 3; ++i) out += "," + fmt17(p.u[i]);
    out += "\n";
  }
  return out;
}

std::string convergence_csv(const std::string& parameter, const std::vector<SweepRow>& rows,
                            const std::string& hash) {
  std::string out = header_comment(hash) + parameter;
  if (!rows.empty())
    for (const auto& p : rows.front().probes) out += "," + p.id + "_ux," + p.id + "_uy," + p.id + "_uz";
  out += "\n";
  for (const auto& r : rows) {
    out += fmt17(r.value);
    for (const auto& p : r.probes)
      for (int i = 0; i < 3; ++i) out += "," + fmt17(p.u[i]);
    out += "\n";
  }
  return out;
}

std::string boundary_vtk(const Model& model, const ResultBundle& b, int samples) {
  const auto dofs = build_dof_map(model.patches);
  if (dofs.nodes.size() != b.node_displacement.size()) throw IoError("results do not match the model boundary");
  std::vector<Vec3> pts, disp;
  std::vector<std::array<int, 4>> cells;
  for (std::size_t p = 0; p < model.patches.size(); ++p) {
    const auto& s = model.patches[p].surface;
    const double u0 = s.knots_u().knots().front(), u1 = s.knots_u().knots().back();
    const double v0 = s.knots_v().knots().front(), v1 = s.knots_v().knots().back();
    const int base = static_cast<int>(pts.size());
    for (int j = 0; j <= samples; ++j)
      for (int i = 0; i <= samples; ++i) {
        const double u = u0 + (u1 - u0) * i / samples, v = v0 + (v1 - v0) * j / samples;
        const auto bs = s.basis(u, v);
        Vec3 d = Vec3::Zero();
        for (int a = 0; a < bs.count; ++a) d += bs.value[a] * b.node_displacement[dofs.patch_nodes[p][bs.index[a]]];
        pts.push_back(s.point(u, v));
        disp.push_back(d);
      }
    for (int j = 0; j < samples; ++j)
      for (int i = 0; i < samples; ++i) {
        const int a = base + j * (samples + 1) + i;
        cells.push_back({a, a + 1, a + samples + 2, a + samples + 1});
      }
  }
  std::string out = "# vtk DataFile Version 3.0\nboundary displacement model_hash=" + b.model_hash +
                    "\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS " + std::to_string(pts.size()) + " double\n";
  for (const auto& p : pts) out += fmt17(p[0]) + " " + fmt17(p[1]) + " " + fmt17(p[2]) + "\n";
  out += "CELLS " + std::to_string(cells.size()) + " " + std::to_string(5 * cells.size()) + "\n";
  for (const auto& c : cells)
    out += "4 " + std::to_string(c[0]) + " " + std::to_string(c[1]) + " " + std::to_string(c[2]) + " " +
           std::to_string(c[3]) + "\n";
  out += "CELL_TYPES " + std::to_string(cells.size()) + "\n";
  for (std::size_t i = 0; i < cells.size(); ++i) out += "9\n";
  out += "POINT_DATA " + std::to_string(pts.size()) + "\nVECTORS displacement double\n";
  for (const auto& d : disp) out += fmt17(d[0]) + " " + fmt17(d[1]) + " " + fmt17(d[2]) + "\n";
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  out.close();
  if (!out) throw IoError("error while writing '" + path + "'");
}

void write_results(const ResultBundle& b, const std::string& dir, const Model* vtk) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
  write_text((fs::path(dir) / "results.json").string(), results_json(b));
  write_text((fs::path(dir) / "probes.csv").string(), probes_csv(b));
  if (vtk) write_text((fs::path(dir) / "boundary.vtk").string(), boundary_vtk(*vtk, b));
}

}  // namespace igabem
