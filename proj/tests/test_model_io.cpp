#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "igabem/error.hpp"
#include "igabem/pipeline.hpp"
#include "json.hpp"

using namespace igabem;
using json = nlohmann::ordered_json;

namespace {

const std::string kModels = IGABEM_MODELS_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json example1() { return json::parse(slurp(kModels + "/example1.json")); }

std::string parse_error_of(const json& j) {
  try {
    parse_model(j.dump());
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

int lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

std::filesystem::path scratch(const char* name) {
  auto p = std::filesystem::temp_directory_path() / ("igabem_test_" + std::to_string(::getpid()) + "_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("shipped examples parse") {
  const auto m1 = load_model(kModels + "/example1.json");
  CHECK(m1.patches.size() == 6);
  CHECK(m1.bars.size() == 1);
  CHECK(m1.bars[0].points == 2);
  CHECK(m1.generals.empty());
  REQUIRE(m1.output.sweep);
  CHECK(m1.output.sweep->values.size() == 20);
  const auto m2 = load_model(kModels + "/example2.json");
  CHECK(m2.patches.size() == 6);
  CHECK(m2.generals.size() == 1);
  CHECK(m2.E == 1000.0);
}

TEST_CASE("schema errors name the offending item") {
  auto j = example1();
  j["inclusions"]["linear"][0]["raduis"] = 0.05;
  auto msg = parse_error_of(j);
  CHECK(msg.find("raduis") != std::string::npos);
  CHECK(msg.find("/inclusions/linear/0/raduis") != std::string::npos);

  j = example1();
  j["inclusions"]["linear"][0]["radius"] = -0.05;
  msg = parse_error_of(j);
  CHECK(msg.find("/inclusions/linear/0/radius") != std::string::npos);

  j = example1();
  j["patches"][2]["surface"] = "nowhere";
  CHECK(parse_error_of(j).find("/patches/2/surface") != std::string::npos);

  j = example1();
  j["schema_version"] = 7;
  CHECK(parse_error_of(j).find("/schema_version") != std::string::npos);

  j = example1();
  j["patches"].erase(1);  // open box
  CHECK_THROWS_AS(parse_model(j.dump()), ParseError);

  CHECK_THROWS_AS(parse_model("{not json"), ParseError);
  try {
    load_model("/nonexistent/model.json");
    FAIL("expected a ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/model.json") != std::string::npos);
  }
}

TEST_CASE("parse, serialise, parse is the identity") {
  for (const char* name : {"example1.json", "example2.json"}) {
    const auto a = load_model(kModels + "/" + name);
    const std::string s1 = serialise_model(a);
    const auto b = parse_model(s1);
    CHECK(serialise_model(b) == s1);
    CHECK(model_hash(a) == model_hash(b));
  }
  // Formatting of the input does not change the hash; content does.
  const auto j = example1();
  CHECK(model_hash(parse_model(j.dump())) == model_hash(parse_model(j.dump(4))));
  auto k = j;
  k["material"]["E"] = 1.5;
  CHECK(model_hash(parse_model(k.dump())) != model_hash(parse_model(j.dump())));
  CHECK(model_hash(parse_model(j.dump())).size() == 64);
}

TEST_CASE("sweep parameters") {
  const auto m = load_model(kModels + "/example1.json");
  CHECK(with_parameter(m, "bar_points", 21).bars[0].points == 21);
  CHECK(with_parameter(m, "quadrature_order", 6).quadrature.base_order == 6);
  CHECK_THROWS_AS(with_parameter(m, "bar_radius", 0.1), ParseError);
  CHECK_THROWS_AS(with_parameter(m, "bar_points", 1), ParseError);
  CHECK_FALSE(is_sweep_parameter("E"));
}

TEST_CASE("results round trip and csv outputs") {
  const auto file = load_model(kModels + "/example1.json");
  RunOverrides o;
  o.method = SolveMethod::Newton;
  o.tol = 1e-8;
  const auto run = run_model(file, o);
  const auto& b = run.bundle;
  CHECK(b.model_hash == model_hash(file));
  REQUIRE(b.overrides.size() == 2);
  CHECK(b.overrides[0] == std::pair<std::string, std::string>{"method", "newton"});
  CHECK(b.overrides[1].first == "tol");
  CHECK(b.method == "newton");

  const std::string text = results_json(b);
  const auto back = parse_results(text);
  CHECK(results_json(back) == text);
  CHECK(back.x == b.x);
  CHECK(back.probes.size() == b.probes.size());
  CHECK(back.probes[0].u == b.probes[0].u);
  CHECK(back.increments == b.increments);
  CHECK(back.grid.size() == b.grid.size());
  CHECK(back.grid[1].stress == b.grid[1].stress);
  CHECK(text.find(b.model_hash) != std::string::npos);
  CHECK(text.find("seconds") == std::string::npos);

  auto empty = b;
  empty.probes.clear();
  const auto csv = probes_csv(empty);
  CHECK(lines(csv) == 2);
  CHECK(csv.find("# model_hash=" + b.model_hash) == 0);
  CHECK(csv.find("id,x,y,z,ux,uy,uz\n") != std::string::npos);

  std::vector<SweepRow> rows;
  for (int p = 2; p <= 21; ++p) rows.push_back({double(p), b.probes});
  const auto conv = convergence_csv("bar_points", rows, b.model_hash);
  CHECK(lines(conv) == 22);
  CHECK(conv.find("bar_points,bar_top_ux,bar_top_uy,bar_top_uz") != std::string::npos);

  const auto dir = scratch("results");
  write_results(b, dir.string(), &run.model);
  CHECK(slurp((dir / "results.json").string()) == text);
  CHECK(std::filesystem::exists(dir / "probes.csv"));
  const auto vtk = slurp((dir / "boundary.vtk").string());
  CHECK(vtk.rfind("# vtk DataFile", 0) == 0);
  CHECK(read_results((dir / "results.json").string()).x == b.x);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(write_results(b, "/proc/igabem_cannot_write"), IoError);
  CHECK_THROWS_AS(read_results("/nonexistent/results.json"), IoError);
}

TEST_CASE("reruns are byte identical regardless of threads") {
  const auto file = load_model(kModels + "/example1.json");
  RunOverrides one, four;
  one.threads = 1;
  four.threads = 4;
  CHECK(results_json(run_model(file, one).bundle) == results_json(run_model(file, four).bundle));
}
