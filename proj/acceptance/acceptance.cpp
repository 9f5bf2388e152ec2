// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "igabem/pipeline.hpp"
#include "igabem/verify.hpp"

using namespace igabem;

namespace {

std::string models_dir = IGABEM_MODELS_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double rel_max(const VecX& a, const VecX& b) {
  const double scale = b.cwiseAbs().maxCoeff();
  return (a - b).cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0);
}

ModelFile example(int k) { return load_model(models_dir + "/example" + std::to_string(k) + ".json"); }

Outcome closed_box() {
  const auto r = check_closed_box(VerifyOptions{}.seed);
  return {r.pass, fmt("max |sum int T + I| = %.3g (tol %.0e)", r.measured, r.tolerance)};
}

Outcome patch_test() {
  auto f = example(1);
  f.bars.clear();
  f.E = 1.0;
  f.nu = 0.0;
  const auto run = run_model(f);
  double uz = 0.0;
  for (const auto& p : run.bundle.probes)
    if (p.point == Vec3(0.5, 0.5, 1.0)) uz = p.u[2];
  double lateral = 0.0, top = 0.0;
  for (std::size_t n = 0; n < run.bundle.node_position.size(); ++n) {
    const auto& u = run.bundle.node_displacement[n];
    lateral = std::max({lateral, std::abs(u[0]), std::abs(u[1])});
    if (run.bundle.node_position[n][2] == 1.0) top = std::max(top, std::abs(u[2] - 1.0));
  }
  return {std::abs(uz - 1.0) < 1e-3 && top < 1e-3 && lateral < 1e-3,
          fmt("u_z(top centre) = %.12g, max top-node |u_z - 1| = %.3g, max lateral = %.3g", uz, top, lateral)};
}

Outcome zero_contrast() {
  auto f = example(1);
  f.bars[0].E = f.E;
  f.bars[0].nu = f.nu;
  const auto with = run_model(f);
  f.bars.clear();
  const auto without = run_model(f);
  const double dx = rel_max(with.result.x, without.result.x);
  double dp = 0.0;
  for (std::size_t i = 0; i < with.bundle.probes.size(); ++i)
    dp = std::max(dp, (with.bundle.probes[i].u - without.bundle.probes[i].u).cwiseAbs().maxCoeff() /
                          without.bundle.probes[i].u.cwiseAbs().maxCoeff());
  const double sig = with.result.sigma0.cwiseAbs().maxCoeff();
  return {dx < 1e-12 && dp < 1e-12 && sig == 0.0,
          fmt("max rel diff: boundary solution %.3g, probes %.3g; max |sigma0| = %.3g", dx, dp, sig)};
}

Outcome bar_integrals() {
  const auto a = check_bar_regular(VerifyOptions{});
  const auto b = check_bar_singular(VerifyOptions{});
  const auto c = check_bar_structure();
  return {a.pass && b.pass && c.pass,
          fmt("regular max rel %.3g (tol 1e-8), singular max rel %.3g (tol 1e-6), structure deviation %.3g",
              a.measured, b.measured, c.measured)};
}

Outcome methods() {
  const auto f = example(2);
  auto run = run_model(f);
  const auto& s = run.sys;
  SolveOptions o = f.solver;
  const auto one = solve_onestep(s, o);
  const auto coupled = solve_coupled(s, o);
  const auto newton = solve_newton_modified(s, o);
  const double dn = (newton.x - one.x).norm() / one.x.norm();
  const double dc = (coupled.x - one.x).norm() / one.x.norm();
  return {dn < 1e-8 && dc < 1e-10 && newton.converged,
          fmt("%.0f unknowns; newton (%.0f iterations) vs one-step %.3g, coupled vs one-step %.3g",
              static_cast<double>(one.x.size()), newton.iterations, dn, dc)};
}

Outcome convergence() {
  const auto f = example(1);
  std::vector<double> pts;
  for (int p = 2; p <= 21; ++p) pts.push_back(p);
  const auto rows = run_sweep(f, "bar_points", pts);
  auto uz = [&](int p) {
    for (const auto& r : rows)
      if (r.value == p)
        for (const auto& q : r.probes)
          if (q.id == "bar_top") return q.u[2];
    return std::nan("");
  };
  const double u11 = uz(11), u21 = uz(21);
  const double change = std::abs(u21 - u11) / std::abs(u21);
  const double band = mixtures_estimate(1.0, 1.0, 1.0, f.E, f.bars[0].E, f.bars[0].radius);
  return {change < 0.01 && u21 > 0.98 && u21 < 1.0,
          fmt("u_z(2) = %.8f, u_z(11) = %.8f, u_z(21) = %.8f, mixtures estimate %.6f", uz(2), u11, u21, band) +
              fmt(", |u21 - u11|/|u21| = %.3g", change)};
}

Outcome strain_recovery() {
  const auto r = check_strain_recovery(VerifyOptions{}.seed);
  return {r.pass, fmt("max strain error %.3g (tol 1e-12)", r.measured)};
}

Outcome kernel() {
  const auto fd = check_kernel_fd(VerifyOptions{}.seed);
  const auto sym = check_kernel_symmetry(VerifyOptions{}.seed);
  return {fd.pass && sym.pass, fmt("FD max rel %.3g with sign +1; symmetry/homogeneity deviation %.3g", fd.measured,
                                   sym.measured)};
}

Outcome singular_volume() {
  const auto r = check_singular_volume();
  return {r.pass, fmt("orders 8 vs 16 max rel %.3g (tol 1e-3); ", r.measured) + r.detail};
}

Outcome determinism() {
  bool same = true;
  std::string detail;
  for (int k : {1, 2}) {
    const auto f = example(k);
    RunOverrides one, many;
    one.threads = 1;
    many.threads = 4;
    const auto a = results_json(run_model(f, one).bundle);
    const auto b = results_json(run_model(f, one).bundle);
    const auto c = results_json(run_model(f, many).bundle);
    const bool ok = a == b && a == c;
    same = same && ok;
    detail += "example" + std::to_string(k) + (ok ? " identical" : " DIFFERS") + " (" + std::to_string(a.size()) +
              " bytes); ";
  }
  detail += "threads 1, 1, 4";
  return {same, detail};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) models_dir = argv[1];
  struct Criterion {
    int id;
    const char* name;
    double budget;  // seconds
    std::function<Outcome()> run;
  };
  const Criterion list[] = {
      {1, "closed-box T identity", 10, closed_box},
      {2, "uniaxial patch test", 30, patch_test},
      {3, "zero-contrast neutrality", 0, zero_contrast},
      {4, "analytical bar integrals", 0, bar_integrals},
      {5, "method equivalence (example 2)", 120, methods},
      {6, "example 1 convergence in bar points", 300, convergence},
      {7, "strain-recovery exactness", 0, strain_recovery},
      {8, "kernel consistency", 0, kernel},
      {9, "singular volume integration", 0, singular_volume},
      {10, "determinism of results.json", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : list) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget <= 0 || sec < c.budget;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s criterion %2d: %s: %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), sec,
                in_time ? "" : ", over time budget");
    std::fflush(stdout);
  }
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
