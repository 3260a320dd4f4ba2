#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rotsol/pipeline.hpp"

using namespace rotsol;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("rotsol_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

const SolveOutcome& pendulum_solve() {
  static const SolveOutcome out = run_solve(parse_run_config("energy.M = 3.5\nrotation.k = 1\n"));
  return out;
}

}  // namespace

TEST_CASE("analyze reports the surface radii") {
  const auto cp = run_analyze(parse_run_config("system.name = coupled_pendulum\nenergy.M = 3\nenergy.surface = star_shaped\n", false));
  CHECK(std::abs(cp.radius_min - std::sqrt(2.0)) <= 1e-9);
  CHECK(std::abs(cp.radius_max - std::sqrt(10.0)) <= 1e-9);
  CHECK(cp.energy_defect <= 1e-10);
  CHECK(cp.homogeneity_defect <= 1e-10);
  CHECK(cp.chart_defect <= 1e-9);
  const auto p = run_analyze(parse_run_config("energy.M = 3.5\n", false));
  CHECK(p.ectx.rlow == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));
  CHECK(p.ectx.rhigh == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(analyze_report_json(p) == analyze_report_json(run_analyze(parse_run_config("energy.M = 3.5\n", false))));
}

TEST_CASE("analyze rejects energies at or below the threshold") {
  try {
    run_analyze(parse_run_config("energy.M = 2\n", false));
    FAIL("expected an input error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("M ≤ M*") != std::string::npos);
  }
}

TEST_CASE("star-shaped surface rule") {
  const auto cfg = parse_run_config("system.name = coupled_pendulum\nenergy.M = 3\nenergy.surface = star_shaped\n", false);
  const auto out = run_analyze(cfg);
  CHECK(out.ectx.threshold == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(out.ectx.Mstar > 3.0);
  // max V = 2 for the coupled pendulum, so M = 2 is not star-shaped.
  CHECK_THROWS_AS(run_analyze(parse_run_config("system.name = coupled_pendulum\nenergy.M = 2\nenergy.surface = star_shaped\n", false)),
                  InputError);
  CHECK_THROWS_AS(run_solve(parse_run_config("system.name = coupled_pendulum\nenergy.M = 3\nenergy.surface = star_shaped\nrotation.k = 1,0\n")),
                  InputError);
  CHECK_THROWS_AS(parse_run_config("energy.M = 3\nenergy.surface = convex\n", false), InputError);
}

TEST_CASE("pendulum solve") {
  const auto& out = pendulum_solve();
  CHECK(out.exit_code() == kExitOk);
  CHECK(out.classification.distinct_count >= 2);
  CHECK(out.classification.bound_met);
  CHECK(out.violations.empty());
  for (const auto& e : out.solutions) {
    CHECK(e.oracle_error.empty());
    CHECK(e.oracle_hausdorff <= 1e-5);
    CHECK(e.oracle_period_rel <= 1e-6);
  }
  const std::string report = solve_report_json(out);
  CHECK(report.find("\"bound_met\": true") != std::string::npos);
}

TEST_CASE("solve output is deterministic and well formed") {
  const auto& out = pendulum_solve();
  const auto again = run_solve(parse_run_config("energy.M = 3.5\nrotation.k = 1\n"));
  CHECK(solve_report_json(out) == solve_report_json(again));

  const auto dir = scratch("solve");
  write_solve_artifacts(out, dir.string());
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "timings.json"));
  std::istringstream csv(slurp(dir / "solution_0.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "s,p1,q1,H,Hhat");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    if (rows == 2) CHECK(line.substr(0, line.find(',')).size() <= 18);
  }
  CHECK(rows == 1024);
  CHECK(solve_report_json(out).find("timings") == std::string::npos);
}

TEST_CASE("no solutions is reported, not thrown") {
  const auto out =
      run_solve(parse_run_config("energy.M = 3.5\nrotation.k = 1\nsolver.that = 0.5\nsolver.sign_sweep = false\n"));
  CHECK(out.solutions.empty());
  CHECK(out.exit_code() == kExitNoSolutions);
  CHECK_FALSE(out.classification.bound_met);
}

TEST_CASE("verify suite passes on the catalog pendulum") {
  const auto checks = run_verify(parse_run_config("energy.M = 3.5\nrotation.k = 1\n"));
  bool wrong = false, halving = false;
  for (const auto& c : checks) {
    CHECK_MESSAGE(c.passed, c.name, " ", c.value, " ", c.detail);
    wrong = wrong || c.name == "wrong_dilation_rejected";
    halving = halving || c.name == "cell_safety_halving";
  }
  CHECK(wrong);
  CHECK(halving);
  CHECK(verify_table(checks).find("FAIL") == std::string::npos);
}

TEST_CASE("export writes surface, profile and traces") {
  const auto cfg = parse_run_config("energy.M = 3.5\nrotation.k = 1\n");
  const auto dir = scratch("export");
  CHECK_THROWS_AS(export_artifacts(cfg, dir.string()), InputError);
  write_solve_artifacts(pendulum_solve(), dir.string());
  const auto files = export_artifacts(cfg, dir.string());
  CHECK(files.size() == 2 + pendulum_solve().solutions.size());
  const std::string first = slurp(dir / "profile.csv") + slurp(dir / "surface.csv") + slurp(dir / "trace_0.csv");
  export_artifacts(cfg, dir.string());
  CHECK(first == slurp(dir / "profile.csv") + slurp(dir / "surface.csv") + slurp(dir / "trace_0.csv"));

  // The g column peaks next to -delta/3 + delta+.
  std::istringstream prof(slurp(dir / "profile.csv"));
  std::string line;
  std::getline(prof, line);
  CHECK(line == "s,f,df,g");
  double best_g = -1.0, best_s = 0.0;
  int rows = 0;
  while (std::getline(prof, line)) {
    ++rows;
    double v[4];
    std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3]);
    if (v[3] > best_g) {
      best_g = v[3];
      best_s = v[0];
    }
  }
  CHECK(rows == 1000);
  const AuxProfile ref(0.3);
  CHECK(std::abs(best_s - ref.g_peak_location()) <= 0.2 / 999);

  // Two branches split by the sign of p.
  std::istringstream surf(slurp(dir / "surface.csv"));
  std::getline(surf, line);
  int pos = 0, neg = 0;
  while (std::getline(surf, line)) {
    double d, q, p;
    std::sscanf(line.c_str(), "%lf,%lf,%lf", &d, &q, &p);
    (p > 0 ? pos : neg) += 1;
    CHECK(std::abs(p) >= std::sqrt(5.0) - 1e-9);
  }
  CHECK(pos == neg);
  CHECK(pos > 0);
}
