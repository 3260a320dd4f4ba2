#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rotsol/pipeline.hpp"

namespace {

using namespace rotsol;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

RunConfig load(const Common& c, bool require_rotation) {
  RunConfig cfg = load_run_config(c.config, require_rotation);
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

int cmd_analyze(const Common& c) {
  const RunConfig cfg = load(c, false);
  const AnalyzeOutcome out = run_analyze(cfg);
  const std::string report = analyze_report_json(out);
  write_file(std::filesystem::path(cfg.out_dir) / "analyze.json", report);
  std::cout << report;
  return kExitOk;
}

int cmd_solve(const Common& c) {
  const RunConfig cfg = load(c, true);
  const SolveOutcome out = run_solve(cfg);
  write_solve_artifacts(out, cfg.out_dir);
  std::printf("solutions %zu, distinct %d (n + 1 = %d), bound %s\n", out.solutions.size(),
              out.classification.distinct_count, out.sys.n + 1, out.classification.bound_met ? "met" : "not met");
  for (std::size_t i = 0; i < out.solutions.size(); ++i) {
    const auto& e = out.solutions[i];
    std::printf("  [%zu] T = %.10g  class %s  delta_b = %.6g  ode %.2e  energy %.2e  boundary %.2e\n", i,
                e.solution.T, to_string(e.record.pclass), e.record.delta_b, e.solution.ode_residual,
                e.solution.energy_residual, e.solution.boundary_residual);
  }
  for (const auto& v : out.violations) std::fprintf(stderr, "violation: %s\n", v.c_str());
  if (out.solutions.empty()) {
    std::fprintf(stderr, "no solutions found; see %s/report.json for per-run diagnostics\n", cfg.out_dir.c_str());
  }
  return out.exit_code();
}

int cmd_verify(const Common& c) {
  const RunConfig cfg = load(c, false);
  const auto checks = run_verify(cfg);
  const std::string table = verify_table(checks);
  std::cout << table;
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  bool all = true;
  for (const auto& ch : checks) {
    j.push_back({{"name", ch.name}, {"value", ch.value}, {"threshold", ch.threshold}, {"passed", ch.passed},
                 {"detail", ch.detail}});
    all = all && ch.passed;
  }
  write_file(std::filesystem::path(cfg.out_dir) / "verify.json", j.dump(2) + "\n");
  return all ? kExitOk : kExitInvariant;
}

int cmd_export(const Common& c) {
  const RunConfig cfg = load(c, false);
  for (const auto& name : export_artifacts(cfg, cfg.out_dir)) std::cout << cfg.out_dir << "/" << name << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotation-type periodic orbits of spatially periodic Hamiltonian systems"};
  app.require_subcommand(1);
  Common common;
  int (*handler)(const Common&) = nullptr;
  auto add = [&](const char* name, const char* help, int (*fn)(const Common&)) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", common.config, "key = value configuration file")->required();
    sub->add_option("--out", common.out, "output directory (overrides output.dir)");
    sub->add_option("--seed", common.seed, "random seed (overrides rng.seed)");
    sub->callback([&handler, fn] { handler = fn; });
  };
  add("analyze", "energy-surface context and gauge checks", cmd_analyze);
  add("solve", "find and classify rotation solutions", cmd_solve);
  add("verify", "run the invariant suite", cmd_verify);
  add("export", "write surface, profile and trace CSVs from a solve report", cmd_export);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  try {
    return handler(common);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInvariant;
  }
}
