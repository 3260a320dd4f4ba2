#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rotsol/config.hpp"
#include "rotsol/orbits.hpp"

namespace rotsol {

/// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNoSolutions = 3, kExitInvariant = 4 };

/// Wall-clock seconds per named stage, kept apart from the deterministic report.
using Timings = std::vector<std::pair<std::string, double>>;

struct AnalyzeOutcome {
  RunConfig cfg;
  HamiltonianSystem sys;
  AssumptionReport assumptions;
  EnergyContext ectx;
  double radius_min = 0.0;  ///< sampled min |p| on the energy surface
  double radius_max = 0.0;
  int samples = 0;
  double energy_defect = 0.0;       ///< max |H(p / alpha, q) - M|
  double homogeneity_defect = 0.0;  ///< max |alpha(lambda p, q) - lambda alpha| / (lambda alpha)
  double chart_defect = 0.0;        ///< max of F2 o F1 and F1 o F2 round-trip errors
  Timings timings;
};

AnalyzeOutcome run_analyze(const RunConfig& cfg);
std::string analyze_report_json(const AnalyzeOutcome& out);

/// Oracle orbit used to fix That and to seed the search.
struct SeedOrbit {
  std::string label;
  RotationSolution solution;
  FixedPeriodLoop fixed;
};

struct SolutionEntry {
  int run = 0;
  int class_index = 0;
  double critical_residual = 0.0;
  LoopResidual loop;
  OrbitRecord record;
  RotationSolution solution;
  double oracle_hausdorff = -1.0;  ///< trace distance to the shooting solution from the same start
  double oracle_period_rel = -1.0;
  std::string oracle_error;
};

struct RunSummary {
  double that = 0.0;
  int d_cut = 0;
  int d_grid = 0;
  int nt = 0;
  double m2_scale = 1.0;
  int inflations = 0;
  int starts = 0;
  int converged = 0;
  int rejected = 0;
  int ambiguous = 0;
  int record_failures = 0;
  int classes = 0;
};

struct SolveOutcome {
  RunConfig cfg;
  HamiltonianSystem sys;
  EnergyContext ectx;
  AssumptionReport assumptions;
  std::shared_ptr<const ExtendedHamiltonian> hhat;
  std::vector<SeedOrbit> seeds;
  std::vector<RunSummary> runs;
  std::vector<SolutionEntry> solutions;
  Classification classification;
  double distinct_tol = 0.0;
  std::vector<std::string> violations;  ///< broken residual contracts or certificate conflicts
  Timings timings;

  int exit_code() const;
};

/// Full pipeline: context, extension, That selection, multistart reduction per That,
/// records, rotation solutions, oracle cross-checks and classification.
SolveOutcome run_solve(const RunConfig& cfg);
std::string solve_report_json(const SolveOutcome& out);
/// Writes report.json, timings.json and one solution_<i>.csv per solution into `dir`.
void write_solve_artifacts(const SolveOutcome& out, const std::string& dir);

/// Columns s, p.., q.., H, Hhat at 1024 samples with 12 significant digits.
std::string solution_csv(const HamiltonianSystem& sys, const ExtendedHamiltonian& hhat, const RotationSolution& sol);

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string detail;
};

/// Invariant suite over the configured system (gauge, dilation, profile, extension, loops,
/// reduction, transfer round trip) plus fixtures that must be rejected.
std::vector<CheckResult> run_verify(const RunConfig& cfg);
std::string verify_table(const std::vector<CheckResult>& checks);

/// Reads `dir`/report.json and writes surface.csv, profile.csv and trace_<i>.csv.
std::vector<std::string> export_artifacts(const RunConfig& cfg, const std::string& dir);

}  // namespace rotsol
