#include "rotsol/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "rotsol/numerics.hpp"
#include "rotsol/oracle.hpp"

namespace rotsol {

using json = nlohmann::ordered_json;

namespace {

class Stopwatch {
 public:
  explicit Stopwatch(Timings& sink) : sink_(sink), last_(std::chrono::steady_clock::now()) {}
  void lap(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    sink_.emplace_back(name, std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }

 private:
  Timings& sink_;
  std::chrono::steady_clock::time_point last_;
};

json timings_json(const Timings& t) {
  json j = json::object();
  double total = 0.0;
  for (const auto& [name, secs] : t) {
    j[name] = secs;
    total += secs;
  }
  j["total"] = total;
  return j;
}

json vec_json(const PointVec& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

json ivec_json(const IntVec& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

json context_json(const EnergyContext& c) {
  return {{"M", c.M},         {"Mstar", c.Mstar}, {"surface", to_string(c.rule)}, {"threshold", c.threshold},
          {"a", c.a},         {"r_low", c.rlow},  {"r_high", c.rhigh}};
}

json assumptions_json(const AssumptionReport& a) {
  return {{"periodicity_violation", a.periodicity_violation},
          {"positivity_violation", a.positivity_violation},
          {"growth_violation", a.growth_violation},
          {"pass", a.pass}};
}

json config_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.echo()) j[k] = v;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Grid over the q-cell with `per_dim` nodes per coordinate including 0 and L/2 when even.
std::vector<PointVec> q_grid(const Vec& lattice, int per_dim) {
  const auto nq = lattice.size();
  long total = 1;
  for (Eigen::Index j = 0; j < nq; ++j) total *= per_dim;
  std::vector<PointVec> out;
  out.reserve(total);
  for (long idx = 0; idx < total; ++idx) {
    PointVec q(nq);
    long rem = idx;
    for (Eigen::Index j = 0; j < nq; ++j) {
      q[j] = lattice[j] * static_cast<double>(rem % per_dim) / per_dim;
      rem /= per_dim;
    }
    out.push_back(q);
  }
  return out;
}

PointVec unit_k(const IntVec& k) {
  PointVec d = k.cast<double>();
  return d / d.norm();
}

HamiltonianSystem checked_system(const RunConfig& cfg) {
  HamiltonianSystem sys = build_system(cfg.system);
  if (cfg.k.size() > 0 && cfg.k.size() != sys.ell) {
    throw InputError("config: rotation.k needs " + std::to_string(sys.ell) + " entries");
  }
  return sys;
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// analyze

AnalyzeOutcome run_analyze(const RunConfig& cfg) {
  AnalyzeOutcome out;
  Stopwatch sw(out.timings);
  out.cfg = cfg;
  out.sys = checked_system(cfg);
  const auto& sys = out.sys;
  out.assumptions = check_assumptions(sys);
  out.ectx = energy_context(sys, cfg.M, cfg.surface);
  sw.lap("context");
  const GaugeField gauge(sys, out.ectx);
  const int np = sys.np(), ell = sys.ell;

  // Surface radii over a direction x q grid, extremes polished by Nelder-Mead.
  const int per_dim = ell == 1 ? 64 : (ell == 2 ? 24 : 8);
  const auto dirs = sphere_directions(np, np == 1 ? 2 : 32);
  const auto qs = q_grid(sys.lattice, per_dim);
  out.radius_min = std::numeric_limits<double>::infinity();
  out.radius_max = 0.0;
  PointVec dmin, qmin, dmax, qmax;
  for (const auto& d : dirs) {
    for (const auto& q : qs) {
      const double r = gauge.sigma(d, q);
      if (r < out.radius_min) {
        out.radius_min = r;
        dmin = d;
        qmin = q;
      }
      if (r > out.radius_max) {
        out.radius_max = r;
        dmax = d;
        qmax = q;
      }
    }
  }
  auto polish = [&](const PointVec& d0, const PointVec& q0, double sign) {
    Vec start(np + ell);
    start << d0, q0;
    auto f = [&](const Vec& v) {
      PointVec d = v.head(np);
      if (d.norm() < 1e-12) return 1e300;
      d.normalize();
      return sign * gauge.sigma(d, v.tail(ell));
    };
    const auto res = numerics::nelder_mead(f, start, 0.05, 1e-15, 4000);
    return sign * res.value;  // undo the sign flip used for maximization
  };
  out.radius_min = std::min(out.radius_min, polish(dmin, qmin, 1.0));
  out.radius_max = std::max(out.radius_max, polish(dmax, qmax, -1.0));
  sw.lap("surface");

  // Gauge identities on random points.
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int count = 10000;
  out.samples = count;
  for (int s = 0; s < count; ++s) {
    PointVec d(np);
    for (int i = 0; i < np; ++i) d[i] = normal(rng);
    if (d.norm() < 1e-8) d[0] = 1.0;
    d.normalize();
    PointVec q(ell);
    for (int i = 0; i < ell; ++i) q[i] = sys.lattice[i] * unif(rng);
    const double rho = out.ectx.rlow * 0.7 + unif(rng) * (out.ectx.rhigh * 1.3 - out.ectx.rlow * 0.7);
    PointVec x(sys.dim());
    x << rho * d, q;
    const double a = gauge.alpha(x);
    PointVec u = x;
    u.head(np) /= a;
    out.energy_defect = std::max(out.energy_defect, std::abs(sys.energy(u) - cfg.M));
    const double lambda = 0.5 + 1.5 * unif(rng);
    PointVec xl = x;
    xl.head(np) *= lambda;
    out.homogeneity_defect = std::max(out.homogeneity_defect, std::abs(gauge.alpha(xl) - lambda * a) / (lambda * a));
    // F2 o F1 on the surface point u, F1 o F2 on (d, q).
    const PhasePoint c = gauge.chart_F1(u);
    out.chart_defect = std::max(out.chart_defect, (gauge.chart_F2(c.p, c.q) - u).cwiseAbs().maxCoeff());
    const PhasePoint back = gauge.chart_F1(gauge.chart_F2(d, q));
    out.chart_defect = std::max(out.chart_defect, std::max((back.p - d).cwiseAbs().maxCoeff(),
                                                           (back.q - q).cwiseAbs().maxCoeff()));
  }
  sw.lap("gauge_checks");
  return out;
}

std::string analyze_report_json(const AnalyzeOutcome& out) {
  json j;
  j["command"] = "analyze";
  j["config"] = config_json(out.cfg);
  j["system"] = {{"name", out.sys.name}, {"n", out.sys.n}, {"ell", out.sys.ell}, {"mu", out.sys.mu}, {"r", out.sys.r}};
  j["assumptions"] = assumptions_json(out.assumptions);
  j["energy_context"] = context_json(out.ectx);
  j["surface"] = {{"radius_min", out.radius_min}, {"radius_max", out.radius_max}};
  j["gauge_checks"] = {{"samples", out.samples},
                       {"energy_defect", out.energy_defect},
                       {"homogeneity_defect", out.homogeneity_defect},
                       {"chart_defect", out.chart_defect}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------------------------
// solve

int SolveOutcome::exit_code() const {
  if (solutions.empty()) return kExitNoSolutions;
  if (!violations.empty()) return kExitInvariant;
  return kExitOk;
}

namespace {

std::vector<FourierLoop> make_starts(const ReductionContext& ctx, const GaugeField& gauge,
                                     const std::vector<SeedOrbit>& seeds, const RunConfig& cfg, int run) {
  const auto& sys = gauge.system();
  const auto& prof = ctx.hhat().profile();
  const int np = sys.np(), ell = sys.ell, N = ctx.nt();
  std::vector<FourierLoop> starts;

  // Oracle orbits moved to every shell whose g matches the That ratio.
  for (const auto& seed : seeds) {
    const double ratio = seed.fixed.that / ctx.that();
    if (!(ratio > 0.0)) continue;
    for (double s : prof.shells_with_g(ratio)) {
      Mat smp = seed.fixed.samples;
      smp.topRows(np) *= std::exp(s);
      starts.push_back(loop_from_samples(ctx, smp));
    }
  }

  // Chart-straight loops t -> (e^s sigma(d, q(t)) d, q(t)), q(t) = q0 + t L k.
  int fixed = 0;
  for (int i = 1; i < ell; ++i) {
    if (std::abs(ctx.k()[i]) > std::abs(ctx.k()[fixed])) fixed = i;
  }
  const int ndir = cfg.start_directions > 0 ? cfg.start_directions : (np == 1 ? 2 : 8);
  const auto dirs = sphere_directions(np, ndir);
  std::vector<PointVec> q0s;
  {
    long total = 1;
    for (int i = 0; i < ell - 1; ++i) total *= cfg.start_q_per_dim;
    for (long idx = 0; idx < total; ++idx) {
      PointVec q = PointVec::Zero(ell);
      long rem = idx;
      for (int i = 0; i < ell; ++i) {
        if (i == fixed) continue;
        q[i] = sys.lattice[i] * static_cast<double>(rem % cfg.start_q_per_dim) / cfg.start_q_per_dim;
        rem /= cfg.start_q_per_dim;
      }
      q0s.push_back(q);
    }
  }
  const double third = prof.third();
  const std::vector<double> shells{-0.5 * third, 0.0, 0.5 * third};
  std::mt19937_64 rng(cfg.seed + 7919ULL * static_cast<std::uint64_t>(run + 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  const PointVec& shear = ctx.shear();
  for (const auto& d : dirs) {
    for (const auto& q0 : q0s) {
      for (double s : shells) {
        Mat smp(sys.dim(), N);
        double guess = 0.0;
        for (int j = 0; j < N; ++j) {
          const double t = static_cast<double>(j) / N;
          const PointVec q = q0 + t * shear.tail(ell);
          guess = gauge.sigma(d, q, guess);
          smp.col(j).head(np) = std::exp(s) * guess * d;
          smp.col(j).tail(ell) = q - t * shear.tail(ell);
        }
        FourierLoop loop = loop_from_samples(ctx, smp);
        for (int m : {-1, 1}) {
          for (int i = 0; i < sys.dim(); ++i) loop.mode(m)[i] += cfg.start_perturbation * normal(rng);
        }
        starts.push_back(std::move(loop));
      }
    }
  }
  return starts;
}

void cross_validate(const GaugeField& gauge, SolutionEntry& e) {
  const auto& sys = gauge.system();
  const int np = sys.np();
  const PointVec z0 = e.solution.state(0.0);
  // Start the period off target so the shooting solve has to find it.
  ShootingProblem prob{gauge, e.solution.k, z0.tail(sys.ell), z0.head(np).normalized(), 1.001 * e.solution.T};
  try {
    const RotationSolution shot = shoot_rotation_orbit(prob);
    WrapPeriods periods = PointVec::Zero(sys.dim());
    for (int i = 0; i < sys.ell; ++i) periods[np + i] = sys.lattice[i];
    e.oracle_hausdorff = hausdorff_distance(e.solution.curve(), shot.curve(), periods, 1024);
    e.oracle_period_rel = std::abs(shot.T - e.solution.T) / std::abs(e.solution.T);
  } catch (const std::exception& ex) {
    e.oracle_error = ex.what();
  }
}

}  // namespace

SolveOutcome run_solve(const RunConfig& cfg) {
  SolveOutcome out;
  Stopwatch sw(out.timings);
  out.cfg = cfg;
  out.sys = checked_system(cfg);
  const auto& sys = out.sys;
  if (sys.ell != sys.n) throw InputError("solve requires l = n");
  if (cfg.k.size() != sys.ell || cfg.k.isZero()) throw InputError("solve requires a nonzero rotation vector");
  if (cfg.surface != SurfaceRule::growth) throw InputError("solve requires energy.surface = growth");
  out.assumptions = check_assumptions(sys);
  if (!out.assumptions.pass) throw InputError("system violates the growth or periodicity assumptions");
  out.ectx = energy_context(sys, cfg.M);
  const GaugeField gauge(sys, out.ectx);
  ExtensionOptions eopts;
  eopts.delta = cfg.delta;
  auto hhat = std::make_shared<const ExtendedHamiltonian>(
      build_extended(gauge, standard_dilation(sys.np(), cfg.delta), eopts));
  out.hhat = hhat;
  out.distinct_tol = cfg.distinct_tol > 0.0 ? cfg.distinct_tol : default_distinct_tol(out.ectx);
  sw.lap("setup");

  // Oracle orbits through q = 0 along +k and -k.
  for (double sign : {1.0, -1.0}) {
    ShootingProblem prob{gauge, cfg.k, PointVec::Zero(sys.ell), sign * unit_k(cfg.k)};
    try {
      SeedOrbit seed;
      seed.label = sign > 0 ? "along_k" : "against_k";
      seed.solution = shoot_rotation_orbit(prob);
      seed.fixed = transfer_to_fixed_period(sys, seed.solution, 1024);
      out.seeds.push_back(std::move(seed));
    } catch (const NumericalError& ex) {
      out.violations.push_back(std::string("seed orbit unavailable: ") + ex.what());
    }
  }
  sw.lap("seeds");

  std::vector<double> thats;
  if (cfg.that_mode == ThatMode::automatic) {
    if (out.seeds.empty()) return out;
    thats.push_back(out.seeds.front().fixed.that);
  } else {
    thats = cfg.that_values;
  }
  if (cfg.sign_sweep) {
    const auto base = thats;
    for (double t : base) {
      if (std::find(thats.begin(), thats.end(), -t) == thats.end()) thats.push_back(-t);
    }
  }
  // Seed diagnostics are informational once That is fixed.
  out.violations.clear();

  ReductionOptions ropts;
  ropts.tol_fp = cfg.tol_fp;
  ropts.tol_crit = cfg.tol_crit;
  ropts.d_cut_override = cfg.d_cut_override;
  ropts.nt_override = cfg.nt_override;
  std::vector<OrbitRecord> records;
  std::vector<RotationSolution> sols;
  for (std::size_t run = 0; run < thats.size(); ++run) {
    const ReductionContext ctx(hhat, thats[run], cfg.k, ropts);
    const auto starts = make_starts(ctx, gauge, out.seeds, cfg, static_cast<int>(run));
    const SearchResult res = find_critical_points(ctx, starts);
    RunSummary rs;
    rs.that = thats[run];
    rs.d_cut = res.context->d_cut();
    rs.d_grid = res.context->d_grid();
    rs.nt = res.context->nt();
    rs.m2_scale = res.context->m2_scale();
    rs.inflations = res.inflations;
    rs.starts = static_cast<int>(starts.size());
    rs.converged = res.converged_starts;
    rs.rejected = res.rejected_starts;
    rs.ambiguous = res.ambiguous_pairs;
    rs.classes = static_cast<int>(res.classes.size());
    for (std::size_t c = 0; c < res.classes.size(); ++c) {
      const auto& cp = res.classes[c];
      SolutionEntry e;
      e.run = static_cast<int>(run);
      e.class_index = static_cast<int>(c);
      e.critical_residual = cp.residual;
      try {
        e.record = extract_orbit_record(*res.context, cp);
        e.solution = to_rotation_solution(gauge, hhat->profile(), e.record);
      } catch (const std::exception&) {
        ++rs.record_failures;
        continue;
      }
      e.loop = res.context->loop_residual(cp.x);
      cross_validate(gauge, e);
      out.solutions.push_back(std::move(e));
    }
    out.runs.push_back(rs);
    sw.lap("run_" + std::to_string(run));
  }

  for (const auto& e : out.solutions) {
    records.push_back(e.record);
    sols.push_back(e.solution);
  }
  out.classification = classify_report(sys, records, sols, out.distinct_tol);
  sw.lap("classify");

  for (std::size_t i = 0; i < out.solutions.size(); ++i) {
    const auto& e = out.solutions[i];
    const auto& s = e.solution;
    const std::string tag = "solution " + std::to_string(i) + ": ";
    if (s.ode_residual > 1e-7) out.violations.push_back(tag + "ODE residual above 1e-7");
    if (s.energy_residual > 1e-8) out.violations.push_back(tag + "energy residual above 1e-8");
    if (s.boundary_residual > 1e-8) out.violations.push_back(tag + "boundary residual above 1e-8");
    if (e.loop.ode > 1e-7) out.violations.push_back(tag + "fixed-period loop residual above 1e-7");
    if (e.loop.closure > 1e-9) out.violations.push_back(tag + "fixed-period loop closure above 1e-9");
  }
  if (out.classification.inconsistencies > 0) {
    out.violations.push_back("g-ratio certificates contradict trace comparison");
  }
  return out;
}

std::string solve_report_json(const SolveOutcome& out) {
  json j;
  j["command"] = "solve";
  j["config"] = config_json(out.cfg);
  j["system"] = {{"name", out.sys.name}, {"n", out.sys.n}, {"ell", out.sys.ell}, {"lattice", vec_json(out.sys.lattice)}};
  j["assumptions"] = assumptions_json(out.assumptions);
  j["energy_context"] = context_json(out.ectx);
  if (out.hhat) {
    const auto& h = *out.hhat;
    j["extension"] = {{"delta", h.profile().delta()}, {"halvings", h.halvings()}, {"r_delta", h.r_delta()},
                      {"N0", h.N0()},                 {"M1", h.M1()},             {"M2", h.M2()},
                      {"delta_plus", h.profile().delta_plus()}};
  }
  json seeds = json::array();
  for (const auto& s : out.seeds) {
    seeds.push_back({{"label", s.label}, {"T", s.solution.T}, {"That", s.fixed.that}});
  }
  j["seeds"] = seeds;
  json runs = json::array();
  for (const auto& r : out.runs) {
    runs.push_back({{"That", r.that},
                    {"d_cut", r.d_cut},
                    {"d_grid", r.d_grid},
                    {"N_t", r.nt},
                    {"M2_scale", r.m2_scale},
                    {"inflations", r.inflations},
                    {"starts", r.starts},
                    {"converged", r.converged},
                    {"rejected", r.rejected},
                    {"ambiguous_pairs", r.ambiguous},
                    {"classes", r.classes},
                    {"record_failures", r.record_failures}});
  }
  j["runs"] = runs;
  json sols = json::array();
  for (std::size_t i = 0; i < out.solutions.size(); ++i) {
    const auto& e = out.solutions[i];
    const auto& r = e.record;
    const auto& s = e.solution;
    json sj = {{"index", i},
               {"run", e.run},
               {"class", e.class_index},
               {"That", r.that},
               {"k", ivec_json(r.k)},
               {"b", r.b},
               {"delta_b", r.delta_b},
               {"g", r.g},
               {"pclass", to_string(r.pclass)},
               {"on_class_boundary", r.on_class_boundary},
               {"shell_translate", vec_json(r.shell_translate)},
               {"n_x", r.n_x},
               {"critical_residual", e.critical_residual},
               {"loop_residual", {{"ode", e.loop.ode}, {"closure", e.loop.closure}, {"level_spread", e.loop.level_spread}}},
               {"T", s.T},
               {"orientation", s.T > 0 ? "forward" : "backward"},
               {"initial_point", vec_json(s.state(0.0))},
               {"residuals", {{"ode", s.ode_residual}, {"energy", s.energy_residual}, {"boundary", s.boundary_residual}}},
               {"representative", out.classification.representative.empty() ? 0 : out.classification.representative[i]},
               {"csv", "solution_" + std::to_string(i) + ".csv"}};
    if (e.oracle_error.empty()) {
      sj["oracle"] = {{"hausdorff", e.oracle_hausdorff}, {"period_rel", e.oracle_period_rel}};
    } else {
      sj["oracle"] = {{"error", e.oracle_error}};
    }
    sols.push_back(sj);
  }
  j["solutions"] = sols;
  const auto& c = out.classification;
  json certs = json::array();
  for (const auto& p : c.pairs) {
    certs.push_back({{"i", p.i},
                     {"j", p.j},
                     {"rho", p.certificate.rho},
                     {"expected", p.certificate.expected},
                     {"certified_distinct", p.certificate.certified_distinct},
                     {"hausdorff", p.verdict.distance},
                     {"distinct", p.verdict.distinct},
                     {"ambiguous", p.verdict.ambiguous},
                     {"inconsistent", p.inconsistent},
                     {"dichotomy_violation", p.dichotomy_violation}});
  }
  j["classification"] = {{"distinct_tol", out.distinct_tol},
                         {"P1", c.p1_count},
                         {"P2", c.p2_count},
                         {"distinct_count", c.distinct_count},
                         {"n_plus_1", out.sys.n + 1},
                         {"inconsistencies", c.inconsistencies},
                         {"dichotomy_violations", c.dichotomy_violations},
                         {"ambiguous_pairs", c.ambiguous_pairs},
                         {"pairs", certs}};
  j["bound_met"] = c.bound_met;
  j["violations"] = out.violations;
  j["exit_code"] = out.exit_code();
  return j.dump(2) + "\n";
}

std::string solution_csv(const HamiltonianSystem& sys, const ExtendedHamiltonian& hhat, const RotationSolution& sol) {
  std::string text = "s";
  for (int i = 0; i < sys.np(); ++i) text += ",p" + std::to_string(i + 1);
  for (int i = 0; i < sys.ell; ++i) text += ",q" + std::to_string(i + 1);
  text += ",H,Hhat\n";
  constexpr int kRows = 1024;
  const Mat z = sol.samples(kRows);
  for (int j = 0; j < kRows; ++j) {
    const PointVec x = z.col(j);
    text += fmt12(sol.T * j / kRows);
    for (Eigen::Index i = 0; i < x.size(); ++i) text += "," + fmt12(x[i]);
    text += "," + fmt12(sys.energy(x)) + "," + fmt12(hhat.value(x)) + "\n";
  }
  return text;
}

void write_solve_artifacts(const SolveOutcome& out, const std::string& dir) {
  const std::filesystem::path base(dir);
  std::filesystem::create_directories(base);
  write_text(base / "report.json", solve_report_json(out));
  write_text(base / "timings.json", timings_json(out.timings).dump(2) + "\n");
  for (std::size_t i = 0; i < out.solutions.size(); ++i) {
    write_text(base / ("solution_" + std::to_string(i) + ".csv"), solution_csv(out.sys, *out.hhat, out.solutions[i].solution));
  }
}

// ---------------------------------------------------------------------------------------------
// verify

namespace {

void add_check(std::vector<CheckResult>& out, std::string name, double value, double threshold, bool passed,
               std::string detail = {}) {
  out.push_back({std::move(name), value, threshold, passed, std::move(detail)});
}

/// Check passes when value <= threshold.
void add_bound(std::vector<CheckResult>& out, std::string name, double value, double threshold,
               std::string detail = {}) {
  add_check(out, std::move(name), value, threshold, value <= threshold, std::move(detail));
}

double one_sided(const AuxProfile& prof, double knot, int order, double side) {
  const double s = std::nextafter(knot, knot + side);
  switch (order) {
    case 0: return prof.f(s);
    case 1: return prof.df(s);
    default: return prof.d2f(s);
  }
}

FourierLoop random_high_loop(std::mt19937_64& rng, int dim, int d_cut, int modes, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  FourierLoop y(dim, modes);
  for (int m = d_cut + 1; m <= modes; ++m) {
    for (int sgn : {-1, 1}) {
      for (int i = 0; i < dim; ++i) y.mode(sgn * m)[i] = scale * normal(rng) / m;
    }
  }
  return y;
}

}  // namespace

std::vector<CheckResult> run_verify(const RunConfig& cfg) {
  std::vector<CheckResult> out;
  if (cfg.surface != SurfaceRule::growth) throw InputError("verify requires energy.surface = growth");
  const HamiltonianSystem sys = checked_system(cfg);
  const int np = sys.np(), ell = sys.ell;
  const AssumptionReport assumptions = check_assumptions(sys);
  add_check(out, "assumptions", assumptions.growth_violation, 0.0, assumptions.pass, "growth and periodicity sampling");

  // Gauge identities and chart round trips.
  RunConfig acfg = cfg;
  const AnalyzeOutcome an = run_analyze(acfg);
  add_bound(out, "gauge_energy", an.energy_defect, 1e-10, std::to_string(an.samples) + " samples");
  add_bound(out, "gauge_homogeneity", an.homogeneity_defect, 1e-10);
  add_bound(out, "chart_round_trip", an.chart_defect, 1e-9);
  const EnergyContext& ectx = an.ectx;
  const GaugeField gauge(sys, ectx);

  // Dilation conformality and the wrong-field fixture.
  const DilationSpec dil = standard_dilation(np, cfg.delta);
  const auto surface = shell_samples(gauge, 0.0, 8, ell == 1 ? 8 : 4);
  add_bound(out, "conformality", verify_conformal(dil, 0.1, surface), 1e-5, "s = 0.1");
  DilationSpec wrong;
  wrong.name = "doubled";
  wrong.np = np;
  wrong.delta = cfg.delta;
  wrong.xi = [np](const PointVec& x) {
    PointVec v = PointVec::Zero(x.size());
    v.head(np) = 2.0 * x.head(np);
    return v;
  };
  wrong.closed_form_flow = [np](double s, const PointVec& x) {
    PointVec y = x;
    y.head(np) *= std::exp(2.0 * s);
    return y;
  };
  const double wrong_defect = verify_conformal(wrong, 0.1, surface);
  add_check(out, "wrong_dilation_rejected", wrong_defect, 1e-5, wrong_defect > 1e-5, "e^{2s} field must fail");

  // Profile knots and closed-form values.
  const AuxProfile prof(cfg.delta);
  double knot = 0.0;
  for (double s : {-prof.third(), 0.0, prof.third()}) {
    for (int order = 0; order < 3; ++order) {
      knot = std::max(knot, std::abs(one_sided(prof, s, order, -1.0) - one_sided(prof, s, order, 1.0)));
    }
  }
  add_bound(out, "profile_knots", knot, 1e-12, "f, f', f'' one-sided limits");
  const double centre = std::max({std::abs(prof.f(0.0) - cfg.delta / 6.0), std::abs(prof.df(0.0) - 1.0),
                                  std::abs(prof.g(0.0) - 1.0)});
  add_bound(out, "profile_centre", centre, 1e-15, "f(0), f'(0), g(0)");
  {
    // Smaller root of x^2 - (3 + delta/2) x + delta, found by bisection.
    const double dp = numerics::bisect([](double x) { return x * x - 3.15 * x + 0.3; }, 0.0, 0.1, 1e-16).x;
    add_bound(out, "delta_plus", std::abs(AuxProfile(0.3).delta_plus() - dp), 1e-6, "delta = 0.3");
  }
  add_bound(out, "g_peak_stationary", std::abs(prof.dg(prof.g_peak_location())), 1e-8);

  // Extension: periodicity, level/shell agreement, transversality.
  ExtensionOptions eopts;
  eopts.delta = cfg.delta;
  const auto hhat = std::make_shared<const ExtendedHamiltonian>(build_extended(gauge, dil, eopts));
  const AuxProfile& hprof = hhat->profile();
  double period = 0.0, level = 0.0, transversal = 0.0;
  for (double s : {-0.6 * hprof.third(), -0.2 * hprof.third(), 0.0, 0.3 * hprof.third(), 0.7 * hprof.third()}) {
    for (const auto& x : shell_samples(gauge, s, 8, ell == 1 ? 16 : 6)) {
      const double v = hhat->value(x);
      level = std::max(level, std::abs(v - hprof.f(s)));
      transversal = std::max(transversal, std::abs(hhat->gradient(x).dot(dil.xi(x)) - hprof.df(s)));
      for (int i = 0; i < sys.dim(); ++i) {
        PointVec y = x;
        y[i] += i < np ? hhat->N0() : sys.lattice[i - np];
        period = std::max(period, std::abs(hhat->value(y) - v));
      }
    }
  }
  add_bound(out, "extension_periodicity", period, 1e-12);
  add_bound(out, "extension_level_shell", level, 1e-8);
  add_bound(out, "extension_transversality", transversal, 1e-7);
  {
    // A tight momentum cell forces at least one halving of a wide profile.
    ExtensionOptions tight;
    tight.delta = 0.9;
    tight.r_delta_override = static_cast<int>(std::floor(an.radius_max * std::exp(0.9)));
    tight.shell_samples = 5;
    tight.direction_samples = 8;
    try {
      const ExtendedHamiltonian h2 = build_extended(gauge, standard_dilation(np, 0.9), tight);
      add_check(out, "cell_safety_halving", h2.halvings(), 1.0, h2.halvings() >= 1,
                "delta 0.9 -> " + fmt12(h2.profile().delta()));
    } catch (const std::exception& ex) {
      add_check(out, "cell_safety_halving", 0.0, 1.0, false, ex.what());
    }
  }

  // Transfer round trip and reduction calculus around the oracle orbit.
  IntVec k = cfg.k;
  if (k.size() != ell || k.isZero()) {
    k = IntVec::Zero(ell);
    k[0] = 1;
  }
  if (ell != sys.n) {
    add_check(out, "reduction", 0.0, 0.0, true, "skipped: requires l = n");
    return out;
  }
  RotationSolution seed;
  FixedPeriodLoop fixed;
  try {
    seed = shoot_rotation_orbit(ShootingProblem{gauge, k, PointVec::Zero(ell), unit_k(k)});
    fixed = transfer_to_fixed_period(sys, seed, 1024);
  } catch (const std::exception& ex) {
    add_check(out, "oracle_seed", 0.0, 0.0, false, ex.what());
    return out;
  }
  ReductionOptions ropts;
  ropts.tol_fp = cfg.tol_fp;
  const ReductionContext ctx(hhat, fixed.that, k, ropts);
  const FourierLoop xl = loop_from_samples(ctx, fixed.samples);
  try {
    const OrbitRecord rec = extract_orbit_record(*hhat, xl, fixed.that, k);
    const RotationSolution back = to_rotation_solution(gauge, hprof, rec);
    WrapPeriods periods = PointVec::Zero(sys.dim());
    for (int i = 0; i < ell; ++i) periods[np + i] = sys.lattice[i];
    add_bound(out, "round_trip_delta_b", std::abs(rec.delta_b), 1e-7);
    add_bound(out, "round_trip_level", std::abs(rec.b - hprof.delta() / 6.0), 1e-8);
    add_bound(out, "round_trip_period", std::abs(back.T - seed.T) / std::abs(seed.T), 1e-6);
    add_bound(out, "round_trip_trace", hausdorff_distance(back.curve(), seed.curve(), periods), 1e-6);
  } catch (const std::exception& ex) {
    add_check(out, "round_trip", 0.0, 0.0, false, ex.what());
  }
  const LoopResidual lr = ctx.loop_residual(xl);
  add_bound(out, "seed_loop_ode", lr.ode, 1e-7);
  add_bound(out, "seed_loop_closure", lr.closure, 1e-9);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Vec z0 = ctx.z_vector(xl);
  const int d_cut = ctx.d_cut(), d_grid = ctx.d_grid(), dim = ctx.dim();
  double ratio = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Vec z = z0;
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] += 0.05 * normal(rng);
    const FourierLoop zl = ctx.z_loop(z);
    const FourierLoop y1 = random_high_loop(rng, dim, d_cut, d_grid, 0.05);
    const FourierLoop y2 = random_high_loop(rng, dim, d_cut, d_grid, 0.05);
    const double den = (y1 - y2).norm();
    ratio = std::max(ratio, (ctx.contraction_map(zl, y1) - ctx.contraction_map(zl, y2)).norm() / den);
  }
  add_bound(out, "contraction_ratio", ratio, 0.5 + 1e-6, "50 random pairs");

  double fd = 0.0, shift_defect = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    Vec z = z0;
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] += 0.02 * normal(rng);
    const Vec grad = ctx.reduced_gradient(z);
    Vec v(z.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
    v.normalize();
    const double h = 1e-4;
    const double central = (ctx.reduced_value(z + h * v) - ctx.reduced_value(z - h * v)) / (2.0 * h);
    fd = std::max(fd, std::abs(central - grad.dot(v)) / std::max(1.0, grad.norm()));
    PointVec shift = PointVec::Zero(dim);
    shift[trial % np] = hhat->N0();
    shift[np + trial % ell] = sys.lattice[trial % ell];
    shift_defect = std::max(shift_defect, (ctx.reduced_gradient(ctx.lattice_shift(z, shift)) - grad).cwiseAbs().maxCoeff());
  }
  add_bound(out, "reduced_gradient_fd", fd, 1e-6, "directional central differences");
  add_bound(out, "reduced_gradient_periodicity", shift_defect, 1e-10);
  return out;
}

std::string verify_table(const std::vector<CheckResult>& checks) {
  std::string text;
  char line[256];
  std::snprintf(line, sizeof line, "%-30s %-14s %-14s %-6s %s\n", "check", "value", "threshold", "result", "detail");
  text += line;
  for (const auto& c : checks) {
    std::snprintf(line, sizeof line, "%-30s %-14.6e %-14.6e %-6s %s\n", c.name.c_str(), c.value, c.threshold,
                  c.passed ? "PASS" : "FAIL", c.detail.c_str());
    text += line;
  }
  return text;
}

// ---------------------------------------------------------------------------------------------
// export

std::vector<std::string> export_artifacts(const RunConfig& cfg, const std::string& dir) {
  const std::filesystem::path base(dir);
  const auto report_path = base / "report.json";
  if (!std::filesystem::exists(report_path)) throw InputError("no report found at " + report_path.string());
  const json report = json::parse(read_text(report_path));
  std::vector<std::string> written;

  const HamiltonianSystem sys = checked_system(cfg);
  const int np = sys.np(), ell = sys.ell;
  const EnergyContext ectx = energy_context(sys, cfg.M, cfg.surface);
  const GaugeField gauge(sys, ectx);

  {
    std::string text = "direction";
    for (int i = 0; i < ell; ++i) text += ",q" + std::to_string(i + 1);
    for (int i = 0; i < np; ++i) text += ",p" + std::to_string(i + 1);
    text += "\n";
    const auto dirs = sphere_directions(np, np == 1 ? 2 : 16);
    const int per_dim = ell == 1 ? 400 : (ell == 2 ? 40 : 8);
    const auto qs = q_grid(sys.lattice, per_dim);
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      for (const auto& q : qs) {
        const PointVec x = gauge.chart_F2(dirs[d], q);
        text += std::to_string(d);
        for (int i = 0; i < ell; ++i) text += "," + fmt12(q[i]);
        for (int i = 0; i < np; ++i) text += "," + fmt12(x[i]);
        text += "\n";
      }
    }
    write_text(base / "surface.csv", text);
    written.push_back("surface.csv");
  }
  {
    const double delta = report.contains("extension") ? report["extension"]["delta"].get<double>() : cfg.delta;
    const AuxProfile prof(delta);
    std::string text = "s,f,df,g\n";
    constexpr int kRows = 1000;
    for (int j = 0; j < kRows; ++j) {
      const double s = -prof.third() + 2.0 * prof.third() * j / (kRows - 1);
      text += fmt12(s) + "," + fmt12(prof.f(s)) + "," + fmt12(prof.df(s)) + "," + fmt12(prof.g(s)) + "\n";
    }
    write_text(base / "profile.csv", text);
    written.push_back("profile.csv");
  }
  if (report.contains("solutions")) {
    for (const auto& s : report["solutions"]) {
      const std::string csv = s["csv"].get<std::string>();
      const auto idx = s["index"].get<int>();
      std::istringstream in(read_text(base / csv));
      std::string line;
      std::getline(in, line);
      std::string text;
      for (int i = 0; i < np; ++i) text += std::string(i ? "," : "") + "p" + std::to_string(i + 1);
      for (int i = 0; i < ell; ++i) text += ",q" + std::to_string(i + 1);
      text += "\n";
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
        if (static_cast<int>(vals.size()) != 1 + np + ell + 2) throw InputError("malformed solution file " + csv);
        for (int i = 0; i < np; ++i) text += std::string(i ? "," : "") + fmt12(vals[1 + i]);
        for (int i = 0; i < ell; ++i) {
          const double L = sys.lattice[i];
          text += "," + fmt12(vals[1 + np + i] - L * std::floor(vals[1 + np + i] / L));
        }
        text += "\n";
      }
      const std::string name = "trace_" + std::to_string(idx) + ".csv";
      write_text(base / name, text);
      written.push_back(name);
    }
  }
  return written;
}

}  // namespace rotsol
