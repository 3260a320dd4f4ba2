#pragma once

#include <string>
#include <vector>

#include "rotsol/reduction.hpp"
#include "rotsol/solution.hpp"

namespace rotsol {

/// A fixed-period loop xhat (1-periodic, sampled at s_j = j / N) and its time scale That.
struct FixedPeriodLoop {
  Mat samples;  ///< dim x N samples of xhat
  double that = 0.0;
  double theta_end = 0.0;        ///< theta(1), equal to T
  double min_transversality = 0.0;  ///< min of H' . xi along the orbit
};

/// Reparametrizes a rotation orbit of H on H^{-1}(M) as a solution of the fixed-period
/// problem: That = int_0^T H' . xi and dtheta/ds = That / (H' . xi). Throws NumericalError when
/// H' . xi vanishes along the orbit.
FixedPeriodLoop transfer_to_fixed_period(const HamiltonianSystem& sys, const RotationSolution& sol, int samples);

enum class PClass { P1, P2 };
const char* to_string(PClass c);

struct OrbitRecord {
  FourierLoop x;
  double that = 0.0;
  IntVec k;
  PointVec shear;
  double delta = 0.0;  ///< profile half-width of the run
  double b = 0.0;
  double b_spread = 0.0;
  double delta_b = 0.0;
  double g = 0.0;  ///< g(delta_b)
  PointVec shell_translate;
  Mat w;  ///< dim x N samples of w on D0 at t_j = j / N
  double shell_error = 0.0;  ///< max |ln alpha(w)|
  int n_x = 1;
  bool n_x_flagged = false;
  PClass pclass = PClass::P2;
  bool on_class_boundary = false;
};

/// Shell data of a fixed-period solution x. Throws NumericalError when Hhat is not constant
/// along the sheared loop, its level leaves (0, delta/3), or the loop crosses momentum cells.
OrbitRecord extract_orbit_record(const ExtendedHamiltonian& hhat, const FourierLoop& x, double that, const IntVec& k,
                                 int samples = 1024);
OrbitRecord extract_orbit_record(const ReductionContext& ctx, const CriticalPoint& cp);

/// Back-transfer of a record to a rotation orbit of H with
/// T = g(delta_b) That int_0^1 dt / (H'(w) . xi(w)). Requires |delta_b| < delta / 3.
RotationSolution to_rotation_solution(const GaugeField& gauge, const AuxProfile& profile, const OrbitRecord& rec,
                                      int samples = 1024);

struct DistinctVerdict {
  double distance = 0.0;
  bool distinct = false;
  bool ambiguous = false;
};

/// Hausdorff comparison of the orbit images with q taken modulo the configuration lattice.
/// Ambiguous when the distance lies in (tol, 100 tol).
DistinctVerdict geometrically_distinct(const HamiltonianSystem& sys, const RotationSolution& a,
                                       const RotationSolution& b, double tol);

struct GRatioCertificate {
  double rho = 0.0;       ///< g(delta_1) That_1 / (g(delta_2) That_2)
  double expected = 0.0;  ///< |k_1| / |k_2|
  bool parallel = true;
  bool certified_distinct = false;
  bool same_class_monotone = false;  ///< equal (k, That), same class, different g
};

/// Necessary condition for two records to project to the same orbit. Throws InputError when
/// either g vanishes.
GRatioCertificate g_ratio_certificate(const OrbitRecord& r1, const OrbitRecord& r2);

struct PairCheck {
  int i = 0;
  int j = 0;
  GRatioCertificate certificate;
  DistinctVerdict verdict;
  bool inconsistent = false;  ///< certified distinct but judged the same
  bool dichotomy_violation = false;
};

struct Classification {
  int p1_count = 0;
  int p2_count = 0;
  int distinct_count = 0;
  std::vector<int> representative;  ///< class representative index per solution
  std::vector<PairCheck> pairs;
  int inconsistencies = 0;
  int dichotomy_violations = 0;
  int ambiguous_pairs = 0;
  bool bound_met = false;  ///< distinct_count >= n + 1
};

/// Partitions records into P1/P2, groups solutions by geometric distinctness, and checks every
/// pair's g-ratio certificate against the trace comparison. records[i] produced solutions[i].
Classification classify_report(const HamiltonianSystem& sys, const std::vector<OrbitRecord>& records,
                               const std::vector<RotationSolution>& solutions, double tol);

/// Default distinctness tolerance 1e-4 (1 + r'').
double default_distinct_tol(const EnergyContext& ctx);

}  // namespace rotsol
