#include "rotsol/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "rotsol/numerics.hpp"

namespace rotsol {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// H' . xi for the standard dilation xi = (p, 0).
double transversality(const HamiltonianSystem& sys, const PointVec& z) {
  const int np = sys.np();
  return sys.gradient(z).head(np).dot(z.head(np));
}

/// Real trigonometric interpolant of a 1-periodic scalar sampled at t_j = j / N, with its
/// mean and a zero-mean antiderivative.
class ScalarSeries {
 public:
  explicit ScalarSeries(const std::vector<double>& samples) {
    const int N = static_cast<int>(samples.size());
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, samples);
    mean_ = spec[0].real() / N;
    const int top = N / 2 - 1;
    a_.resize(top);
    b_.resize(top);
    for (int m = 1; m <= top; ++m) {
      a_[m - 1] = 2.0 * spec[m].real() / N;
      b_[m - 1] = -2.0 * spec[m].imag() / N;
    }
  }
  double mean() const { return mean_; }
  double value(double t) const {
    double v = mean_;
    for (std::size_t m = 1; m <= a_.size(); ++m) {
      v += a_[m - 1] * std::cos(kTwoPi * m * t) + b_[m - 1] * std::sin(kTwoPi * m * t);
    }
    return v;
  }
  /// int_0^t value.
  double integral(double t) const {
    double v = mean_ * t;
    for (std::size_t m = 1; m <= a_.size(); ++m) {
      const double w = kTwoPi * m;
      v += a_[m - 1] * std::sin(w * t) / w + b_[m - 1] * (1.0 - std::cos(w * t)) / w;
    }
    return v;
  }

 private:
  double mean_ = 0.0;
  std::vector<double> a_, b_;
};

int gcd_of(const IntVec& k) {
  int g = 0;
  for (int i = 0; i < k.size(); ++i) g = std::gcd(g, std::abs(k[i]));
  return g;
}

}  // namespace

const char* to_string(PClass c) { return c == PClass::P1 ? "P1" : "P2"; }

FixedPeriodLoop transfer_to_fixed_period(const HamiltonianSystem& sys, const RotationSolution& sol, int samples) {
  const int dim = sys.dim();
  numerics::DormandPrince::Options o;
  o.rtol = 1e-13;
  o.atol = 1e-13;
  FixedPeriodLoop out;
  out.min_transversality = std::numeric_limits<double>::infinity();
  auto check = [&](const PointVec& z) {
    const double c = transversality(sys, z);
    out.min_transversality = std::min(out.min_transversality, c);
    if (!(c > 1e-12)) throw NumericalError("transversality H' . xi lost along the orbit");
    return c;
  };

  // That = int_0^T H' . xi dtheta, accumulated alongside the orbit.
  numerics::DormandPrince theta_dp(
      [&](double, const Vec& y, Vec& dy) {
        const PointVec z = y.head(dim);
        dy.resize(dim + 1);
        dy.head(dim) = sys.vector_field(z);
        dy[dim] = transversality(sys, z);
      },
      o);
  const PointVec z0 = sol.state(0.0);
  Vec y0(dim + 1);
  y0 << z0, 0.0;
  out.that = theta_dp.integrate(0.0, y0, sol.T)[dim];

  // In the s variable: dz/ds = That J H' / (H' . xi), dtheta/ds = That / (H' . xi).
  numerics::DormandPrince s_dp(
      [&](double, const Vec& y, Vec& dy) {
        const PointVec z = y.head(dim);
        const double c = check(z);
        dy.resize(dim + 1);
        dy.head(dim) = (out.that / c) * sys.vector_field(z);
        dy[dim] = out.that / c;
      },
      o);
  std::vector<double> times(samples);
  for (int j = 1; j <= samples; ++j) times[j - 1] = static_cast<double>(j) / samples;
  const auto states = s_dp.integrate_dense(0.0, y0, times);
  const PointVec shear = rotation_shear(sys, sol.k);
  out.samples.resize(dim, samples);
  out.samples.col(0) = z0;
  for (int j = 1; j < samples; ++j) {
    out.samples.col(j) = PointVec(states[j - 1].head(dim)) - times[j - 1] * shear;
  }
  out.theta_end = states.back()[dim];
  return out;
}

OrbitRecord extract_orbit_record(const ExtendedHamiltonian& hhat, const FourierLoop& x, double that, const IntVec& k,
                                 int samples) {
  const auto& sys = hhat.system();
  const int np = sys.np();
  const auto& prof = hhat.profile();
  OrbitRecord rec;
  rec.x = x;
  rec.that = that;
  rec.k = k;
  rec.shear = rotation_shear(sys, k);
  rec.delta = prof.delta();

  const int N = std::max(next_pow2(samples), next_pow2(4 * (x.modes() + 1)));
  Mat gamma = x.grid_eval(N);
  for (int j = 0; j < N; ++j) gamma.col(j) += (static_cast<double>(j) / N) * rec.shear;

  double lo = std::numeric_limits<double>::infinity(), hi = -lo, acc = 0.0;
  for (int j = 0; j < N; ++j) {
    const double h = hhat.value(gamma.col(j));
    lo = std::min(lo, h);
    hi = std::max(hi, h);
    acc += h;
  }
  rec.b = acc / N;
  rec.b_spread = hi - lo;
  if (rec.b_spread > 1e-6 * prof.delta()) throw NumericalError("Hhat is not constant along the loop");
  if (!(rec.b > 0.0 && rec.b < prof.third())) throw NumericalError("loop level outside (0, delta/3)");
  rec.delta_b = prof.level_shell(rec.b);
  rec.g = prof.g(rec.delta_b);

  rec.shell_translate = hhat.cell_offset(gamma.col(0));
  for (int j = 1; j < N; ++j) {
    if ((hhat.cell_offset(gamma.col(j)) - rec.shell_translate).cwiseAbs().maxCoeff() > 1e-9) {
      throw NumericalError("loop crosses momentum cells");
    }
  }
  const double scale = std::exp(-rec.delta_b);
  rec.w = gamma;
  for (int j = 0; j < N; ++j) {
    rec.w.col(j).head(np) = scale * (gamma.col(j).head(np) - rec.shell_translate.head(np));
    rec.shell_error = std::max(rec.shell_error, std::abs(hhat.gauge().shell_coordinate(rec.w.col(j))));
  }

  // Minimal period of the projected orbit: largest divisor j of gcd(k) with gamma(t + 1/j) = gamma(t).
  const int g = gcd_of(k);
  rec.n_x = 1;
  rec.n_x_flagged = g > 64;
  const Mat base = x.grid_eval(N);
  for (int j = std::min(g, 64); j > 1; --j) {
    if (g % j != 0) continue;
    const Mat shifted = x.time_shifted(1.0 / j).grid_eval(N);
    double err = 0.0;
    for (int i = 0; i < N; ++i) {
      PointVec d = PointVec(shifted.col(i)) - PointVec(base.col(i)) + rec.shear / j;
      d.head(np) *= scale;
      for (int c = 0; c < sys.ell; ++c) d[np + c] = wrap_centered(d[np + c], sys.lattice[c]);
      err = std::max(err, d.cwiseAbs().maxCoeff());
    }
    if (err <= 1e-7) {
      rec.n_x = j;
      break;
    }
  }

  const double edge = prof.g_peak_location();
  rec.pclass = rec.delta_b <= edge ? PClass::P1 : PClass::P2;
  rec.on_class_boundary = std::abs(rec.delta_b - edge) <= 1e-12;
  return rec;
}

OrbitRecord extract_orbit_record(const ReductionContext& ctx, const CriticalPoint& cp) {
  return extract_orbit_record(ctx.hhat(), cp.x, ctx.that(), ctx.k(), std::max(1024, ctx.nt()));
}

RotationSolution to_rotation_solution(const GaugeField& gauge, const AuxProfile& profile, const OrbitRecord& rec,
                                      int samples) {
  if (!(std::abs(rec.delta_b) < profile.third())) throw InputError("shell coordinate must satisfy |delta_b| < delta/3");
  const double g = profile.g(rec.delta_b);
  if (!(g > 0.0)) throw InputError("g(delta_b) vanishes");
  const auto& sys = gauge.system();
  const int Nw = static_cast<int>(rec.w.cols());
  Mat periodic = rec.w;
  std::vector<double> inv(Nw);
  for (int j = 0; j < Nw; ++j) {
    const double t = static_cast<double>(j) / Nw;
    const double c = transversality(sys, rec.w.col(j));
    if (!(c > 1e-12)) throw NumericalError("transversality H' . xi lost along the orbit");
    inv[j] = 1.0 / c;
    periodic.col(j) -= t * rec.shear;
  }
  const FourierLoop wl = grid_fit(periodic, Nw / 4 - 1).loop;
  const ScalarSeries h(inv);
  const double T = g * rec.that * h.mean();

  // s(t) = g That int_0^t h; invert on the uniform s grid.
  Mat z(sys.dim(), samples);
  for (int j = 0; j < samples; ++j) {
    const double target = h.mean() * j / samples;
    double t = static_cast<double>(j) / samples;
    for (int it = 0; it < 50; ++it) {
      const double dt = (h.integral(t) - target) / h.value(t);
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    z.col(j) = wl.eval(t) + t * rec.shear;
  }
  return make_rotation_solution(sys, gauge.energy(), rec.k, T, z);
}

DistinctVerdict geometrically_distinct(const HamiltonianSystem& sys, const RotationSolution& a,
                                       const RotationSolution& b, double tol) {
  WrapPeriods periods = PointVec::Zero(sys.dim());
  for (int i = 0; i < sys.ell; ++i) periods[sys.np() + i] = sys.lattice[i];
  DistinctVerdict v;
  const double coarse = hausdorff_distance(a.curve(), b.curve(), periods, 128);
  v.distance = coarse > 1000.0 * tol ? coarse : hausdorff_distance(a.curve(), b.curve(), periods, 1024);
  v.distinct = v.distance > tol;
  v.ambiguous = v.distance > tol && v.distance < 100.0 * tol;
  return v;
}

GRatioCertificate g_ratio_certificate(const OrbitRecord& r1, const OrbitRecord& r2) {
  if (!(r1.g > 0.0 && r2.g > 0.0)) throw InputError("g_ratio_certificate: g(delta_b) must be positive");
  GRatioCertificate c;
  c.rho = r1.g * r1.that / (r2.g * r2.that);
  const Vec k1 = r1.k.cast<double>(), k2 = r2.k.cast<double>();
  c.expected = k1.norm() / k2.norm();
  for (int i = 0; i < r1.k.size() && c.parallel; ++i) {
    for (int j = i + 1; j < r1.k.size(); ++j) {
      if (static_cast<long>(r1.k[i]) * r2.k[j] != static_cast<long>(r1.k[j]) * r2.k[i]) c.parallel = false;
    }
  }
  c.certified_distinct = !c.parallel || std::abs(std::abs(c.rho) - c.expected) > 1e-6 * c.expected;
  const bool same_run = r1.k == r2.k && std::abs(r1.that - r2.that) <= 1e-12 * std::abs(r1.that);
  c.same_class_monotone =
      same_run && r1.pclass == r2.pclass && std::abs(r1.g - r2.g) > 1e-6 * std::max(r1.g, r2.g);
  return c;
}

double default_distinct_tol(const EnergyContext& ctx) { return 1e-4 * (1.0 + ctx.rhigh); }

Classification classify_report(const HamiltonianSystem& sys, const std::vector<OrbitRecord>& records,
                               const std::vector<RotationSolution>& solutions, double tol) {
  if (records.size() != solutions.size()) throw InputError("classify_report: records and solutions differ in length");
  Classification out;
  const int count = static_cast<int>(solutions.size());
  for (const auto& r : records) {
    if (r.pclass == PClass::P1 || r.on_class_boundary) ++out.p1_count;
    if (r.pclass == PClass::P2 || r.on_class_boundary) ++out.p2_count;
  }
  out.representative.assign(count, -1);
  for (int i = 0; i < count; ++i) {
    for (int j = i + 1; j < count; ++j) {
      PairCheck pc;
      pc.i = i;
      pc.j = j;
      pc.certificate = g_ratio_certificate(records[i], records[j]);
      pc.verdict = geometrically_distinct(sys, solutions[i], solutions[j], tol);
      pc.inconsistent = pc.certificate.certified_distinct && !pc.verdict.distinct;
      const bool same_run = records[i].k == records[j].k &&
                            std::abs(records[i].that - records[j].that) <= 1e-12 * std::abs(records[i].that);
      pc.dichotomy_violation = same_run && records[i].pclass == records[j].pclass &&
                               std::abs(records[i].g - records[j].g) <= 1e-9 && pc.verdict.distinct;
      out.inconsistencies += pc.inconsistent;
      out.dichotomy_violations += pc.dichotomy_violation;
      out.ambiguous_pairs += pc.verdict.ambiguous;
      out.pairs.push_back(pc);
    }
  }
  auto verdict = [&](int i, int j) -> const DistinctVerdict& {
    const int a = std::min(i, j), b = std::max(i, j);
    // pairs are stored in lexicographic (i, j) order
    const int idx = a * count - a * (a + 1) / 2 + (b - a - 1);
    return out.pairs[idx].verdict;
  };
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < i && out.representative[i] < 0; ++j) {
      if (out.representative[j] == j && !verdict(i, j).distinct) out.representative[i] = j;
    }
    if (out.representative[i] < 0) {
      out.representative[i] = i;
      ++out.distinct_count;
    }
  }
  out.bound_met = out.distinct_count >= sys.n + 1;
  return out;
}

}  // namespace rotsol
