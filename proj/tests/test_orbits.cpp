#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "rotsol/orbits.hpp"
#include "rotsol/oracle.hpp"

using namespace rotsol;
using std::numbers::pi;

namespace {

struct Fixture {
  HamiltonianSystem sys = build_system("pendulum");
  GaugeField gauge{sys, energy_context(sys, 3.5)};
  std::shared_ptr<const ExtendedHamiltonian> hhat =
      std::make_shared<const ExtendedHamiltonian>(build_extended(gauge, standard_dilation(1)));
  IntVec k = IntVec::Constant(1, 1);
  RotationSolution upper = shoot_rotation_orbit(ShootingProblem{gauge, k, PointVec::Zero(1), PointVec::Ones(1)});
  RotationSolution lower = shoot_rotation_orbit(ShootingProblem{gauge, k, PointVec::Zero(1), -PointVec::Ones(1)});
  FixedPeriodLoop fixed = transfer_to_fixed_period(sys, upper, 1024);
  ReductionContext ctx{hhat, fixed.that, k};
  OrbitRecord rec = extract_orbit_record(*hhat, loop_from_samples(ctx, fixed.samples), fixed.that, k);
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

// Composite Simpson rule on a periodic integrand.
template <typename F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

OrbitRecord fake_record(int k0, double that, double g, PClass c) {
  OrbitRecord r;
  r.k = IntVec::Constant(1, k0);
  r.that = that;
  r.g = g;
  r.pclass = c;
  return r;
}

}  // namespace

TEST_CASE("transfer to the fixed-period problem") {
  const auto& f = fx();
  // That = int p^2 dtheta = int p dq along the upper branch.
  const double that = simpson([](double q) { return std::sqrt(2.0 * (3.5 + std::cos(q))); }, 0.0, 2.0 * pi, 2000);
  CHECK(f.fixed.that == doctest::Approx(that).epsilon(1e-9));
  CHECK(std::abs(f.fixed.theta_end - f.upper.T) < 1e-9);
  CHECK(f.fixed.min_transversality == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(f.fixed.samples.cols() == 1024);
}

TEST_CASE("records of the oracle orbit") {
  const auto& r = fx().rec;
  const double delta = fx().hhat->profile().delta();
  CHECK(std::abs(r.b - delta / 6.0) < 1e-8);
  CHECK(std::abs(r.delta_b) < 1e-7);
  CHECK(r.g == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.pclass == PClass::P2);
  CHECK(r.n_x == 1);
  CHECK(r.shell_error < 1e-7);
  CHECK(std::string(to_string(PClass::P1)) == "P1");
}

TEST_CASE("back-transfer recovers the rotation orbit") {
  const auto& f = fx();
  const auto back = to_rotation_solution(f.gauge, f.hhat->profile(), f.rec);
  const double tq = pendulum_period_quadrature(3.5);
  CHECK(std::abs(back.T - tq) / tq <= 1e-6);
  CHECK(back.ode_residual < 1e-7);
  CHECK(back.energy_residual < 1e-8);
  CHECK(back.boundary_residual < 1e-8);
  const PointVec jump = back.state(back.T) - back.state(0.0);
  CHECK(std::abs(jump[1] - 2.0 * pi) < 1e-9);
  CHECK(std::abs(jump[0]) < 1e-9);
  WrapPeriods per = PointVec::Zero(2);
  per[1] = 2.0 * pi;
  CHECK(hausdorff_distance(back.curve(), f.upper.curve(), per) < 1e-6);
}

TEST_CASE("geometric distinctness") {
  const auto& f = fx();
  const double tol = default_distinct_tol(f.gauge.context());
  RotationSolution shifted = f.upper;
  shifted.loop = shifted.loop.time_shifted(0.27);
  shifted.loop.mode(0) += 0.27 * shifted.shear;
  CHECK_FALSE(geometrically_distinct(f.sys, f.upper, shifted, tol).distinct);
  RotationSolution translated = f.upper;
  translated.loop.mode(0)[1] += 4.0 * pi;
  CHECK_FALSE(geometrically_distinct(f.sys, f.upper, translated, tol).distinct);
  const auto v = geometrically_distinct(f.sys, f.upper, f.lower, tol);
  CHECK(v.distinct);
  CHECK_FALSE(v.ambiguous);
  // Every upper point has p >= sqrt(5) and every lower point p <= -sqrt(5).
  CHECK(v.distance >= 2.0 * std::sqrt(5.0) - 1e-9);
}

TEST_CASE("g-ratio certificates") {
  const auto same = g_ratio_certificate(fx().rec, fx().rec);
  CHECK(same.rho == doctest::Approx(1.0));
  CHECK(same.expected == doctest::Approx(1.0));
  CHECK_FALSE(same.certified_distinct);

  const AuxProfile prof(0.3);
  const double s1 = -0.09, s2 = -0.05;
  const auto a = fake_record(1, 10.0, prof.g(s1), PClass::P1);
  const auto b = fake_record(1, 10.0, prof.g(s2), PClass::P1);
  const auto c = g_ratio_certificate(a, b);
  CHECK(c.certified_distinct);
  CHECK(c.same_class_monotone);

  const auto k1 = fake_record(1, 5.0, 1.0, PClass::P2);
  CHECK_FALSE(g_ratio_certificate(k1, fake_record(2, 10.0, 1.0, PClass::P2)).certified_distinct);
  const auto d = g_ratio_certificate(k1, fake_record(2, 5.0 / 0.7, 1.0, PClass::P2));
  CHECK(d.rho == doctest::Approx(0.7));
  CHECK(d.certified_distinct);
  CHECK_THROWS_AS(g_ratio_certificate(k1, fake_record(1, 5.0, 0.0, PClass::P1)), InputError);
}

TEST_CASE("classification") {
  const auto& f = fx();
  const auto empty = classify_report(f.sys, {}, {}, 1e-3);
  CHECK(empty.distinct_count == 0);
  CHECK_FALSE(empty.bound_met);

  OrbitRecord lower_rec = f.rec;
  lower_rec.that = -f.rec.that;
  const auto cls = classify_report(f.sys, {f.rec, lower_rec}, {f.upper, f.lower}, default_distinct_tol(f.gauge.context()));
  CHECK(cls.distinct_count == 2);
  CHECK(cls.bound_met);
  CHECK(cls.inconsistencies == 0);
  CHECK(cls.p2_count == 2);
  REQUIRE(cls.representative.size() == 2);
  CHECK(cls.representative[1] == 1);
}
