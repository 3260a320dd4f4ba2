#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rotsol/modification.hpp"
#include "rotsol/numerics.hpp"

using namespace rotsol;
using std::numbers::pi;

namespace {

PointVec pt(std::initializer_list<double> v) {
  PointVec x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

struct Pendulum {
  HamiltonianSystem sys = build_system("pendulum");
  GaugeField gauge{sys, energy_context(sys, 3.5)};
  ExtendedHamiltonian hhat = build_extended(gauge, standard_dilation(1));
};

const Pendulum& pendulum() {
  static const Pendulum p;
  return p;
}

std::vector<PointVec> surface_points(int count) {
  std::vector<PointVec> out;
  for (int i = 0; i < count; ++i) {
    const double q = 2.0 * pi * (i + 0.3) / count;
    const double r = std::sqrt(2.0 * (3.5 + std::cos(q)));
    out.push_back(pt({i % 2 ? r : -r, q}));
  }
  return out;
}

/// Scaled flow p -> e^s p, q -> e^s q of the field xi = (p, q).
DilationSpec full_scaling() {
  DilationSpec d;
  d.name = "full_scaling";
  d.np = 1;
  d.xi = [](const PointVec& x) { return x; };
  return d;
}

}  // namespace

TEST_CASE("standard dilation flow") {
  const auto d = standard_dilation(1);
  const PointVec x = pt({3.0, 0.4});
  CHECK(dilation_flow(d, 0.0, x) == x);
  const PointVec comp = dilation_flow(d, 0.1, dilation_flow(d, 0.15, x));
  CHECK((comp - dilation_flow(d, 0.25, x)).norm() < 1e-12);
  const PointVec y = dilation_flow(d, 0.2, pt({3.0, 0.0}));
  CHECK(pendulum().gauge.shell_coordinate(y) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("integrated flow agrees with the closed form") {
  const auto d = standard_dilation(1);
  const PointVec x = pt({3.0, 0.0});
  const PointVec y = integrate_dilation(d, 0.29, x);
  CHECK(std::abs(y[0] - 3.0 * std::exp(0.29)) < 1e-9);
  CHECK(std::abs(y[1]) < 1e-12);
  CHECK(integrate_dilation(d, 0.0, x) == x);
  CHECK((integrate_dilation(d, -0.25, integrate_dilation(d, 0.25, x)) - x).norm() < 1e-9);
  CHECK_THROWS_AS(integrate_dilation(d, 0.3, x), InputError);
}

TEST_CASE("conformality of the dilation flow") {
  const auto pts = surface_points(20);
  for (double s : {-0.2, 0.0, 0.1, 0.25}) CHECK(verify_conformal(standard_dilation(1), s, pts) <= 1e-6);
  // Scaling both p and q multiplies the form by e^{2s}.
  const double wrong = verify_conformal(full_scaling(), 0.1, pts);
  CHECK(wrong == doctest::Approx((std::exp(0.2) - std::exp(0.1)) * std::sqrt(2.0)).epsilon(1e-5));
}

TEST_CASE("orbit transport between shells") {
  const auto& p = pendulum();
  const auto d = standard_dilation(1);
  // X_Hhat orbit on the energy surface sampled with a fine step.
  numerics::DormandPrince ode([&](double, const Vec& y, Vec& dy) { dy = p.hhat.vector_field(PointVec(y)); },
                              {1e-12, 1e-12, 1e-14, 2000000});
  SampledOrbit orbit;
  orbit.dt = 1e-3;
  std::vector<double> times;
  for (int j = 0; j <= 400; ++j) times.push_back(j * orbit.dt);
  for (const auto& v : ode.integrate_dense(0.0, Vec(pt({3.0, 0.0})), times)) orbit.states.push_back(PointVec(v));

  const auto same = transport_orbit(d, p.hhat, orbit, 0.0, 0.0);
  CHECK(same.factor == 1.0);
  CHECK(same.residual <= 1e-6);
  const auto moved = transport_orbit(d, p.hhat, orbit, 0.0, 0.05);
  const auto& prof = p.hhat.profile();
  CHECK(moved.factor == doctest::Approx(std::exp(0.05) * prof.df(0.0) / prof.df(0.05)).epsilon(1e-14));
  CHECK(moved.residual <= 1e-6);
  CHECK(p.gauge.shell_coordinate(moved.orbit.states[100]) == doctest::Approx(0.05).epsilon(1e-10));
  CHECK_THROWS_AS(transport_orbit(d, p.hhat, orbit, 0.0, prof.third()), InputError);
}

TEST_CASE("vector fields of functions of the energy are parallel on the surface") {
  const auto& p = pendulum();
  const auto d = standard_dilation(1);
  const auto pts = surface_points(24);
  CHECK(field_ratio_check([&](const PointVec& x) { return p.sys.gradient(x); }, p.hhat, d, pts) <= 1e-6);
  CHECK(field_ratio_check([&](const PointVec& x) { return p.hhat.hbar_gradient(x); }, p.hhat, d, pts) <= 1e-6);
  CHECK(field_ratio_check([&](const PointVec& x) { return p.hhat.gradient(x); }, p.hhat, d, pts) <= 1e-14);
  for (const auto& x : pts) CHECK(p.hhat.hbar_gradient(x).dot(d.xi(x)) == doctest::Approx(2.0 * 3.5).epsilon(1e-10));
}
