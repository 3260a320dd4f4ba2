#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rotsol/hamiltonians.hpp"

using namespace rotsol;
using std::numbers::pi;

namespace {

PointVec pt(std::initializer_list<double> v) {
  PointVec x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

}  // namespace

TEST_CASE("catalog energies") {
  const auto pend = build_system("pendulum");
  CHECK(pend.n == 1);
  CHECK(pend.ell == 1);
  CHECK(pend.energy(pt({2.0, 0.0})) == doctest::Approx(1.0).epsilon(1e-15));
  const auto cp = build_system("coupled_pendulum");
  CHECK(cp.np() == 2);
  CHECK(cp.r == doctest::Approx(2.1));
  CHECK(cp.energy(pt({1.0, 1.0, 0.0, 0.0})) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("pendulum periodicity and gradient") {
  const auto sys = build_system("pendulum");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const double p = u(rng), q = u(rng);
    CHECK(std::abs(sys.energy(pt({p, q + 2.0 * pi})) - sys.energy(pt({p, q}))) < 1e-12);
    const PointVec g = sys.gradient(pt({p, q}));
    CHECK(g[0] == doctest::Approx(p).epsilon(1e-14));
    CHECK(g[1] == doctest::Approx(std::sin(q)).epsilon(1e-14));
  }
}

TEST_CASE("gradient matches finite differences of the energy") {
  const auto sys = build_system("coupled_pendulum");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int s = 0; s < 20; ++s) {
    PointVec x(4);
    for (int i = 0; i < 4; ++i) x[i] = u(rng);
    const PointVec g = sys.gradient(x);
    for (int i = 0; i < 4; ++i) {
      PointVec a = x, b = x;
      a[i] += 1e-6;
      b[i] -= 1e-6;
      const double fd = (sys.energy(a) - sys.energy(b)) / 2e-6;
      CHECK(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, std::abs(g[i])));
    }
    const PointMat h = sys.hessian(x);
    CHECK(h(0, 0) == doctest::Approx(1.0));
    CHECK(h(2, 2) == doctest::Approx(std::cos(x[2])).epsilon(1e-8));
  }
}

TEST_CASE("custom trig systems") {
  SystemSpec spec;
  spec.name = "custom_trig";
  spec.n = 1;
  spec.terms = {{-1.0, {1.0}}};
  spec.mu = 1.0;
  spec.r = 2.0;
  const auto sys = build_system(spec);
  CHECK(sys.energy(pt({2.0, 0.0})) == doctest::Approx(1.0));

  spec.terms = {{-1.0, {0.5}}};
  CHECK_THROWS_AS(build_system(spec), InputError);
  spec.terms = {{-1.0, {1.0}}};
  spec.mu = 0.0;
  CHECK_THROWS_AS(build_system(spec), InputError);
  CHECK_THROWS_AS(build_system("double_pendulum"), InputError);
}

TEST_CASE("assumption checks") {
  CHECK(check_assumptions(build_system("pendulum")).pass);
  CHECK(check_assumptions(build_system("coupled_pendulum")).pass);

  SystemSpec spec;
  spec.name = "pendulum";
  spec.r = 1.0;
  const auto rep = check_assumptions(build_system(spec));
  CHECK_FALSE(rep.pass);
  // H(1, 0) = -1/2, so positivity fails by at least mu * 1/2.
  CHECK(rep.positivity_violation >= 0.5 - 1e-9);
}

TEST_CASE("energy context closed forms") {
  const auto pend = energy_context(build_system("pendulum"), 3.5);
  CHECK(pend.Mstar == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(pend.a == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(pend.rhigh == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(pend.rlow == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));

  const auto cp = energy_context(build_system("coupled_pendulum"), 4.5);
  CHECK(cp.Mstar == doctest::Approx(0.5 * 2.1 * 2.1 + 2.0).epsilon(1e-9));
  CHECK(cp.rlow == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));

  CHECK_THROWS_AS(energy_context(build_system("pendulum"), 2.0), InputError);
}

TEST_CASE("radial level root and sphere directions") {
  const auto sys = build_system("pendulum");
  const double s = radial_level_root(sys, 3.5, pt({1.0}), pt({0.0}), 0.5, 20.0, 1.0);
  CHECK(s == doctest::Approx(3.0).epsilon(1e-12));
  const auto dirs1 = sphere_directions(1, 2);
  REQUIRE(dirs1.size() == 2);
  CHECK(dirs1[0][0] * dirs1[1][0] == doctest::Approx(-1.0));
  for (const auto& d : sphere_directions(3, 10)) CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-14));
}
