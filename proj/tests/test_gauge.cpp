#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rotsol/gauge.hpp"

using namespace rotsol;
using std::numbers::pi;

namespace {

PointVec pt(std::initializer_list<double> v) {
  PointVec x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

GaugeField pendulum_gauge(double M = 3.5) {
  const auto sys = build_system("pendulum");
  return GaugeField(sys, energy_context(sys, M));
}

// Upper branch of the pendulum energy curve.
double pendulum_radius(double M, double q) { return std::sqrt(2.0 * (M + std::cos(q))); }

}  // namespace

TEST_CASE("pendulum radial section") {
  const auto g = pendulum_gauge();
  CHECK(g.sigma(pt({1.0}), pt({0.0})) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(g.sigma(pt({1.0}), pt({pi})) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-13));
  CHECK(g.sigma(pt({-1.0}), pt({pi})) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-13));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 50; ++i) {
    const double q = u(rng);
    CHECK(std::abs(g.sigma(pt({1.0}), pt({q + 2.0 * pi})) - g.sigma(pt({1.0}), pt({q}))) < 1e-12);
    CHECK(g.sigma(pt({1.0}), pt({q})) == doctest::Approx(pendulum_radius(3.5, q)).epsilon(1e-12));
  }
}

TEST_CASE("gauge values and homogeneity") {
  const auto g = pendulum_gauge();
  CHECK(g.alpha(pt({3.0, 0.0})) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g.alpha(pt({6.0, 0.0})) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(g.shell_coordinate(pt({6.0, 0.0})) == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
  for (int i = 0; i < 100; ++i) {
    const double q = u(rng);
    const PointVec x = pt({-pendulum_radius(3.5, q), q});
    CHECK(std::abs(g.alpha(x) - 1.0) < 1e-13);
    CHECK(std::abs(g.shell_coordinate(pt({std::exp(0.1) * x[0], q})) - 0.1) < 1e-12);
  }
}

TEST_CASE("gauge gradient") {
  const auto g = pendulum_gauge();
  const auto jet = g.jet(pt({3.0, 0.0}));
  // u = 3, H_p = 3, H_q = sin 0 = 0.
  CHECK(jet.gradient[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(std::abs(jet.gradient[1]) < 1e-14);

  const auto sys = build_system("coupled_pendulum");
  const GaugeField cg(sys, energy_context(sys, 4.5));
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int s = 0; s < 200; ++s) {
    PointVec x(4);
    for (int i = 0; i < 4; ++i) x[i] = u(rng);
    if (x.head(2).norm() < 1.0) continue;
    const PointVec grad = cg.alpha_gradient(x);
    for (int i = 0; i < 4; ++i) {
      PointVec a = x, b = x;
      a[i] += 1e-6;
      b[i] -= 1e-6;
      const double fd = (cg.alpha(a) - cg.alpha(b)) / 2e-6;
      CHECK(std::abs(fd - grad[i]) <= 1e-6 * std::max(1.0, grad.norm()));
    }
    PointVec y = x;
    y.head(2) *= 1.7;
    CHECK((cg.alpha_gradient(y).head(2) - grad.head(2)).norm() < 1e-10);
  }
}

TEST_CASE("surface charts") {
  const auto g = pendulum_gauge();
  const PointVec x = g.chart_F2(pt({1.0}), pt({0.0}));
  CHECK(x[0] == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(x[1] == 0.0);
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
  for (int i = 0; i < 100; ++i) {
    const double q = u(rng);
    const PointVec s = pt({pendulum_radius(3.5, q) * (i % 2 ? 1.0 : -1.0), q});
    const PhasePoint c = g.chart_F1(s);
    CHECK((g.chart_F2(c.p, c.q) - s).cwiseAbs().maxCoeff() < 1e-9);
  }
  CHECK_THROWS_AS(g.chart_F1(pt({5.0, 0.0})), InputError);
  CHECK_THROWS_AS(g.chart_F2(pt({2.0}), pt({0.0})), InputError);
}

TEST_CASE("coupled pendulum surface radii span the closed-form range") {
  const auto sys = build_system("coupled_pendulum");
  const GaugeField g(sys, energy_context(sys, 3.0, SurfaceRule::star_shaped));
  double lo = 1e9, hi = 0.0;
  for (const auto& d : sphere_directions(2, 8)) {
    for (int i = 0; i <= 16; ++i) {
      for (int j = 0; j <= 16; ++j) {
        const double r = g.chart_F2(d, pt({2.0 * pi * i / 16, 2.0 * pi * j / 16})).head(2).norm();
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    }
  }
  CHECK(lo == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(hi == doctest::Approx(std::sqrt(10.0)).epsilon(1e-12));
}

TEST_CASE("gauge requires an energy above the threshold") {
  const auto sys = build_system("pendulum");
  EnergyContext ctx = energy_context(sys, 3.5);
  ctx.M = ctx.Mstar;
  CHECK_THROWS_AS(GaugeField(sys, ctx), InputError);
}
