#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rotsol/modification.hpp"

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

// Independent evaluation of the profile from its defining quartic pieces.
double f_ref(double s, double delta) {
  const double c = delta / 3.0;
  if (s <= -c) return 0.0;
  if (s >= c) return c;
  if (s <= 0.0) return std::pow(s + c, 3) / (c * c) - std::pow(s + c, 4) / (2.0 * c * c * c);
  return c + std::pow(s - c, 3) / (c * c) + std::pow(s - c, 4) / (2.0 * c * c * c);
}

}  // namespace

TEST_CASE("profile closed-form values") {
  const AuxProfile prof(0.3);
  CHECK(prof.f(0.0) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(prof.df(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(prof.g(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(prof.f(-0.1) == 0.0);
  CHECK(prof.f(0.1) == doctest::Approx(0.1));
  CHECK(prof.g(-0.1) == 0.0);
  CHECK(prof.g(0.1) == 0.0);
  // Root of x^2 - 3.15 x + 0.3 = 0 evaluated to 16 digits.
  CHECK(std::abs(prof.delta_plus() - 0.0983060574377641) < 1e-15);
  CHECK(prof.delta_plus() > 0.0);
  CHECK(prof.delta_plus() < 0.1);
  CHECK(std::abs(prof.dg(prof.g_peak_location())) < 1e-8);
  for (double s = -0.12; s <= 0.12; s += 0.0037) {
    CHECK(std::abs(prof.f(s) - f_ref(s, 0.3)) < 1e-15);
    CHECK(std::abs(prof.df(s) - (f_ref(s + 1e-6, 0.3) - f_ref(s - 1e-6, 0.3)) / 2e-6) < 1e-7);
  }
  CHECK_THROWS_AS(AuxProfile(0.0), InputError);
  CHECK_THROWS_AS(AuxProfile(1.5), InputError);
}

TEST_CASE("profile is C2 at the knots") {
  const AuxProfile prof(0.3);
  for (double knot : {-0.1, 0.0, 0.1}) {
    const double l = std::nextafter(knot, -1.0), r = std::nextafter(knot, 1.0);
    CHECK(std::abs(prof.f(l) - prof.f(r)) < 1e-12);
    CHECK(std::abs(prof.df(l) - prof.df(r)) < 1e-12);
    CHECK(std::abs(prof.d2f(l) - prof.d2f(r)) < 1e-12);
  }
}

TEST_CASE("g is unimodal with a peak at -delta/3 + delta+") {
  const AuxProfile prof(0.3);
  const double peak = prof.g_peak_location();
  for (double s = -0.1; s < peak; s += 0.001) CHECK(prof.dg(s) >= -1e-12);
  for (double s = peak + 0.001; s < 0.1; s += 0.001) CHECK(prof.dg(s) <= 1e-12);
  const auto both = prof.shells_with_g(1.0);
  REQUIRE(both.size() == 2);
  CHECK(both[0] < peak);
  CHECK(std::abs(both[1]) < 1e-12);
  for (double s : both) CHECK(prof.g(s) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(prof.shells_with_g(prof.g_peak() * 1.01).empty());
  CHECK(prof.shells_with_g(-1.0).empty());
}

TEST_CASE("level to shell inversion") {
  const AuxProfile prof(0.3);
  CHECK(std::abs(prof.level_shell(0.05)) < 1e-14);
  CHECK(prof.level_shell(0.0) == -prof.third());
  CHECK(prof.level_shell(prof.third()) == prof.third());
  CHECK(prof.third() == doctest::Approx(0.1).epsilon(1e-15));
  for (double b : {0.01, 0.03, 0.07, 0.095}) CHECK(prof.f(prof.level_shell(b)) == doctest::Approx(b).epsilon(1e-13));
  CHECK_THROWS_AS(prof.level_shell(0.2), InputError);
}

TEST_CASE("quadratic modification") {
  const auto& p = pendulum();
  CHECK(p.hhat.hbar(pt({3.0, 0.0})) == doctest::Approx(3.5).epsilon(1e-13));
  CHECK(p.hhat.hbar(pt({6.0, 0.0})) == doctest::Approx(14.0).epsilon(1e-13));
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  std::vector<PointVec> pts;
  for (int i = 0; i < 500; ++i) {
    PointVec x = pt({u(rng), u(rng)});
    if (std::abs(x[0]) < 0.5) x[0] = 0.5;
    const double lhs = x[0] * p.hhat.hbar_gradient(x)[0];
    CHECK(std::abs(lhs - 2.0 * p.hhat.hbar(x)) <= 1e-9 * 2.0 * p.hhat.hbar(x));
    pts.push_back(x);
  }
  // alpha^2 = p^2 / (2 (M + cos q)) on the pendulum.
  std::vector<PointVec> grid;
  for (int i = 0; i < 64; ++i) grid.push_back(pt({3.0, 2.0 * pi * i / 64}));
  const auto b = quadratic_bounds(p.hhat, grid);
  CHECK(b.a1 == doctest::Approx(3.5 / 9.0).epsilon(1e-10));
  CHECK(b.a2 == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("extended Hamiltonian construction") {
  const auto& p = pendulum();
  CHECK(p.hhat.r_delta() == 10);
  CHECK(p.hhat.N0() == 22.0);
  CHECK(p.hhat.halvings() == 0);
  CHECK(p.hhat.M1() > 0.0);
  CHECK(p.hhat.M2() > 0.0);
  const double b = p.hhat.profile().delta() / 6.0;
  for (int i = 0; i < 32; ++i) {
    const double q = 2.0 * pi * i / 32;
    const double r = std::sqrt(2.0 * (3.5 + std::cos(q)));
    const PointVec x = pt({i % 2 ? r : -r, q});
    CHECK(std::abs(p.hhat.value(x) - b) < 1e-12);
    CHECK(p.hhat.value(pt({x[0] + 22.0, q})) == p.hhat.value(x));
    CHECK(std::abs(p.hhat.value(pt({x[0], q + 2.0 * pi})) - p.hhat.value(x)) < 1e-12);
    CHECK(p.hhat.value(pt({0.0, q})) == 0.0);
    CHECK(p.hhat.value(pt({11.0, q})) == doctest::Approx(0.1));
    // Transversality Hhat' . xi = f'(0) = 1 on the surface.
    CHECK(p.hhat.gradient(x)[0] * x[0] == doctest::Approx(1.0).epsilon(1e-10));
  }
  for (double s : {-0.08, -0.03, 0.02, 0.09}) {
    const PointVec x = pt({3.0 * std::exp(s), 0.0});
    CHECK(p.hhat.value(x) == doctest::Approx(p.hhat.profile().f(s)).epsilon(1e-12));
  }
}

TEST_CASE("extension rejects nonstandard dilations and halves on unsafe cells") {
  const auto& p = pendulum();
  DilationSpec odd = standard_dilation(1);
  odd.name = "custom";
  CHECK_THROWS_AS(build_extended(p.gauge, odd), InputError);
  ExtensionOptions tight;
  tight.delta = 0.9;
  tight.r_delta_override = 6;
  tight.shell_samples = 5;
  const auto h = build_extended(p.gauge, standard_dilation(1, 0.9), tight);
  CHECK(h.halvings() >= 1);
  CHECK(h.profile().delta() <= 0.45);
  CHECK(h.r_delta() == 6);
}
