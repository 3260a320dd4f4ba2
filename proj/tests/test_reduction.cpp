#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

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
  RotationSolution seed = shoot_rotation_orbit(ShootingProblem{gauge, k, PointVec::Zero(1), PointVec::Ones(1)});
  FixedPeriodLoop fixed = transfer_to_fixed_period(sys, seed, 1024);
  ReductionContext ctx{hhat, fixed.that, k};
  FourierLoop seed_loop = loop_from_samples(ctx, fixed.samples);
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

Vec perturbed(const Vec& z, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec out = z;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += scale * n(rng);
  return out;
}

}  // namespace

TEST_CASE("context sizes follow the cutoff") {
  const auto& c = fx().ctx;
  CHECK(c.d_cut() == spectral_cutoff(fx().fixed.that, fx().hhat->M2()).d_cut);
  CHECK(c.d_grid() == 4 * c.d_cut());
  CHECK(c.nt() == next_pow2(8 * (c.d_grid() + 1)));
  CHECK(c.z_size() == 2 * (2 * c.d_cut() + 1));
  CHECK(c.shear()[1] == doctest::Approx(2.0 * pi));
  CHECK_THROWS_AS(ReductionContext(fx().hhat, fx().fixed.that, IntVec::Zero(1)), InputError);
  CHECK_THROWS_AS(ReductionContext(fx().hhat, 0.0, fx().k), InputError);
}

TEST_CASE("loops inside the flat region") {
  const auto& c = fx().ctx;
  // x = 0 keeps gamma on p = 0 where Hhat vanishes identically.
  const FourierLoop zero(2, c.d_grid());
  const auto b = c.B_gradient(zero);
  const PointVec js = apply_J(c.shear());
  CHECK((PointVec(b.mode(0)) - js).norm() < 1e-14);
  CHECK(b.norm() == doctest::Approx(js.norm()));
  const Vec z0 = Vec::Zero(c.z_size());
  CHECK(c.solve_y(z0).y.norm() == 0.0);
  CHECK(std::abs(c.reduced_value(z0)) < 1e-14);
}

TEST_CASE("directional derivative of the nonlinear term") {
  const auto& c = fx().ctx;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 1.0);
  const FourierLoop x = fx().seed_loop;
  for (int trial = 0; trial < 4; ++trial) {
    FourierLoop h(2, c.d_grid());
    for (int m = -4; m <= 4; ++m) h.mode(m) << n(rng), n(rng);
    h = (1.0 / h.norm()) * h;
    const double eps = 1e-6;
    const double fd = (c.B_value(x + eps * h) - c.B_value(x - eps * h)) / (2.0 * eps);
    CHECK(std::abs(fd - c.B_gradient(x).inner(h)) < 1e-7 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("contraction of the high-mode iteration") {
  const auto& c = fx().ctx;
  std::mt19937_64 rng(32);
  std::normal_distribution<double> n(0.0, 1.0);
  const Vec z0 = c.z_vector(fx().seed_loop);
  for (int trial = 0; trial < 10; ++trial) {
    const FourierLoop zl = c.z_loop(perturbed(z0, 0.05, rng));
    FourierLoop y1(2, c.d_grid()), y2(2, c.d_grid());
    for (int m = c.d_cut() + 1; m <= c.d_grid(); ++m) {
      for (int s : {-1, 1}) {
        y1.mode(s * m) << 0.05 * n(rng) / m, 0.05 * n(rng) / m;
        y2.mode(s * m) << 0.05 * n(rng) / m, 0.05 * n(rng) / m;
      }
    }
    const double ratio = (c.contraction_map(zl, y1) - c.contraction_map(zl, y2)).norm() / (y1 - y2).norm();
    CHECK(ratio <= 0.5 + 1e-6);
  }
  const auto ys = c.solve_y(z0);
  CHECK(ys.max_ratio <= 0.5 + 1e-6);
  CHECK(ys.residual <= c.options().tol_fp);
}

TEST_CASE("lattice periodicity of the reduced problem") {
  const auto& c = fx().ctx;
  std::mt19937_64 rng(33);
  const Vec z = perturbed(c.z_vector(fx().seed_loop), 0.02, rng);
  PointVec shift(2);
  shift << fx().hhat->N0(), -2.0 * pi;
  const Vec zs = c.lattice_shift(z, shift);
  const auto y = c.solve_y(z).y, ys = c.solve_y(zs).y;
  CHECK((y - ys).norm() < 1e-10);
  CHECK((c.reduced_gradient(z) - c.reduced_gradient(zs)).cwiseAbs().maxCoeff() < 1e-10);
  // Values differ by the constant pairing of the shift with J (0, L k).
  const double expected = -shift.dot(apply_J(c.shear()));
  CHECK(std::abs((c.reduced_value(zs) - c.reduced_value(z)) - expected) < 1e-9);
}

TEST_CASE("reduced gradient matches finite differences of the reduced value") {
  const auto& c = fx().ctx;
  std::mt19937_64 rng(34);
  std::normal_distribution<double> n(0.0, 1.0);
  const Vec z = perturbed(c.z_vector(fx().seed_loop), 0.02, rng);
  const Vec g = c.reduced_gradient(z);
  for (int trial = 0; trial < 3; ++trial) {
    Vec v(z.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = n(rng);
    v.normalize();
    const double h = 1e-4;
    const double fd = (c.reduced_value(z + h * v) - c.reduced_value(z - h * v)) / (2.0 * h);
    CHECK(std::abs(fd - g.dot(v)) <= 1e-6 * std::max(1.0, g.norm()));
  }
  const auto lin = c.linearize(z, c.solve_y(z).y);
  Vec v = Vec::Zero(z.size());
  v[3] = 1.0;
  const Vec fd = (c.reduced_gradient(z + 1e-5 * v) - c.reduced_gradient(z - 1e-5 * v)) / 2e-5;
  CHECK((lin.jacobian * v - fd).norm() <= 1e-4 * std::max(1.0, fd.norm()));
}

TEST_CASE("the oracle orbit is a critical point") {
  const auto& c = fx().ctx;
  const Vec z = seed_from_orbit(c, fx().fixed.samples);
  CHECK(c.reduced_gradient(z).norm() <= 1e-6);
  const auto lr = c.loop_residual(fx().seed_loop);
  CHECK(lr.ode <= 1e-7);
  CHECK(lr.closure <= 1e-9);
  CHECK(lr.level == doctest::Approx(fx().hhat->profile().delta() / 6.0).epsilon(1e-8));
}

TEST_CASE("critical point search from the seed and its lattice translate") {
  const auto& c = fx().ctx;
  FourierLoop shifted = fx().seed_loop.time_shifted(0.3);
  shifted.mode(0) += 0.3 * c.shear();
  shifted.mode(0)[0] += fx().hhat->N0();
  shifted.mode(0)[1] += 2.0 * pi;
  const auto res = find_critical_points(c, {fx().seed_loop, shifted});
  REQUIRE(res.classes.size() == 1);
  CHECK(res.converged_starts == 2);
  CHECK(res.classes[0].multiplicity == 2);
  CHECK(res.classes[0].residual <= 1e-9);
  const auto rec = extract_orbit_record(*res.context, res.classes[0]);
  CHECK(std::abs(rec.delta_b) < 1e-7);
  const FourierLoop a = canonical_loop(c, fx().seed_loop), b = canonical_loop(c, shifted);
  CHECK(hausdorff_distance(sheared_curve(c, a), sheared_curve(c, b), full_lattice(c)) < 1e-9);
}
