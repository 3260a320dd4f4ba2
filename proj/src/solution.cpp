#include "rotsol/solution.hpp"

#include <algorithm>

#include "rotsol/numerics.hpp"

namespace rotsol {

PointVec rotation_shear(const HamiltonianSystem& sys, const IntVec& k) {
  if (k.size() != sys.ell) throw InputError("rotation vector must have one entry per q coordinate");
  PointVec s = PointVec::Zero(sys.dim());
  for (int i = 0; i < sys.ell; ++i) s[sys.np() + i] = sys.lattice[i] * k[i];
  return s;
}

Mat RotationSolution::samples(int count) const {
  Mat out(loop.dim(), count);
  if (count >= 2 * loop.modes() + 1 && (count & (count - 1)) == 0) {
    out = loop.grid_eval(count);
    for (int j = 0; j < count; ++j) out.col(j) += (static_cast<double>(j) / count) * shear;
    return out;
  }
  for (int j = 0; j < count; ++j) out.col(j) = state(T * j / count);
  return out;
}

RotationSolution make_rotation_solution(const HamiltonianSystem& sys, double M, const IntVec& k, double T,
                                        const Mat& samples) {
  const int N = static_cast<int>(samples.cols());
  if (T == 0.0) throw InputError("rotation period must be nonzero");
  RotationSolution sol;
  sol.T = T;
  sol.k = k;
  sol.energy = M;
  sol.shear = rotation_shear(sys, k);
  Mat periodic = samples;
  for (int j = 0; j < N; ++j) periodic.col(j) -= (static_cast<double>(j) / N) * sol.shear;
  sol.loop = grid_fit(periodic, N / 4 - 1).loop;
  fill_residuals(sys, sol);
  return sol;
}

void fill_residuals(const HamiltonianSystem& sys, RotationSolution& sol) {
  const int N = next_pow2(std::max(1024, 4 * (sol.loop.modes() + 1)));
  const Mat x = sol.loop.grid_eval(N);
  const Mat dx = sol.loop.derivative().grid_eval(N);
  sol.ode_residual = 0.0;
  sol.energy_residual = 0.0;
  for (int j = 0; j < N; ++j) {
    const PointVec z = PointVec(x.col(j)) + (static_cast<double>(j) / N) * sol.shear;
    // dz/ds = (dx/du + shear) / T
    const PointVec zdot = (PointVec(dx.col(j)) + sol.shear) / sol.T;
    sol.ode_residual = std::max(sol.ode_residual, (zdot - sys.vector_field(z)).cwiseAbs().maxCoeff());
    sol.energy_residual = std::max(sol.energy_residual, std::abs(sys.energy(z) - sol.energy));
  }
  numerics::DormandPrince dp([&](double, const Vec& y, Vec& dy) { dy = sys.vector_field(y); });
  const Vec z0 = sol.state(0.0);
  const Vec zT = dp.integrate(0.0, z0, sol.T);
  sol.boundary_residual = (zT - z0 - sol.shear).cwiseAbs().maxCoeff();
}

}  // namespace rotsol
