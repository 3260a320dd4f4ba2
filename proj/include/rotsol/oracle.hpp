#pragma once

#include <vector>

#include "rotsol/gauge.hpp"
#include "rotsol/solution.hpp"

namespace rotsol {

struct Trajectory {
  std::vector<double> times;
  std::vector<PointVec> states;
  double energy_drift = 0.0;  ///< max |H(z(t)) - H(z(0))| over the recorded states
  bool drift_flagged = false;  ///< drift above 100 tol
};

/// Adaptive Dormand-Prince integration of zdot = J H'(z) over [0, T] (T of either sign),
/// recording `records` + 1 equally spaced states. Requires tol >= 1e-13.
Trajectory integrate_hamiltonian(const HamiltonianSystem& sys, const PointVec& x0, double T, double tol,
                                 int records = 64);

/// Rotation-orbit shooting on H^{-1}(M). The initial point is F2(dir, q0), and the coordinate
/// q0_i with the largest |k_i| stays fixed as a Poincare section; the other q0 entries, the
/// direction and the period T are the unknowns.
struct ShootingProblem {
  GaugeField gauge;
  IntVec k;
  PointVec q0;
  PointVec dir;
  double T_guess = 0.0;  ///< 0 scans for the first crossing of the section
  double tol = 1e-10;
  int samples = 1024;
};

/// Gauss-Newton with finite-difference Jacobian on z(T) - z(0) - (0, L k).
/// Throws NumericalError after 50 iterations without convergence.
RotationSolution shoot_rotation_orbit(const ShootingProblem& prob);

/// T(M) = integral over [0, 2 pi] of dq / sqrt(2 (M + cos q)) for H = p^2/2 - cos q. Requires M > 1.
double pendulum_period_quadrature(double M);

}  // namespace rotsol
