#pragma once

#include "rotsol/hamiltonians.hpp"
#include "rotsol/loops.hpp"
#include "rotsol/traces.hpp"

namespace rotsol {

/// A rotation-type orbit of H: zdot = J H'(z), H(z) = M, z(T) = z(0) + (0, L k).
/// Stored as the periodic part u -> z(u T) - u (0, L k) on u in [0, 1).
struct RotationSolution {
  double T = 0.0;
  IntVec k;
  double energy = 0.0;
  PointVec shear;
  FourierLoop loop;
  double ode_residual = 0.0;       ///< sup | zdot - J H'(z) |
  double energy_residual = 0.0;    ///< sup | H(z) - M |
  double boundary_residual = 0.0;  ///< | z(T) - z(0) - (0, L k) |

  PointVec state(double s) const { return loop.eval(s / T) + (s / T) * shear; }
  ClosedCurve curve() const { return {loop, shear}; }
  /// dim x count samples of z at s_j = j T / count.
  Mat samples(int count) const;
};

/// Builds a solution from z sampled at s_j = j T / N (N a power of two, dim x N) and fills
/// the residuals from the spectral derivative and a direct integration over one period.
RotationSolution make_rotation_solution(const HamiltonianSystem& sys, double M, const IntVec& k, double T,
                                        const Mat& samples);

/// Recomputes the three residuals of `sol` against `sys`.
void fill_residuals(const HamiltonianSystem& sys, RotationSolution& sol);

/// (0, L k) for the given system.
PointVec rotation_shear(const HamiltonianSystem& sys, const IntVec& k);

}  // namespace rotsol
