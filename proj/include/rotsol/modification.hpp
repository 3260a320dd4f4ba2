#pragma once

#include <vector>

#include "rotsol/dilation.hpp"
#include "rotsol/gauge.hpp"

namespace rotsol {

/// C^2 step profile f rising from 0 (s <= -delta/3) to delta/3 (s >= delta/3) through two
/// quartic pieces joined at s = 0, and g(s) = f'(s) e^{-s}.
class AuxProfile {
 public:
  /// Requires 0 < delta <= 1.
  explicit AuxProfile(double delta);

  double delta() const { return delta_; }
  double third() const { return c_; }

  double f(double s) const;
  double df(double s) const;
  double d2f(double s) const;
  double g(double s) const { return df(s) * std::exp(-s); }
  double dg(double s) const { return (d2f(s) - df(s)) * std::exp(-s); }

  /// Offset of the peak of g from -delta/3.
  double delta_plus() const { return delta_plus_; }
  double g_peak_location() const { return -c_ + delta_plus_; }
  double g_peak() const { return g(g_peak_location()); }

  /// Inverse of f on [-delta/3, delta/3]. Throws InputError outside [0, delta/3].
  double level_shell(double b) const;

  /// All s in (-delta/3, delta/3) with g(s) = value, ascending (zero, one or two roots).
  std::vector<double> shells_with_g(double value) const;

 private:
  double delta_;
  double c_;
  double delta_plus_;
};

inline AuxProfile aux_profile(double delta) { return AuxProfile(delta); }

struct QuadraticBounds {
  double a1 = 0.0;  ///< min Hbar / |p|^2
  double a2 = 0.0;  ///< max Hbar / |p|^2
  double a3 = 0.0;  ///< max |Hbar'| / (|p| + 1)
  double a4 = 0.0;  ///< max ||Hbar''||
};

struct ExtensionOptions {
  double delta = 0.3;
  int r_delta_override = 0;  ///< 0 picks the smallest integer above r'' e^delta
  int max_halvings = 6;
  int shell_samples = 25;
  int direction_samples = 32;
  int q_samples_per_dim = 0;  ///< 0 picks 32 for one q-dimension, 16 otherwise
  double safety_factor = 1.25;
};

/// Hhat(p, q) = f(ln alpha(wrap(p), q)), periodic with period N0 in every momentum coordinate
/// and with the configuration lattice in q. Equals delta/6 on the energy surface.
class ExtendedHamiltonian {
 public:
  ExtendedHamiltonian(GaugeField gauge, AuxProfile profile, DilationSpec dilation, int r_delta);

  const GaugeField& gauge() const { return gauge_; }
  const AuxProfile& profile() const { return profile_; }
  const DilationSpec& dilation() const { return dilation_; }
  const HamiltonianSystem& system() const { return gauge_.system(); }
  int r_delta() const { return r_delta_; }
  double N0() const { return n0_; }
  double M1() const { return m1_; }
  double M2() const { return m2_; }
  int halvings() const { return halvings_; }

  double value(const PointVec& x) const;
  PointVec gradient(const PointVec& x) const;
  /// Central differences of the analytic gradient.
  PointMat hessian(const PointVec& x) const;
  PointVec vector_field(const PointVec& x) const { return apply_J(gradient(x)); }

  /// Momentum part reduced to the centred cell [-N0/2, N0/2].
  PointVec wrap(const PointVec& x) const;
  /// The momentum lattice translate removed by `wrap`.
  PointVec cell_offset(const PointVec& x) const { return x - wrap(x); }

  /// Hbar = M alpha^2 and its gradient 2 M alpha alpha'.
  double hbar(const PointVec& x) const;
  PointVec hbar_gradient(const PointVec& x) const;

  void set_bounds(double m1, double m2) {
    m1_ = m1;
    m2_ = m2;
  }
  void set_halvings(int h) { halvings_ = h; }

 private:
  enum class Zone { inner, annulus, outer };
  Zone zone(const PointVec& wrapped) const;

  GaugeField gauge_;
  AuxProfile profile_;
  DilationSpec dilation_;
  int r_delta_;
  double n0_;
  double m1_ = 0.0;
  double m2_ = 0.0;
  int halvings_ = 0;
  double inner_radius_;
  double outer_radius_;
};

/// Builds Hhat for the standard dilation, estimates M1 and M2 on a dense sample of the
/// annulus, and checks that the annulus stays inside the momentum cell (halving delta on failure).
ExtendedHamiltonian build_extended(const GaugeField& gauge, const DilationSpec& dilation,
                                   const ExtensionOptions& opts = {});

/// Empirical constants of the quadratic modification Hbar = M alpha^2 over the given samples.
QuadraticBounds quadratic_bounds(const ExtendedHamiltonian& hhat, const std::vector<PointVec>& samples);

/// Surface samples (sigma(dir, q) e^s dir, q) on shell s over a direction x q grid.
std::vector<PointVec> shell_samples(const GaugeField& gauge, double s, int directions, int q_per_dim);

}  // namespace rotsol
