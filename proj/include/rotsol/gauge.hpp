#pragma once

#include "rotsol/hamiltonians.hpp"

namespace rotsol {

/// Radial gauge of the energy surface: alpha(p, q) > 0 is the unique value with
/// H(p / alpha, q) = M. It is positively homogeneous of degree one in p and periodic in q,
/// and the energy surface is exactly {alpha = 1}.
class GaugeField {
 public:
  GaugeField(HamiltonianSystem sys, EnergyContext ctx);

  const HamiltonianSystem& system() const { return sys_; }
  const EnergyContext& context() const { return ctx_; }
  double energy() const { return ctx_.M; }

  /// Radial section: the sigma > 0 with H(sigma dir, q) = M, for a unit direction.
  /// `guess` <= 0 starts from the middle of the bracket [r'/2, 2 r''].
  double sigma(const PointVec& dir, const PointVec& q, double guess = 0.0) const;

  double alpha(const PointVec& x) const;

  struct Jet {
    double alpha = 0.0;
    PointVec gradient;  ///< (alpha_p, alpha_q)
  };
  /// alpha and its gradient by implicit differentiation at u = p / alpha:
  /// alpha_p = H_p(u) / (H_p(u) . u), alpha_q = alpha H_q(u) / (H_p(u) . u).
  Jet jet(const PointVec& x) const;
  PointVec alpha_gradient(const PointVec& x) const { return jet(x).gradient; }

  /// s = ln alpha, the dilation level of x relative to the energy surface.
  double shell_coordinate(const PointVec& x) const { return std::log(alpha(x)); }

  /// (p, q) on the surface -> (p / |p|, q). Throws InputError off the surface.
  PhasePoint chart_F1(const PointVec& x) const;
  /// (dir, q) -> (sigma(dir, q) dir, q), stacked.
  PointVec chart_F2(const PointVec& dir, const PointVec& q) const;

 private:
  HamiltonianSystem sys_;
  EnergyContext ctx_;
  double bracket_lo_;
  double bracket_hi_;
};

}  // namespace rotsol
