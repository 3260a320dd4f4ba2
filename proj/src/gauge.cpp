#include "rotsol/gauge.hpp"

#include <algorithm>
#include <cmath>

namespace rotsol {

GaugeField::GaugeField(HamiltonianSystem sys, EnergyContext ctx)
    : sys_(std::move(sys)), ctx_(ctx), bracket_lo_(0.5 * ctx.rlow), bracket_hi_(2.0 * ctx.rhigh) {
  if (!(ctx_.M > ctx_.threshold)) throw InputError("gauge requires M above the surface threshold");
}

double GaugeField::sigma(const PointVec& dir, const PointVec& q, double guess) const {
  if (!(guess > bracket_lo_ && guess < bracket_hi_)) guess = 0.5 * (bracket_lo_ + bracket_hi_);
  try {
    return radial_level_root(sys_, ctx_.M, dir, q, bracket_lo_, bracket_hi_, guess);
  } catch (const NumericalError&) {
    throw NumericalError("sigma: bracket failure, growth condition violated numerically");
  }
}

double GaugeField::alpha(const PointVec& x) const {
  const int np = sys_.np();
  const double rho = x.head(np).norm();
  if (rho == 0.0) throw InputError("alpha undefined at p = 0");
  const PointVec dir = x.head(np) / rho;
  // For the common case alpha ~ 1 the radius itself is an excellent Newton start.
  return rho / sigma(dir, x.tail(sys_.ell), rho);
}

GaugeField::Jet GaugeField::jet(const PointVec& x) const {
  const int np = sys_.np();
  Jet out;
  out.alpha = alpha(x);
  PointVec u = x;
  u.head(np) /= out.alpha;
  const PointVec g = sys_.gradient(u);
  const double denom = g.head(np).dot(u.head(np));
  if (std::abs(denom) < 1e-12) throw NumericalError("gauge singularity: H_p . u vanishes");
  out.gradient.resize(x.size());
  out.gradient.head(np) = g.head(np) / denom;
  out.gradient.tail(sys_.ell) = out.alpha * g.tail(sys_.ell) / denom;
  return out;
}

PhasePoint GaugeField::chart_F1(const PointVec& x) const {
  const int np = sys_.np();
  if (std::abs(alpha(x) - 1.0) > 1e-8) throw InputError("chart_F1: point is not on the energy surface");
  return {x.head(np).normalized(), x.tail(sys_.ell)};
}

PointVec GaugeField::chart_F2(const PointVec& dir, const PointVec& q) const {
  if (std::abs(dir.norm() - 1.0) > 1e-12) throw InputError("chart_F2: direction must be a unit vector");
  PointVec x(sys_.dim());
  x << sigma(dir, q) * dir, q;
  return x;
}

}  // namespace rotsol
