#pragma once

#include "rotsol/loops.hpp"

namespace rotsol {

/// The image of u -> x(u) + u * drift for u in [0, 1], a closed curve in the quotient by the
/// lattice generated by `drift`.
struct ClosedCurve {
  FourierLoop loop;
  PointVec drift;

  PointVec eval(double u) const { return loop.eval(u) + u * drift; }
};

/// Per-coordinate periods of a flat torus metric; a zero entry leaves that coordinate unwrapped.
using WrapPeriods = PointVec;

double wrapped_distance(const PointVec& a, const PointVec& b, const WrapPeriods& periods);

/// Symmetric Hausdorff distance of the wrapped images of two curves. Each curve is sampled
/// at `samples` points; nearest points on the other curve come from a dense scan refined by
/// golden-section search on the curve parameter.
double hausdorff_distance(const ClosedCurve& a, const ClosedCurve& b, const WrapPeriods& periods, int samples = 1024);

}  // namespace rotsol
