#include "rotsol/traces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace rotsol {

double wrapped_distance(const PointVec& a, const PointVec& b, const WrapPeriods& periods) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    if (periods[i] > 0.0) d = wrap_centered(d, periods[i]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

namespace {

std::vector<PointVec> sample_curve(const ClosedCurve& c, int samples) {
  std::vector<PointVec> pts(samples);
  const Mat grid = c.loop.grid_eval(samples);
  for (int j = 0; j < samples; ++j) {
    const double u = static_cast<double>(j) / samples;
    pts[j] = grid.col(j) + u * c.drift;
  }
  return pts;
}

double directed(const ClosedCurve& a, const ClosedCurve& b, const WrapPeriods& periods, int samples) {
  const auto pa = sample_curve(a, samples);
  const auto pb = sample_curve(b, samples);
  const double h = 1.0 / samples;
  double worst = 0.0;
  for (const auto& x : pa) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < samples; ++j) {
      const double d = wrapped_distance(x, pb[j], periods);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    // Newton on the curve parameter near the best sample, with the lattice offset frozen.
    const PointVec raw = pb[best] - x;
    PointVec offset = PointVec::Zero(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (periods[i] > 0.0) offset[i] = wrap_centered(raw[i], periods[i]) - raw[i];
    }
    const double center = best * h;
    double u = center, refined = best_d;
    PointVec bx, bd, bdd;
    for (int it = 0; it < 8; ++it) {
      b.loop.eval_jet(u, bx, bd, bdd);
      bx += u * b.drift + offset - x;
      bd += b.drift;
      const double phi = bx.dot(bd), dphi = bd.squaredNorm() + bx.dot(bdd);
      refined = std::min(refined, bx.norm());
      if (!(dphi > 0.0)) break;
      const double next = std::clamp(u - phi / dphi, center - h, center + h);
      if (std::abs(next - u) < 1e-15) break;
      u = next;
    }
    b.loop.eval_jet(u, bx, bd, bdd);
    refined = std::min(refined, (bx + u * b.drift + offset - x).norm());
    worst = std::max(worst, refined);
  }
  return worst;
}

}  // namespace

double hausdorff_distance(const ClosedCurve& a, const ClosedCurve& b, const WrapPeriods& periods, int samples) {
  if (samples < 4 * (std::max(a.loop.modes(), b.loop.modes()) + 1)) {
    samples = next_pow2(4 * (std::max(a.loop.modes(), b.loop.modes()) + 1));
  }
  samples = next_pow2(samples);
  return std::max(directed(a, b, periods, samples), directed(b, a, periods, samples));
}

}  // namespace rotsol
