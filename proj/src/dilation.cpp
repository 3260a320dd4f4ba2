#include "rotsol/dilation.hpp"

#include <cmath>

#include "rotsol/modification.hpp"
#include "rotsol/numerics.hpp"

namespace rotsol {

DilationSpec standard_dilation(int np, double delta) {
  DilationSpec spec;
  spec.name = "standard";
  spec.np = np;
  spec.delta = delta;
  spec.xi = [np](const PointVec& x) {
    PointVec v = PointVec::Zero(x.size());
    v.head(np) = x.head(np);
    return v;
  };
  spec.closed_form_flow = [np](double s, const PointVec& x) {
    PointVec y = x;
    y.head(np) *= std::exp(s);
    return y;
  };
  return spec;
}

PointVec integrate_dilation(const DilationSpec& spec, double s, const PointVec& x) {
  if (!(std::abs(s) < spec.delta)) throw InputError("integrate_dilation: |s| must be below delta");
  if (s == 0.0) return x;
  numerics::DormandPrince::Options opts;
  opts.rtol = 1e-12;
  opts.atol = 1e-12;
  numerics::DormandPrince ode(
      [&](double, const Vec& y, Vec& dy) {
        const PointVec yp = y;
        dy = spec.xi(yp);
      },
      opts);
  const Vec end = ode.integrate(0.0, Vec(x), s);
  return end;
}

PointVec dilation_flow(const DilationSpec& spec, double s, const PointVec& x) {
  if (spec.closed_form_flow) return (*spec.closed_form_flow)(s, x);
  return integrate_dilation(spec, s, x);
}

double verify_conformal(const DilationSpec& spec, double s, const std::vector<PointVec>& samples) {
  double defect = 0.0;
  for (const auto& x : samples) {
    const Eigen::Index dim = x.size();
    const PointMat J = symplectic_matrix<double>(static_cast<int>(dim));
    PointMat D(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double h = 1e-6 * (1.0 + std::abs(x[j]));
      PointVec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      D.col(j) = (dilation_flow(spec, s, xp) - dilation_flow(spec, s, xm)) / (2.0 * h);
    }
    defect = std::max(defect, (D.transpose() * J * D - std::exp(s) * J).norm());
  }
  return defect;
}

TransportResult transport_orbit(const DilationSpec& spec, const ExtendedHamiltonian& hhat, const SampledOrbit& x1,
                                double s1, double s2) {
  const double third = hhat.profile().third();
  if (!(std::abs(s1) < third && std::abs(s2) < third)) {
    throw InputError("transport_orbit: shells must satisfy |s| < delta/3");
  }
  TransportResult out;
  const auto& prof = hhat.profile();
  out.factor = std::exp(s2 - s1) * prof.df(s1) / prof.df(s2);
  out.orbit.t0 = x1.t0;
  out.orbit.dt = x1.dt;
  out.orbit.states.reserve(x1.states.size());
  for (const auto& x : x1.states) out.orbit.states.push_back(dilation_flow(spec, s2 - s1, x));

  // Fourth-order central differences on interior samples.
  const auto& st = out.orbit.states;
  const double h = x1.dt;
  for (std::size_t j = 2; j + 2 < st.size(); ++j) {
    const PointVec deriv = (-st[j + 2] + 8.0 * st[j + 1] - 8.0 * st[j - 1] + st[j - 2]) / (12.0 * h);
    const PointVec rhs = out.factor * hhat.vector_field(st[j]);
    out.residual = std::max(out.residual, (deriv - rhs).cwiseAbs().maxCoeff());
  }
  return out;
}

double field_ratio_check(const std::function<PointVec(const PointVec&)>& field_gradient,
                         const ExtendedHamiltonian& hhat, const DilationSpec& spec,
                         const std::vector<PointVec>& surface_samples) {
  double defect = 0.0;
  for (const auto& x : surface_samples) {
    const PointVec fg = field_gradient(x);
    const double ratio = fg.dot(spec.xi(x));
    defect = std::max(defect, (apply_J(fg) - ratio * hhat.vector_field(x)).norm());
  }
  return defect;
}

}  // namespace rotsol
