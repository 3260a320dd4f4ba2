#include "rotsol/modification.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rotsol/numerics.hpp"

namespace rotsol {

AuxProfile::AuxProfile(double delta) : delta_(delta), c_(delta / 3.0) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError("profile half-width delta must lie in (0, 1]");
  const double b = 3.0 + 0.5 * delta;
  delta_plus_ = 0.5 * (b - std::sqrt(b * b - 4.0 * delta));
}

double AuxProfile::f(double s) const {
  if (s <= -c_) return 0.0;
  if (s >= c_) return c_;
  if (s <= 0.0) {
    const double u = s + c_;
    return u * u * u / (c_ * c_) - 0.5 * u * u * u * u / (c_ * c_ * c_);
  }
  const double u = s - c_;
  return c_ + u * u * u / (c_ * c_) + 0.5 * u * u * u * u / (c_ * c_ * c_);
}

double AuxProfile::df(double s) const {
  if (s <= -c_ || s >= c_) return 0.0;
  if (s <= 0.0) {
    const double u = s + c_;
    return 3.0 * u * u / (c_ * c_) - 2.0 * u * u * u / (c_ * c_ * c_);
  }
  const double u = s - c_;
  return 3.0 * u * u / (c_ * c_) + 2.0 * u * u * u / (c_ * c_ * c_);
}

double AuxProfile::d2f(double s) const {
  if (s <= -c_ || s >= c_) return 0.0;
  if (s <= 0.0) {
    const double u = s + c_;
    return 6.0 * u / (c_ * c_) - 6.0 * u * u / (c_ * c_ * c_);
  }
  const double u = s - c_;
  return 6.0 * u / (c_ * c_) + 6.0 * u * u / (c_ * c_ * c_);
}

double AuxProfile::level_shell(double b) const {
  if (!(b >= 0.0 && b <= c_)) throw InputError("level_shell: level outside [0, delta/3]");
  if (b == 0.0) return -c_;
  if (b == c_) return c_;
  auto f_df = [&](double s, double& v, double& d) {
    v = f(s) - b;
    d = df(s);
  };
  return numerics::safe_newton(f_df, -c_, c_, 0.0, 1e-15, 200).x;
}

std::vector<double> AuxProfile::shells_with_g(double value) const {
  std::vector<double> roots;
  const double peak = g_peak_location();
  const double gmax = g(peak);
  if (!(value > 0.0) || value > gmax) return roots;
  if (value == gmax) return {peak};
  auto h = [&](double s) { return g(s) - value; };
  roots.push_back(numerics::bisect(h, -c_, peak, 1e-16).x);
  roots.push_back(numerics::bisect(h, peak, c_, 1e-16).x);
  return roots;
}

ExtendedHamiltonian::ExtendedHamiltonian(GaugeField gauge, AuxProfile profile, DilationSpec dilation, int r_delta)
    : gauge_(std::move(gauge)),
      profile_(profile),
      dilation_(std::move(dilation)),
      r_delta_(r_delta),
      n0_(2.0 * (r_delta + 1)) {
  const auto& ctx = gauge_.context();
  // alpha <= |p| / r' and alpha >= |p| / r'', so these radii bound the annulus from inside and outside.
  inner_radius_ = ctx.rlow * std::exp(-profile_.third()) * (1.0 - 1e-6);
  outer_radius_ = ctx.rhigh * std::exp(profile_.third()) * (1.0 + 1e-6);
}

PointVec ExtendedHamiltonian::wrap(const PointVec& x) const {
  const int np = gauge_.system().np();
  PointVec out = x;
  for (int i = 0; i < np; ++i) out[i] = wrap_centered(x[i], n0_);
  return out;
}

ExtendedHamiltonian::Zone ExtendedHamiltonian::zone(const PointVec& wrapped) const {
  const double rho = wrapped.head(gauge_.system().np()).norm();
  if (rho <= inner_radius_) return Zone::inner;
  if (rho >= outer_radius_) return Zone::outer;
  return Zone::annulus;
}

double ExtendedHamiltonian::value(const PointVec& x) const {
  const PointVec w = wrap(x);
  switch (zone(w)) {
    case Zone::inner: return 0.0;
    case Zone::outer: return profile_.third();
    case Zone::annulus: break;
  }
  return profile_.f(std::log(gauge_.alpha(w)));
}

PointVec ExtendedHamiltonian::gradient(const PointVec& x) const {
  const PointVec w = wrap(x);
  if (zone(w) != Zone::annulus) return PointVec::Zero(x.size());
  const auto jet = gauge_.jet(w);
  const double s = std::log(jet.alpha);
  const double d = profile_.df(s);
  if (d == 0.0) return PointVec::Zero(x.size());
  return (d / jet.alpha) * jet.gradient;
}

PointMat ExtendedHamiltonian::hessian(const PointVec& x) const {
  const Eigen::Index dim = x.size();
  PointMat hess(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double h = 1e-5 * (1.0 + std::abs(x[j]));
    PointVec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    hess.col(j) = (gradient(xp) - gradient(xm)) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

double ExtendedHamiltonian::hbar(const PointVec& x) const {
  const double a = gauge_.alpha(x);
  return gauge_.energy() * a * a;
}

PointVec ExtendedHamiltonian::hbar_gradient(const PointVec& x) const {
  const auto jet = gauge_.jet(x);
  return 2.0 * gauge_.energy() * jet.alpha * jet.gradient;
}

namespace {

std::vector<PointVec> q_lattice_grid(const Vec& lattice, int per_dim) {
  const auto nq = lattice.size();
  long total = 1;
  for (Eigen::Index j = 0; j < nq; ++j) total *= per_dim;
  std::vector<PointVec> out;
  out.reserve(total);
  for (long idx = 0; idx < total; ++idx) {
    PointVec q(nq);
    long rem = idx;
    for (Eigen::Index j = 0; j < nq; ++j) {
      q[j] = lattice[j] * (static_cast<double>(rem % per_dim) + 0.5) / per_dim;
      rem /= per_dim;
    }
    out.push_back(q);
  }
  return out;
}

int default_q_per_dim(int nq) { return nq == 1 ? 32 : 16; }

double spectral_norm(const PointMat& m) {
  Eigen::SelfAdjointEigenSolver<PointMat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// True when the annulus sits inside the momentum cell and the cell faces lie on the plateau.
bool cell_is_safe(const GaugeField& gauge, const AuxProfile& profile, int r_delta, int q_per_dim) {
  const auto& sys = gauge.system();
  const int np = sys.np();
  const double half = r_delta + 1.0;
  const double plateau = std::exp(profile.third());
  const auto qs = q_lattice_grid(sys.lattice, q_per_dim);
  // Outer edge of the full dilation neighbourhood must stay inside the radius-r_delta ball.
  for (const auto& d : sphere_directions(np, 32)) {
    for (const auto& q : qs) {
      if (gauge.sigma(d, q) * std::exp(profile.delta()) >= r_delta) return false;
    }
  }
  // Faces |p_i| = r_delta + 1 of the cell: Hhat must already be at its maximum there.
  constexpr int kFace = 9;
  long face_total = 1;
  for (int j = 0; j + 1 < np; ++j) face_total *= kFace;
  for (int i = 0; i < np; ++i) {
    for (double side : {-1.0, 1.0}) {
      for (long idx = 0; idx < face_total; ++idx) {
        PointVec p(np);
        long rem = idx;
        for (int j = 0; j < np; ++j) {
          if (j == i) {
            p[j] = side * half;
            continue;
          }
          p[j] = -half + 2.0 * half * static_cast<double>(rem % kFace) / (kFace - 1);
          rem /= kFace;
        }
        for (const auto& q : qs) {
          PointVec x(sys.dim());
          x << p, q;
          if (!(gauge.alpha(x) > plateau)) return false;
        }
      }
    }
  }
  return true;
}

}  // namespace

std::vector<PointVec> shell_samples(const GaugeField& gauge, double s, int directions, int q_per_dim) {
  const auto& sys = gauge.system();
  std::vector<PointVec> out;
  for (const auto& d : sphere_directions(sys.np(), directions)) {
    for (const auto& q : q_lattice_grid(sys.lattice, q_per_dim)) {
      PointVec x(sys.dim());
      x << std::exp(s) * gauge.sigma(d, q) * d, q;
      out.push_back(x);
    }
  }
  return out;
}

ExtendedHamiltonian build_extended(const GaugeField& gauge, const DilationSpec& dilation,
                                   const ExtensionOptions& opts) {
  if (!dilation.is_standard()) {
    throw InputError("the closed-form extension requires the standard dilation xi = (p, 0)");
  }
  const auto& sys = gauge.system();
  const int q_per_dim = opts.q_samples_per_dim > 0 ? opts.q_samples_per_dim : default_q_per_dim(sys.ell);
  double delta = opts.delta;
  for (int attempt = 0; attempt <= opts.max_halvings; ++attempt, delta *= 0.5) {
    const AuxProfile profile(delta);
    const int r_delta = opts.r_delta_override > 0
                            ? opts.r_delta_override
                            : static_cast<int>(std::floor(gauge.context().rhigh * std::exp(delta))) + 1;
    if (!cell_is_safe(gauge, profile, r_delta, std::min(q_per_dim, 16))) continue;

    DilationSpec dil = dilation;
    dil.delta = delta;
    ExtendedHamiltonian hhat(gauge, profile, dil, r_delta);
    double m1 = 0.0, m2 = 0.0;
    const int ns = std::max(3, opts.shell_samples);
    for (int i = 0; i < ns; ++i) {
      const double s = -profile.third() + 2.0 * profile.third() * (i + 0.5) / ns;
      for (const auto& x : shell_samples(gauge, s, opts.direction_samples, q_per_dim)) {
        m1 = std::max(m1, hhat.gradient(x).norm());
        m2 = std::max(m2, spectral_norm(hhat.hessian(x)));
      }
    }
    hhat.set_bounds(opts.safety_factor * m1, opts.safety_factor * m2);
    hhat.set_halvings(attempt);
    return hhat;
  }
  throw NumericalError("cell safety check failed after " + std::to_string(opts.max_halvings) + " halvings of delta");
}

QuadraticBounds quadratic_bounds(const ExtendedHamiltonian& hhat, const std::vector<PointVec>& samples) {
  QuadraticBounds b;
  b.a1 = std::numeric_limits<double>::infinity();
  const int np = hhat.system().np();
  for (const auto& x : samples) {
    const double p2 = x.head(np).squaredNorm();
    const double hb = hhat.hbar(x);
    b.a1 = std::min(b.a1, hb / p2);
    b.a2 = std::max(b.a2, hb / p2);
    b.a3 = std::max(b.a3, hhat.hbar_gradient(x).norm() / (std::sqrt(p2) + 1.0));
    const Eigen::Index dim = x.size();
    PointMat hess(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double h = 1e-5 * (1.0 + std::abs(x[j]));
      PointVec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      hess.col(j) = (hhat.hbar_gradient(xp) - hhat.hbar_gradient(xm)) / (2.0 * h);
    }
    b.a4 = std::max(b.a4, spectral_norm(0.5 * (hess + hess.transpose())));
  }
  return b;
}

}  // namespace rotsol
