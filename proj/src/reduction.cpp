#include "rotsol/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "rotsol/numerics.hpp"

namespace rotsol {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

ReductionContext::ReductionContext(std::shared_ptr<const ExtendedHamiltonian> hhat, double that, IntVec k,
                                   ReductionOptions opts, double m2_scale)
    : hhat_(std::move(hhat)), that_(that), k_(std::move(k)), opts_(opts), m2_scale_(m2_scale) {
  if (!hhat_) throw InputError("reduction needs an extended Hamiltonian");
  const auto& sys = hhat_->system();
  if (sys.ell != sys.n) throw InputError("the loop reduction requires l = n");
  if (!(std::isfinite(that_) && that_ != 0.0)) throw InputError("That must be nonzero");
  if (k_.size() != sys.ell) throw InputError("rotation vector must have one entry per q coordinate");
  if (k_.isZero()) throw InputError("rotation vector k must be nonzero");
  if (!(opts_.tol_fp > 0.0 && opts_.tol_crit > 0.0)) throw InputError("tolerances must be positive");
  m2_ = hhat_->M2() * m2_scale_;
  if (!(m2_ > 0.0)) throw InputError("Hessian bound M2 must be positive");
  dim_ = sys.dim();
  cut_ = spectral_cutoff(that_, m2_);
  if (opts_.d_cut_override > 0) {
    cut_.d_cut = opts_.d_cut_override;
    cut_.lambda = kTwoPi * (cut_.d_cut + 0.5);
    cut_.margin = cut_.lambda - 2.0 * std::abs(that_) * m2_;
  }
  d_grid_ = 4 * cut_.d_cut;
  nt_ = opts_.nt_override > 0 ? opts_.nt_override : next_pow2(8 * (d_grid_ + 1));
  if (nt_ < 4 * (d_grid_ + 1) || (nt_ & (nt_ - 1)) != 0) throw InputError("grid size must be a power of two >= 4(d+1)");
  shear_ = PointVec::Zero(dim_);
  for (int i = 0; i < sys.ell; ++i) shear_[sys.np() + i] = sys.lattice[i] * k_[i];
}

ReductionContext ReductionContext::inflated(double factor) const {
  ReductionOptions o = opts_;
  o.d_cut_override = 0;
  return ReductionContext(hhat_, that_, k_, o, m2_scale_ * factor);
}

FourierLoop ReductionContext::z_loop(const Vec& z) const {
  if (z.size() != z_size()) throw InputError("z vector has the wrong size");
  FourierLoop out(dim_, d_grid_);
  const int dc = cut_.d_cut;
  for (int m = -dc; m <= dc; ++m) out.mode(m) = z.segment((m + dc) * dim_, dim_);
  return out;
}

Vec ReductionContext::z_vector(const FourierLoop& x) const {
  Vec z = Vec::Zero(z_size());
  const int dc = cut_.d_cut;
  const int keep = std::min(dc, x.modes());
  for (int m = -keep; m <= keep; ++m) z.segment((m + dc) * dim_, dim_) = x.mode(m);
  return z;
}

Vec ReductionContext::lattice_shift(const Vec& z, const PointVec& shift) const {
  Vec out = z;
  out.segment(cut_.d_cut * dim_, dim_) += shift;
  return out;
}

Mat ReductionContext::sheared_samples(const FourierLoop& x) const {
  Mat s = x.grid_eval(nt_);
  for (int j = 0; j < nt_; ++j) s.col(j) += (static_cast<double>(j) / nt_) * shear_;
  return s;
}

FourierLoop ReductionContext::B_gradient(const FourierLoop& x) const {
  Mat s = sheared_samples(x);
  for (int j = 0; j < nt_; ++j) s.col(j) = that_ * hhat_->gradient(s.col(j));
  FourierLoop out = grid_fit(s, d_grid_).loop;
  out.mode(0) += apply_J(shear_);
  return out;
}

double ReductionContext::B_value(const FourierLoop& x) const {
  const Mat s = sheared_samples(x);
  double acc = 0.0;
  for (int j = 0; j < nt_; ++j) acc += hhat_->value(s.col(j));
  return that_ * acc / nt_ + x.mean().dot(apply_J(shear_));
}

double ReductionContext::action(const FourierLoop& x) const { return 0.5 * x.inner(x.apply_A()) - B_value(x); }

FourierLoop ReductionContext::contraction_map(const FourierLoop& zl, const FourierLoop& y) const {
  return invert_A0(project_Pperp(B_gradient(zl + y), cut_.d_cut), cut_.d_cut);
}

YSolution ReductionContext::solve_y(const Vec& z, const FourierLoop* warm) const {
  const FourierLoop zl = z_loop(z);
  YSolution out;
  out.y = warm ? project_Pperp(warm->resized(d_grid_), cut_.d_cut) : FourierLoop(dim_, d_grid_);
  double prev = std::numeric_limits<double>::infinity();
  int slow = 0;
  for (int it = 1; it <= opts_.max_fp_iterations; ++it) {
    FourierLoop next = contraction_map(zl, out.y);
    const double step = (next - out.y).norm();
    out.y = std::move(next);
    out.iterations = it;
    out.residual = step;
    const double ratio = std::isfinite(prev) && prev > 0.0 ? step / prev : 0.0;
    if (step > 100.0 * opts_.tol_fp) {
      out.max_ratio = std::max(out.max_ratio, ratio);
      slow = ratio > 0.9 ? slow + 1 : 0;
      if (slow >= 3) throw ContractionError("fixed-point iteration for y(z) is not contracting");
    }
    if (step <= 1e-2 * opts_.tol_fp || step == 0.0) return out;
    // Round-off floor: steps below tol_fp that no longer shrink.
    if (step <= opts_.tol_fp && ratio > 0.5) return out;
    prev = step;
  }
  throw ContractionError("fixed-point iteration for y(z) did not converge");
}

double ReductionContext::reduced_value(const Vec& z) const { return action(z_loop(z) + solve_y(z).y); }

Vec ReductionContext::reduced_gradient(const Vec& z) const { return reduced_gradient(z, solve_y(z).y); }

Vec ReductionContext::reduced_gradient(const Vec& z, const FourierLoop& y) const {
  const FourierLoop zl = z_loop(z);
  return z_vector(zl.apply_A() - B_gradient(zl + y));
}

ReductionContext::Linearization ReductionContext::linearize(const Vec& z, const FourierLoop& y) const {
  const FourierLoop x = z_loop(z) + y;
  const Mat s = sheared_samples(x);
  const int n = dim_ / 2;
  std::vector<PointMat> K(nt_);
  for (int j = 0; j < nt_; ++j) K[j] = that_ * hhat_->hessian(s.col(j));

  const int nf = full_size();
  Mat B(nf, nf);
  Mat v(dim_, nt_);
  for (int m = -d_grid_; m <= d_grid_; ++m) {
    for (int i = 0; i < dim_; ++i) {
      // Basis loop exp(2 pi m t J) e_i = cos e_i + sin J e_i.
      const int partner = i < n ? i + n : i - n;
      const double jsign = i < n ? 1.0 : -1.0;
      for (int j = 0; j < nt_; ++j) {
        const double th = kTwoPi * m * static_cast<double>(j) / nt_;
        v.col(j) = std::cos(th) * K[j].col(i) + (jsign * std::sin(th)) * K[j].col(partner);
      }
      const Mat& c = grid_fit(v, d_grid_).loop.coeffs();
      B.col((m + d_grid_) * dim_ + i) = Eigen::Map<const Vec>(c.data(), nf);
    }
  }

  const int nz = z_size(), z0 = (d_grid_ - cut_.d_cut) * dim_;
  std::vector<int> yi;
  yi.reserve(nf - nz);
  for (int i = 0; i < nf; ++i) {
    if (i < z0 || i >= z0 + nz) yi.push_back(i);
  }
  std::vector<int> zi(nz);
  for (int i = 0; i < nz; ++i) zi[i] = z0 + i;
  auto eigenvalue = [&](int idx) { return kTwoPi * (idx / dim_ - d_grid_); };

  Mat S = -B(yi, yi);
  for (std::size_t a = 0; a < yi.size(); ++a) S(a, a) += eigenvalue(yi[a]);
  Linearization lin;
  lin.dy_dz = S.partialPivLu().solve(Mat(B(yi, zi)));
  lin.jacobian = -B(zi, zi) - B(zi, yi) * lin.dy_dz;
  for (int a = 0; a < nz; ++a) lin.jacobian(a, a) += eigenvalue(zi[a]);
  return lin;
}

FourierLoop ReductionContext::predict_y(const FourierLoop& y, const Mat& dy_dz, const Vec& dz) const {
  const Vec dy = dy_dz * dz;
  FourierLoop out = y.resized(d_grid_);
  const int nz = z_size(), z0 = (d_grid_ - cut_.d_cut) * dim_;
  double* c = out.coeffs().data();
  int a = 0;
  for (int i = 0; i < full_size(); ++i) {
    if (i >= z0 && i < z0 + nz) continue;
    c[i] += dy[a++];
  }
  return out;
}

LoopResidual ReductionContext::loop_residual(const FourierLoop& x) const {
  LoopResidual out;
  const Mat s = sheared_samples(x);
  const Mat xd = x.derivative().grid_eval(nt_);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, acc = 0.0;
  for (int j = 0; j < nt_; ++j) {
    const PointVec g = s.col(j);
    const PointVec r = PointVec(xd.col(j)) + shear_ - that_ * hhat_->vector_field(g);
    out.ode = std::max(out.ode, r.cwiseAbs().maxCoeff());
    const double h = hhat_->value(g);
    lo = std::min(lo, h);
    hi = std::max(hi, h);
    acc += h;
  }
  out.level = acc / nt_;
  out.level_spread = hi - lo;

  numerics::DormandPrince::Options o;
  o.rtol = 1e-13;
  o.atol = 1e-13;
  numerics::DormandPrince dp(
      [&](double t, const Vec& y, Vec& dy) {
        const PointVec g = PointVec(y) + t * shear_;
        dy = that_ * hhat_->vector_field(g) - shear_;
      },
      o);
  const Vec x0 = x.eval(0.0);
  out.closure = (dp.integrate(0.0, x0, 1.0) - x0).cwiseAbs().maxCoeff();
  return out;
}

FourierLoop canonical_loop(const ReductionContext& ctx, const FourierLoop& x) {
  const int n = ctx.dim() / 2;
  double tau = 0.0;
  if (x.modes() >= 1) {
    const int msel = x.mode(1).norm() >= x.mode(-1).norm() ? 1 : -1;
    const PointVec v = x.mode(msel);
    int best = 0;
    for (int i = 1; i < n; ++i) {
      if (std::hypot(v[i], v[i + n]) > std::hypot(v[best], v[best + n]) + 1e-12) best = i;
    }
    if (std::hypot(v[best], v[best + n]) > 1e-12) {
      // (exp(theta J) v)_best = cos(theta) v_best - sin(theta) v_{best+n} is maximal here.
      const double theta = std::atan2(-v[best + n], v[best]);
      tau = theta / (kTwoPi * msel);
    }
  }
  FourierLoop out = x.time_shifted(tau);
  PointVec mean = out.mean() + tau * ctx.shear();
  const auto& sys = ctx.hhat().system();
  const int np = sys.np();
  for (int i = 0; i < np; ++i) mean[i] = wrap_centered(mean[i], ctx.hhat().N0());
  for (int i = 0; i < sys.ell; ++i) {
    const double L = sys.lattice[i];
    mean[np + i] -= L * std::floor(mean[np + i] / L);
  }
  out.mode(0) = mean;
  return out;
}

ClosedCurve sheared_curve(const ReductionContext& ctx, const FourierLoop& x) { return {x, ctx.shear()}; }

WrapPeriods full_lattice(const ReductionContext& ctx) {
  const auto& sys = ctx.hhat().system();
  WrapPeriods w(ctx.dim());
  for (int i = 0; i < sys.np(); ++i) w[i] = ctx.hhat().N0();
  for (int i = 0; i < sys.ell; ++i) w[sys.np() + i] = sys.lattice[i];
  return w;
}

FourierLoop loop_from_samples(const ReductionContext& ctx, const Mat& samples) {
  if (samples.rows() != ctx.dim()) throw InputError("orbit samples have the wrong dimension");
  const int modes = std::min(ctx.d_grid(), static_cast<int>(samples.cols()) / 4 - 1);
  return grid_fit(samples, modes).loop.resized(ctx.d_grid());
}

Vec seed_from_orbit(const ReductionContext& ctx, const Mat& samples) {
  return ctx.z_vector(loop_from_samples(ctx, samples));
}

namespace {

struct Converged {
  Vec z;
  FourierLoop y;
  double residual;
};

std::optional<Converged> run_start(const ReductionContext& ctx, const FourierLoop& start, const SearchOptions& opts) {
  Vec z = ctx.z_vector(start);
  FourierLoop warm = project_Pperp(start.resized(ctx.d_grid()), ctx.d_cut());
  FourierLoop y = ctx.solve_y(z, &warm).y;
  Vec g = ctx.reduced_gradient(z, y);
  double r = g.norm();
  const double tol = ctx.options().tol_crit;

  // Short explicit flows along +G' and -G'; keep whichever lowers ||G'||.
  const double h = 0.5 / (ctx.lambda() + std::abs(ctx.that()) * ctx.m2());
  for (int step = 0; step < opts.flow_steps && r > tol; ++step) {
    double best_r = r;
    Vec best_z;
    FourierLoop best_y;
    for (double sign : {1.0, -1.0}) {
      const Vec zt = z + sign * h * g;
      FourierLoop yt = ctx.solve_y(zt, &y).y;
      const double rt = ctx.reduced_gradient(zt, yt).norm();
      if (rt < best_r) {
        best_r = rt;
        best_z = zt;
        best_y = std::move(yt);
      }
    }
    if (!(best_r < 0.99 * r)) break;
    z = best_z;
    y = std::move(best_y);
    g = ctx.reduced_gradient(z, y);
    r = g.norm();
  }

  // Levenberg-Marquardt on ||G'||^2 with the Schur-complement Jacobian.
  std::vector<double> history{r};
  double lambda = -1.0;
  for (int it = 0; it < opts.max_iterations && r > tol; ++it) {
    const auto lin = ctx.linearize(z, y);
    const Mat JtJ = lin.jacobian.transpose() * lin.jacobian;
    const Vec Jtg = lin.jacobian.transpose() * g;
    const double scale = std::max(1e-300, JtJ.diagonal().maxCoeff());
    if (lambda < 0.0) lambda = 1e-6 * scale;
    bool accepted = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Mat sys = JtJ;
      sys.diagonal().array() += lambda;
      const Vec dz = sys.ldlt().solve(-Jtg);
      const Vec zt = z + dz;
      FourierLoop pred = ctx.predict_y(y, lin.dy_dz, dz);
      FourierLoop yt = ctx.solve_y(zt, &pred).y;
      const Vec gt = ctx.reduced_gradient(zt, yt);
      const double rt = gt.norm();
      if (rt < r) {
        z = zt;
        y = std::move(yt);
        g = gt;
        r = rt;
        lambda = std::max(0.1 * lambda, 1e-15 * scale);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) break;
    history.push_back(r);
    const int n = static_cast<int>(history.size());
    if (n > opts.progress_window && r > 0.1 * history[n - 1 - opts.progress_window]) break;
    // A loop on the plateau has G' = -P J (0, L k) and cannot recover.
    if (n > opts.stall_window && r > 0.5 * history[n - 1 - opts.stall_window]) break;
  }
  if (!(r <= tol)) return std::nullopt;
  return Converged{z, y, r};
}

double loop_level(const ReductionContext& ctx, const FourierLoop& x) {
  const Mat s = ctx.sheared_samples(x);
  double acc = 0.0;
  for (int j = 0; j < ctx.nt(); ++j) acc += ctx.hhat().value(s.col(j));
  return acc / ctx.nt();
}

bool lexicographic_less(const PointVec& a, const PointVec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

std::vector<CriticalPoint> search_all(const ReductionContext& ctx, const std::vector<FourierLoop>& starts,
                                      const SearchOptions& opts, SearchResult& res) {
  std::vector<CriticalPoint> classes;
  const WrapPeriods periods = full_lattice(ctx);
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const auto conv = run_start(ctx, starts[s], opts);
    if (!conv) {
      ++res.rejected_starts;
      continue;
    }
    ++res.converged_starts;
    CriticalPoint cp;
    cp.x = canonical_loop(ctx, ctx.z_loop(conv->z) + conv->y);
    cp.z = ctx.z_vector(cp.x);
    cp.y = project_Pperp(cp.x, ctx.d_cut());
    cp.residual = ctx.reduced_gradient(cp.z, cp.y).norm();
    cp.value = ctx.action(cp.x);
    cp.level = loop_level(ctx, cp.x);
    cp.start_index = static_cast<int>(s);

    const ClosedCurve curve = sheared_curve(ctx, cp.x);
    bool merged = false;
    for (auto& other : classes) {
      const ClosedCurve oc = sheared_curve(ctx, other.x);
      if (hausdorff_distance(curve, oc, periods, 128) > 10.0 * opts.ambiguous_tol) continue;
      const double d = hausdorff_distance(curve, oc, periods, 1024);
      if (d <= opts.same_class_tol) {
        ++other.multiplicity;
        merged = true;
        break;
      }
      if (d < opts.ambiguous_tol) {
        other.ambiguous = true;
        cp.ambiguous = true;
        ++res.ambiguous_pairs;
      }
    }
    if (!merged) classes.push_back(std::move(cp));
  }
  std::sort(classes.begin(), classes.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.level != b.level) return a.level < b.level;
    return lexicographic_less(a.x.mean(), b.x.mean());
  });
  return classes;
}

}  // namespace

SearchResult find_critical_points(const ReductionContext& ctx, const std::vector<FourierLoop>& starts,
                                  const SearchOptions& opts) {
  if (starts.empty()) throw InputError("find_critical_points needs at least one start");
  SearchResult res;
  auto cur = std::make_shared<const ReductionContext>(ctx);
  for (;;) {
    try {
      SearchResult attempt;
      attempt.classes = search_all(*cur, starts, opts, attempt);
      attempt.context = cur;
      attempt.inflations = res.inflations;
      return attempt;
    } catch (const ContractionError&) {
      if (res.inflations >= opts.max_inflations) throw;
      cur = std::make_shared<const ReductionContext>(cur->inflated(1.5));
      ++res.inflations;
    }
  }
}

}  // namespace rotsol
