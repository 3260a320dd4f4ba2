#include "rotsol/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rotsol::numerics {

RootResult safe_newton(const std::function<void(double, double&, double&)>& f_df, double lo, double hi,
                       double guess, double ftol, int max_iter) {
  double f_lo = 0.0, f_hi = 0.0, d = 0.0;
  f_df(lo, f_lo, d);
  f_df(hi, f_hi, d);
  if (f_lo == 0.0) return {lo, 0.0, 0, true};
  if (f_hi == 0.0) return {hi, 0.0, 0, true};
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw NumericalError("safe_newton: root not bracketed");
  }
  // Orient so that f(lo) < 0 < f(hi).
  if (f_lo > 0.0) std::swap(lo, hi);

  double x = guess;
  if (!(x > std::min(lo, hi) && x < std::max(lo, hi))) x = 0.5 * (lo + hi);
  RootResult res;
  for (int it = 1; it <= max_iter; ++it) {
    double f = 0.0, df = 0.0;
    f_df(x, f, df);
    res = {x, f, it, false};
    if (std::abs(f) <= ftol) {
      res.converged = true;
      return res;
    }
    if (f < 0.0) lo = x; else hi = x;
    double next = (df != 0.0) ? x - f / df : 0.5 * (lo + hi);
    const double a = std::min(lo, hi), b = std::max(lo, hi);
    if (!(next > a && next < b)) next = 0.5 * (lo + hi);
    if (std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) {
      res.converged = true;
      return res;
    }
    x = next;
  }
  return res;
}

RootResult bisect(const std::function<double(double)>& f, double lo, double hi, double xtol, int max_iter) {
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo == 0.0) return {lo, 0.0, 0, true};
  if (f_hi == 0.0) return {hi, 0.0, 0, true};
  if ((f_lo > 0.0) == (f_hi > 0.0)) throw NumericalError("bisect: root not bracketed");
  RootResult res;
  for (int it = 1; it <= max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    res = {mid, fm, it, false};
    if (fm == 0.0 || 0.5 * std::abs(hi - lo) <= xtol) {
      res.converged = true;
      return res;
    }
    if ((fm > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
  }
  return res;
}

MinimizeResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& start, double initial_step,
                           double ftol, int max_evals) {
  const Eigen::Index dim = start.size();
  std::vector<Vec> simplex(dim + 1, start);
  std::vector<double> values(dim + 1);
  for (Eigen::Index i = 0; i < dim; ++i) simplex[i + 1][i] += initial_step;
  int evals = 0;
  for (Eigen::Index i = 0; i <= dim; ++i) {
    values[i] = f(simplex[i]);
    ++evals;
  }
  std::vector<Eigen::Index> order(dim + 1);
  bool converged = false;
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const auto best = order.front(), worst = order.back(), second = order[dim - 1 >= 0 ? dim - 1 : 0];
    const double spread = std::abs(values[worst] - values[best]);
    double size = 0.0;
    for (const auto& v : simplex) size = std::max(size, (v - simplex[best]).cwiseAbs().maxCoeff());
    if (spread <= ftol * (1.0 + std::abs(values[best])) && size <= 1e-7) {
      converged = true;
      break;
    }
    Vec centroid = Vec::Zero(dim);
    for (auto i : order)
      if (i != worst) centroid += simplex[i];
    centroid /= static_cast<double>(dim);

    const Vec reflected = centroid + (centroid - simplex[worst]);
    const double f_r = f(reflected);
    ++evals;
    if (f_r < values[best]) {
      const Vec expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double f_e = f(expanded);
      ++evals;
      if (f_e < f_r) {
        simplex[worst] = expanded;
        values[worst] = f_e;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_r;
      }
      continue;
    }
    if (f_r < values[second]) {
      simplex[worst] = reflected;
      values[worst] = f_r;
      continue;
    }
    const bool outside = f_r < values[worst];
    const Vec contracted = outside ? Vec(centroid + 0.5 * (reflected - centroid))
                                   : Vec(centroid + 0.5 * (simplex[worst] - centroid));
    const double f_c = f(contracted);
    ++evals;
    if (f_c < std::min(f_r, values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_c;
      continue;
    }
    for (auto i : order) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = f(simplex[i]);
      ++evals;
    }
  }
  const auto best = std::min_element(values.begin(), values.end()) - values.begin();
  return {simplex[best], values[best], evals, converged};
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  // Split into a few panels first so symmetric integrands cannot fool the first error estimate.
  constexpr int kPanels = 8;
  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double lo = a + (b - a) * i / kPanels, hi = a + (b - a) * (i + 1) / kPanels;
    const double flo = f(lo), fhi = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
    total += simpson_step(f, lo, hi, flo, fm, fhi, whole, tol / kPanels, 50);
  }
  return total;
}

// Dormand-Prince 5(4) tableau.
namespace {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace

double DormandPrince::step(double t, const Vec& y, double h, double& err) {
  rhs_(t, y, k1_);
  tmp_ = y + h * a21 * k1_;
  rhs_(t + c2 * h, tmp_, k2_);
  tmp_ = y + h * (a31 * k1_ + a32 * k2_);
  rhs_(t + c3 * h, tmp_, k3_);
  tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
  rhs_(t + c4 * h, tmp_, k4_);
  tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
  rhs_(t + c5 * h, tmp_, k5_);
  tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
  rhs_(t + h, tmp_, k6_);
  tmp_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
  rhs_(t + h, tmp_, k7_);
  const Vec e = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
  err = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double sc = opts_.atol + opts_.rtol * std::max(std::abs(y[i]), std::abs(tmp_[i]));
    err = std::max(err, std::abs(e[i]) / sc);
  }
  return err;
}

Vec DormandPrince::integrate(double t0, const Vec& y0, double t1) {
  Vec y = y0;
  if (t1 == t0) return y;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const Eigen::Index n = y0.size();
  k1_.resize(n); k2_.resize(n); k3_.resize(n); k4_.resize(n); k5_.resize(n); k6_.resize(n); k7_.resize(n);
  double h = h_last_ != 0.0 ? std::abs(h_last_) : std::min(1e-3, std::abs(t1 - t0));
  double t = t0;
  long local_steps = 0;
  while (dir * (t1 - t) > 0.0) {
    if (++local_steps > opts_.max_steps) throw NumericalError("DormandPrince: step budget exhausted");
    const bool last = h >= std::abs(t1 - t);
    const double h_try = last ? std::abs(t1 - t) : h;
    double err = 0.0;
    step(t, y, dir * h_try, err);
    if (err <= 1.0) {
      t = last ? t1 : t + dir * h_try;
      y = tmp_;
      ++steps_;
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (!last) h = h_try * factor;
      else h = std::max(h, h_try * factor);
    } else {
      h = h_try * std::clamp(0.9 * std::pow(err, -0.25), 0.1, 0.9);
      if (h < opts_.min_step) throw NumericalError("DormandPrince: step size collapsed");
    }
  }
  h_last_ = h;
  return y;
}

std::vector<Vec> DormandPrince::integrate_dense(double t0, const Vec& y0, const std::vector<double>& out_times) {
  std::vector<Vec> out;
  out.reserve(out_times.size());
  Vec y = y0;
  double t = t0;
  for (double target : out_times) {
    y = integrate(t, y, target);
    t = target;
    out.push_back(y);
  }
  return out;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double rel_step) {
  const Vec f0 = f(x);
  Mat jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = rel_step * (1.0 + std::abs(x[j]));
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

}  // namespace rotsol::numerics
