#pragma once

#include <functional>
#include <vector>

#include "rotsol/types.hpp"

namespace rotsol::numerics {

struct RootResult {
  double x = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Newton iteration safeguarded by a sign-change bracket [lo, hi].
/// `f_df` writes f(x) and f'(x). Stops when |f| <= ftol or the bracket collapses.
RootResult safe_newton(const std::function<void(double, double&, double&)>& f_df, double lo, double hi,
                       double guess, double ftol, int max_iter = 100);

/// Bisection for monotone f on [lo, hi] with f(lo) and f(hi) of opposite sign.
RootResult bisect(const std::function<double(double)>& f, double lo, double hi, double xtol, int max_iter = 200);

struct MinimizeResult {
  Vec x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead simplex minimization. Stops when the simplex value spread drops below ftol.
MinimizeResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& start, double initial_step,
                           double ftol = 1e-10, int max_evals = 20000);

/// Adaptive Simpson quadrature on [a, b].
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol);

/// Embedded Dormand-Prince 5(4) integrator with step-size control.
class DormandPrince {
 public:
  using Rhs = std::function<void(double t, const Vec& y, Vec& dydt)>;

  struct Options {
    double rtol = 1e-11;
    double atol = 1e-11;
    double min_step = 1e-14;
    long max_steps = 2000000;
  };

  DormandPrince(Rhs rhs, Options opts) : rhs_(std::move(rhs)), opts_(opts) {}
  explicit DormandPrince(Rhs rhs) : DormandPrince(std::move(rhs), Options{}) {}

  /// Integrates from (t0, y0) to t1 (either direction). Throws NumericalError on step collapse.
  Vec integrate(double t0, const Vec& y0, double t1);

  /// Integrates and records the state at every time in `out_times` (monotone from t0).
  std::vector<Vec> integrate_dense(double t0, const Vec& y0, const std::vector<double>& out_times);

  long steps_taken() const { return steps_; }

 private:
  double step(double t, const Vec& y, double h, double& err);

  Rhs rhs_;
  Options opts_;
  long steps_ = 0;
  double h_last_ = 0.0;
  Vec k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_;
};

/// Central-difference Jacobian of a vector map.
Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double rel_step);

}  // namespace rotsol::numerics
