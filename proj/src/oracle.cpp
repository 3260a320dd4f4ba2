#include "rotsol/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rotsol/numerics.hpp"

namespace rotsol {

Trajectory integrate_hamiltonian(const HamiltonianSystem& sys, const PointVec& x0, double T, double tol,
                                 int records) {
  if (!(tol >= 1e-13)) throw InputError("integrator tolerance must be at least 1e-13");
  records = std::max(1, records);
  numerics::DormandPrince::Options o;
  o.rtol = tol;
  o.atol = tol;
  numerics::DormandPrince dp([&](double, const Vec& y, Vec& dy) { dy = sys.vector_field(y); }, o);
  Trajectory out;
  std::vector<double> times(records);
  for (int j = 1; j <= records; ++j) times[j - 1] = T * j / records;
  const auto states = dp.integrate_dense(0.0, x0, times);
  const double h0 = sys.energy(x0);
  out.times.push_back(0.0);
  out.states.push_back(x0);
  for (int j = 0; j < records; ++j) {
    out.times.push_back(times[j]);
    out.states.push_back(states[j]);
    out.energy_drift = std::max(out.energy_drift, std::abs(sys.energy(states[j]) - h0));
  }
  out.drift_flagged = out.energy_drift > 100.0 * tol;
  return out;
}

namespace {

/// Orthonormal basis of the tangent space of the unit sphere at d (np x (np - 1)).
Mat tangent_basis(const PointVec& d) {
  const int np = static_cast<int>(d.size());
  Mat full = Mat::Identity(np, np);
  full.col(0) = d;
  Eigen::HouseholderQR<Mat> qr(full);
  const Mat Q = qr.householderQ();
  return Q.rightCols(np - 1);
}

/// Time at which q_i - q0_i first reaches k_i L_i, found by marching and bisection.
double first_crossing(const HamiltonianSystem& sys, const PointVec& z0, int i, double target, double direction) {
  numerics::DormandPrince dp([&](double, const Vec& y, Vec& dy) { dy = sys.vector_field(y); });
  const int qi = sys.np() + i;
  auto gap = [&](const Vec& z) { return (z[qi] - z0[qi] - target) * (target > 0 ? 1.0 : -1.0); };
  const double chunk = 0.05 * direction;
  Vec z = z0;
  double t = 0.0;
  for (int step = 0; step < 20000; ++step) {
    const Vec zn = dp.integrate(t, z, t + chunk);
    if (gap(zn) >= 0.0) {
      auto f = [&](double s) { return gap(dp.integrate(t, z, s)); };
      const double lo = std::min(t, t + chunk), hi = std::max(t, t + chunk);
      // gap is increasing along the march direction
      auto g = [&](double s) { return direction > 0 ? f(s) : -f(s); };
      return numerics::bisect(g, lo, hi, 1e-10).x;
    }
    z = zn;
    t += chunk;
  }
  throw NumericalError("shooting: the orbit never completes the requested winding");
}

}  // namespace

RotationSolution shoot_rotation_orbit(const ShootingProblem& prob) {
  const auto& sys = prob.gauge.system();
  const int np = sys.np(), ell = sys.ell, dim = sys.dim();
  if (prob.k.size() != ell || prob.k.isZero()) throw InputError("shooting needs a nonzero rotation vector");
  if (prob.q0.size() != ell || prob.dir.size() != np) throw InputError("shooting start has the wrong dimension");
  int fixed = 0;
  for (int i = 1; i < ell; ++i) {
    if (std::abs(prob.k[i]) > std::abs(prob.k[fixed])) fixed = i;
  }
  const PointVec shear = rotation_shear(sys, prob.k);

  PointVec dir = prob.dir.normalized();
  PointVec q0 = prob.q0;
  double T = prob.T_guess;
  if (T == 0.0) {
    const PointVec z0 = prob.gauge.chart_F2(dir, q0);
    const double qdot = sys.gradient(z0)[fixed];  // H_p component driving q_fixed when np = ell
    const double target = shear[np + fixed];
    const double direction = (qdot * target >= 0.0) ? 1.0 : -1.0;
    T = first_crossing(sys, z0, fixed, target, direction);
  }

  numerics::DormandPrince::Options o;
  o.rtol = 1e-13;
  o.atol = 1e-13;
  numerics::DormandPrince dp([&](double, const Vec& y, Vec& dy) { dy = sys.vector_field(y); }, o);

  // Unknowns u = (free q entries, tangent coordinates of the direction, T).
  const int nfree = ell - 1, nt = np - 1, nu = nfree + nt + 1;
  auto unpack = [&](const Vec& u, const Mat& B, PointVec& d, PointVec& q, double& t) {
    q = q0;
    int a = 0;
    for (int i = 0; i < ell; ++i) {
      if (i != fixed) q[i] += u[a++];
    }
    if (nt > 0) {
      d = (dir + B * u.segment(a, nt)).normalized();
    } else {
      d = dir;
    }
    t = T + u[nu - 1];
  };
  auto residual = [&](const Vec& u, const Mat& B) {
    PointVec d, q;
    double t;
    unpack(u, B, d, q, t);
    const Vec z0 = prob.gauge.chart_F2(d, q);
    return Vec(dp.integrate(0.0, z0, t) - z0 - shear);
  };

  double res = 0.0;
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    const Mat B = nt > 0 ? tangent_basis(dir) : Mat(np, 0);
    auto f = [&](const Vec& u) { return residual(u, B); };
    const Vec u0 = Vec::Zero(nu);
    const Vec r0 = f(u0);
    res = r0.cwiseAbs().maxCoeff();
    if (res <= prob.tol) {
      converged = true;
      break;
    }
    const Mat Jac = numerics::fd_jacobian(f, u0, 1e-7);
    Vec du = Jac.colPivHouseholderQr().solve(-r0);
    // Backtracking on the residual norm.
    double step = 1.0;
    Vec best = du;
    for (int bt = 0; bt < 20; ++bt) {
      const Vec trial = step * du;
      if (f(trial).norm() < r0.norm()) {
        best = trial;
        break;
      }
      step *= 0.5;
      best = trial;
    }
    PointVec d, q;
    double t;
    unpack(best, B, d, q, t);
    dir = d;
    q0 = q;
    T = t;
  }
  if (!converged) throw NumericalError("shooting: Newton iteration did not converge in 50 iterations");

  const int N = prob.samples;
  const Vec z0 = prob.gauge.chart_F2(dir, q0);
  std::vector<double> times(N - 1);
  for (int j = 1; j < N; ++j) times[j - 1] = T * j / N;
  const auto states = dp.integrate_dense(0.0, z0, times);
  Mat samples(dim, N);
  samples.col(0) = z0;
  for (int j = 1; j < N; ++j) samples.col(j) = states[j - 1];
  return make_rotation_solution(sys, prob.gauge.energy(), prob.k, T, samples);
}

double pendulum_period_quadrature(double M) {
  if (!(M > 1.0)) throw InputError("pendulum rotation period needs M > 1");
  return numerics::adaptive_simpson([M](double q) { return 1.0 / std::sqrt(2.0 * (M + std::cos(q))); }, 0.0,
                                    2.0 * std::numbers::pi, 1e-13);
}

}  // namespace rotsol
