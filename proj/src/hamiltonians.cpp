#include "rotsol/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rotsol/numerics.hpp"

namespace rotsol {

PointMat Hamiltonian::hessian(const PointVec& x) const {
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

TrigHamiltonian::TrigHamiltonian(int np, Vec lattice, std::vector<CosineTerm> terms)
    : np_(np), lattice_(std::move(lattice)), terms_(std::move(terms)) {
  const auto nq = lattice_.size();
  for (const auto& term : terms_) {
    if (static_cast<Eigen::Index>(term.frequency.size()) != nq) {
      throw InputError("cosine term frequency has wrong dimension");
    }
    PointVec w(nq);
    for (Eigen::Index j = 0; j < nq; ++j) {
      const double m = term.frequency[j];
      if (m != std::round(m)) throw InputError("non-periodic potential: frequency must be an integer");
      w[j] = 2.0 * std::numbers::pi * m / lattice_[j];
    }
    wavevectors_.push_back(w);
  }
}

double TrigHamiltonian::potential(const PointVec& q) const {
  double v = 0.0;
  for (std::size_t i = 0; i < terms_.size(); ++i) v += terms_[i].amplitude * std::cos(wavevectors_[i].dot(q));
  return v;
}

double TrigHamiltonian::value(const PointVec& x) const {
  return 0.5 * x.head(np_).squaredNorm() + potential(x.tail(x.size() - np_));
}

PointVec TrigHamiltonian::gradient(const PointVec& x) const {
  PointVec g(x.size());
  const auto nq = x.size() - np_;
  g.head(np_) = x.head(np_);
  g.tail(nq).setZero();
  const PointVec q = x.tail(nq);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    g.tail(nq) -= terms_[i].amplitude * std::sin(wavevectors_[i].dot(q)) * wavevectors_[i];
  }
  return g;
}

PointMat TrigHamiltonian::hessian(const PointVec& x) const {
  const auto dim = x.size(), nq = dim - np_;
  PointMat hess = PointMat::Zero(dim, dim);
  hess.topLeftCorner(np_, np_).setIdentity();
  const PointVec q = x.tail(nq);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& w = wavevectors_[i];
    hess.bottomRightCorner(nq, nq) -= terms_[i].amplitude * std::cos(w.dot(q)) * (w * w.transpose());
  }
  return hess;
}

HamiltonianSystem build_system(const SystemSpec& spec) {
  HamiltonianSystem sys;
  sys.name = spec.name;
  std::vector<CosineTerm> terms;
  double mu = spec.mu, r = spec.r;
  if (spec.name == "pendulum") {
    sys.n = 1;
    sys.ell = 1;
    terms = {{-1.0, {1.0}}};
    if (mu == 0.0) mu = 1.0;
    if (r == 0.0) r = 2.0;
  } else if (spec.name == "coupled_pendulum") {
    sys.n = 2;
    sys.ell = 2;
    terms = {{-1.0, {1.0, 0.0}}, {-1.0, {0.0, 1.0}}};
    if (mu == 0.0) mu = 1.0;
    if (r == 0.0) r = 2.1;
  } else if (spec.name == "custom_trig") {
    sys.n = spec.n;
    sys.ell = spec.ell == 0 ? spec.n : spec.ell;
    terms = spec.terms;
    if (sys.n < 1 || 2 * sys.n > kMaxPhaseDim) throw InputError("custom_trig: n out of range");
    if (sys.ell < 1 || sys.ell >= 2 * sys.n) throw InputError("custom_trig: need 1 <= ell < 2n");
  } else {
    throw InputError("unknown system name: " + spec.name);
  }
  if (!(mu > 0.0) || !(r > 0.0)) throw InputError("mu and r must be positive");
  sys.mu = mu;
  sys.r = r;
  if (spec.lattice.size() == 0) {
    sys.lattice = Vec::Constant(sys.ell, 2.0 * std::numbers::pi);
  } else {
    if (spec.lattice.size() != sys.ell || (spec.lattice.array() <= 0.0).any()) {
      throw InputError("lattice must have ell positive entries");
    }
    sys.lattice = spec.lattice;
  }
  sys.h = std::make_shared<TrigHamiltonian>(sys.np(), sys.lattice, std::move(terms));
  return sys;
}

HamiltonianSystem build_system(const std::string& catalog_name) {
  SystemSpec spec;
  spec.name = catalog_name;
  return build_system(spec);
}

std::vector<PointVec> sphere_directions(int np, int count) {
  std::vector<PointVec> dirs;
  if (np == 1) {
    dirs.push_back(PointVec::Constant(1, 1.0));
    dirs.push_back(PointVec::Constant(1, -1.0));
    return dirs;
  }
  if (np == 2) {
    for (int i = 0; i < count; ++i) {
      const double th = 2.0 * std::numbers::pi * i / count;
      PointVec d(2);
      d << std::cos(th), std::sin(th);
      dirs.push_back(d);
    }
    return dirs;
  }
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> normal;
  for (int i = 0; i < count; ++i) {
    PointVec d(np);
    for (int j = 0; j < np; ++j) d[j] = normal(rng);
    dirs.push_back(d.normalized());
  }
  return dirs;
}

namespace {

/// All points of a tensor grid with `per_dim` nodes per coordinate on [0, L_j).
std::vector<PointVec> q_grid(const Vec& lattice, int per_dim) {
  const auto nq = lattice.size();
  std::vector<PointVec> pts;
  long total = 1;
  for (Eigen::Index j = 0; j < nq; ++j) total *= per_dim;
  pts.reserve(total);
  for (long idx = 0; idx < total; ++idx) {
    PointVec q(nq);
    long rem = idx;
    for (Eigen::Index j = 0; j < nq; ++j) {
      q[j] = lattice[j] * static_cast<double>(rem % per_dim) / per_dim;
      rem /= per_dim;
    }
    pts.push_back(q);
  }
  return pts;
}

PointVec stack(const PointVec& p, const PointVec& q) {
  PointVec x(p.size() + q.size());
  x << p, q;
  return x;
}

/// Nodes per dimension for a 32^dim multistart grid, capped to keep the grid near 2e6 points.
int grid_nodes(int dim) {
  const int capped = static_cast<int>(std::floor(std::pow(2.0e6, 1.0 / dim)));
  return std::clamp(capped, 4, 32);
}

struct Candidate {
  double value;
  Vec x;
};

/// Keeps the `keep` lowest-valued candidates.
void push_candidate(std::vector<Candidate>& best, std::size_t keep, double value, const Vec& x) {
  if (best.size() < keep || value < best.back().value) {
    best.push_back({value, x});
    std::sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
    if (best.size() > keep) best.pop_back();
  }
}

}  // namespace

AssumptionReport check_assumptions(const HamiltonianSystem& sys, const SamplingPlan& plan) {
  AssumptionReport rep;
  rep.positivity_violation = -std::numeric_limits<double>::infinity();
  rep.growth_violation = -std::numeric_limits<double>::infinity();
  const auto dirs = sphere_directions(sys.np(), plan.directions);
  const auto qs = q_grid(sys.lattice, plan.q_per_dim);
  for (int ir = 0; ir < plan.radii; ++ir) {
    const double rad = sys.r * (1.0 + 2.0 * ir / std::max(1, plan.radii - 1));
    for (const auto& d : dirs) {
      for (const auto& q : qs) {
        const PointVec x = stack(rad * d, q);
        const double hv = sys.energy(x);
        const PointVec g = sys.gradient(x);
        const double p_dot_hp = x.head(sys.np()).dot(g.head(sys.np()));
        rep.positivity_violation = std::max(rep.positivity_violation, -sys.mu * hv);
        rep.growth_violation = std::max(rep.growth_violation, sys.mu * hv - p_dot_hp);
        for (int j = 0; j < sys.ell; ++j) {
          PointVec shifted = x;
          shifted[sys.np() + j] += sys.lattice[j];
          rep.periodicity_violation =
              std::max(rep.periodicity_violation, std::abs(sys.energy(shifted) - hv) / (1.0 + std::abs(hv)));
        }
      }
    }
  }
  rep.pass = rep.positivity_violation < 0.0 && rep.growth_violation <= 0.0 && rep.periodicity_violation <= 1e-12;
  return rep;
}

double radial_level_root(const HamiltonianSystem& sys, double M, const PointVec& dir, const PointVec& q, double lo,
                         double hi, double guess) {
  const int np = sys.np();
  PointVec x(sys.dim());
  x.tail(sys.ell) = q;
  auto f_df = [&](double lam, double& f, double& df) {
    x.head(np) = lam * dir;
    f = sys.energy(x) - M;
    df = sys.gradient(x).head(np).dot(dir);
  };
  const auto res = numerics::safe_newton(f_df, lo, hi, guess, 1e-13 * (1.0 + std::abs(M)));
  if (!res.converged) throw NumericalError("radial root did not converge");
  return res.x;
}

const char* to_string(SurfaceRule r) { return r == SurfaceRule::growth ? "growth" : "star_shaped"; }

EnergyContext energy_context(const HamiltonianSystem& sys, double M, SurfaceRule rule) {
  EnergyContext ctx;
  ctx.M = M;
  ctx.rule = rule;
  const int np = sys.np(), nq = sys.ell;
  constexpr std::size_t kPolish = 6;

  // M*: maximize H over the closed ball |p| <= r times one q-cell.
  {
    const int nodes = grid_nodes(np + nq);
    auto project = [&](const Vec& v) {
      PointVec p = v.head(np);
      const double nrm = p.norm();
      if (nrm > sys.r) p *= sys.r / nrm;
      return stack(p, v.tail(nq));
    };
    auto objective = [&](const Vec& v) { return -sys.energy(project(v)); };
    std::vector<Candidate> best;
    const auto qs = q_grid(sys.lattice, nodes);
    Vec v(np + nq);
    long p_total = 1;
    for (int j = 0; j < np; ++j) p_total *= nodes;
    for (long pi = 0; pi < p_total; ++pi) {
      long rem = pi;
      for (int j = 0; j < np; ++j) {
        v[j] = -sys.r + 2.0 * sys.r * static_cast<double>(rem % nodes) / (nodes - 1);
        rem /= nodes;
      }
      if (v.head(np).norm() > sys.r * (1.0 + 1e-12)) continue;
      for (const auto& q : qs) {
        v.tail(nq) = q;
        push_candidate(best, kPolish, objective(v), v);
      }
    }
    // Boundary sphere, where the maximum usually sits.
    for (const auto& d : sphere_directions(np, 2 * nodes)) {
      for (const auto& q : qs) {
        v << sys.r * d, q;
        push_candidate(best, kPolish, objective(v), v);
      }
    }
    double mstar = -best.front().value;
    for (const auto& c : best) {
      const auto res = numerics::nelder_mead(objective, c.x, 0.05 * sys.r, 1e-13);
      mstar = std::max(mstar, -res.value);
    }
    ctx.Mstar = mstar;
  }
  if (rule == SurfaceRule::growth) {
    ctx.threshold = ctx.Mstar;
    if (!(M > ctx.Mstar)) {
      throw InputError("M ≤ M*: energy " + std::to_string(M) + " does not exceed M* = " + std::to_string(ctx.Mstar));
    }
  } else {
    // Rays are monotone when H = |p|^2 / 2 + V(q), so the surface is star-shaped iff M > max V.
    const auto* trig = dynamic_cast<const TrigHamiltonian*>(sys.h.get());
    if (!trig) throw InputError("star_shaped surface rule needs a kinetic-plus-potential Hamiltonian");
    auto objective = [&](const Vec& q) { return -trig->potential(q); };
    std::vector<Candidate> best;
    for (const auto& q : q_grid(sys.lattice, grid_nodes(nq))) push_candidate(best, kPolish, objective(q), Vec(q));
    double vmax = -best.front().value;
    for (const auto& c : best) vmax = std::max(vmax, -numerics::nelder_mead(objective, c.x, 0.05, 1e-14).value);
    ctx.threshold = vmax;
    if (!(M > vmax)) {
      throw InputError("M ≤ max V: energy " + std::to_string(M) + " does not exceed max_q H(0, q) = " +
                       std::to_string(vmax));
    }
  }

  // Direction parametrization shared by the a and r' searches.
  const int dir_dims = np == 1 ? 0 : np;
  const auto dirs = sphere_directions(np, np == 1 ? 2 : std::max(8, grid_nodes(np - 1 + nq)));
  const auto qs = q_grid(sys.lattice, grid_nodes(std::max(1, np - 1 + nq)));
  auto split_dir = [&](const Vec& v, double sign) {
    PointVec d(np);
    if (np == 1) d[0] = sign;
    else d = v.head(np).normalized();
    return d;
  };

  // a: minimize H / |p|^mu on the sphere |p| = r.
  {
    double amin = std::numeric_limits<double>::infinity();
    for (double sign : {1.0, -1.0}) {
      if (np > 1 && sign < 0.0) break;
      auto objective = [&](const Vec& v) {
        return sys.energy(stack(sys.r * split_dir(v, sign), v.tail(nq))) / std::pow(sys.r, sys.mu);
      };
      std::vector<Candidate> best;
      Vec v(dir_dims + nq);
      for (const auto& d : dirs) {
        if (np == 1 && d[0] != sign) continue;
        for (const auto& q : qs) {
          if (dir_dims > 0) v.head(dir_dims) = d;
          v.tail(nq) = q;
          push_candidate(best, kPolish, objective(v), v);
        }
      }
      for (const auto& c : best) {
        amin = std::min(amin, numerics::nelder_mead(objective, c.x, 0.05, 1e-13).value);
      }
    }
    ctx.a = amin;
  }
  if (!(ctx.a > 0.0)) throw NumericalError("growth constant a is not positive; growth condition fails");
  ctx.rhigh = std::max(sys.r, std::pow(M / ctx.a, 1.0 / sys.mu));

  // r': minimize the radial section sigma over directions and q.
  {
    double rmin = std::numeric_limits<double>::infinity();
    const double lo = rule == SurfaceRule::growth ? 0.5 * sys.r : 1e-9 * sys.r, hi = 2.0 * ctx.rhigh;
    for (double sign : {1.0, -1.0}) {
      if (np > 1 && sign < 0.0) break;
      auto objective = [&](const Vec& v) {
        return radial_level_root(sys, M, split_dir(v, sign), v.tail(nq), lo, hi, 0.5 * (lo + hi));
      };
      std::vector<Candidate> best;
      Vec v(dir_dims + nq);
      for (const auto& d : dirs) {
        if (np == 1 && d[0] != sign) continue;
        for (const auto& q : qs) {
          if (dir_dims > 0) v.head(dir_dims) = d;
          v.tail(nq) = q;
          push_candidate(best, kPolish, objective(v), v);
        }
      }
      for (const auto& c : best) {
        rmin = std::min(rmin, numerics::nelder_mead(objective, c.x, 0.05, 1e-13).value);
      }
    }
    ctx.rlow = rmin;
  }
  return ctx;
}

}  // namespace rotsol
