#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rotsol/types.hpp"

namespace rotsol {

/// A C^2 Hamiltonian on R^{2n}, evaluated on stacked points x = (p, q).
class Hamiltonian {
 public:
  virtual ~Hamiltonian() = default;
  virtual double value(const PointVec& x) const = 0;
  virtual PointVec gradient(const PointVec& x) const = 0;
  /// Central differences of `gradient` with step 1e-5 (1 + |x_j|) unless overridden.
  virtual PointMat hessian(const PointVec& x) const;
};

/// One potential term a cos(2 pi sum_j m_j q_j / L_j).
struct CosineTerm {
  double amplitude = 0.0;
  std::vector<double> frequency;
};

/// H(p, q) = |p|^2 / 2 + sum of cosine terms in q.
class TrigHamiltonian final : public Hamiltonian {
 public:
  TrigHamiltonian(int np, Vec lattice, std::vector<CosineTerm> terms);

  double value(const PointVec& x) const override;
  PointVec gradient(const PointVec& x) const override;
  PointMat hessian(const PointVec& x) const override;

  double potential(const PointVec& q) const;
  const std::vector<CosineTerm>& terms() const { return terms_; }

 private:
  int np_;
  Vec lattice_;
  std::vector<CosineTerm> terms_;
  std::vector<PointVec> wavevectors_;
};

/// A Hamiltonian satisfying periodicity in q and the superquadratic growth condition
/// 0 < mu H <= p . H_p for |p| >= r.
struct HamiltonianSystem {
  std::string name;
  int n = 1;    ///< half phase dimension
  int ell = 1;  ///< torus dimension
  Vec lattice;  ///< configuration periods, one per q coordinate
  double mu = 1.0;
  double r = 1.0;
  std::shared_ptr<const Hamiltonian> h;

  int np() const { return 2 * n - ell; }
  int dim() const { return 2 * n; }

  double energy(const PointVec& x) const { return h->value(x); }
  PointVec gradient(const PointVec& x) const { return h->gradient(x); }
  PointMat hessian(const PointVec& x) const { return h->hessian(x); }
  PointVec vector_field(const PointVec& x) const { return apply_J(h->gradient(x)); }
};

/// Catalog name or coefficient table for `build_system`.
struct SystemSpec {
  std::string name = "pendulum";
  int n = 1;
  int ell = 0;  ///< 0 means ell = n
  std::vector<CosineTerm> terms;  ///< used by custom_trig
  double mu = 0.0;                ///< 0 means catalog default (custom_trig requires it)
  double r = 0.0;
  Vec lattice;                    ///< empty means 2 pi per coordinate
};

/// Builds a catalog system ("pendulum", "coupled_pendulum") or a "custom_trig" system.
/// Throws InputError for unknown names, non-integer frequencies, or nonpositive mu / r.
HamiltonianSystem build_system(const SystemSpec& spec);
HamiltonianSystem build_system(const std::string& catalog_name);

struct SamplingPlan {
  int radii = 9;
  int directions = 16;
  int q_per_dim = 24;
};

struct AssumptionReport {
  double periodicity_violation = 0.0;  ///< max |H(p, q + L m) - H(p, q)|
  double positivity_violation = 0.0;   ///< max of -mu H over |p| >= r (must be < 0)
  double growth_violation = 0.0;       ///< max of mu H - p . H_p over |p| >= r
  bool pass = false;
};

/// Samples the growth and periodicity conditions on |p| in [r, 3r] times one q-cell.
AssumptionReport check_assumptions(const HamiltonianSystem& sys, const SamplingPlan& plan = {});

/// Which lower energy bound makes H^{-1}(M) radially star-shaped.
/// growth: M > M*, from the growth condition (required by the solver).
/// star_shaped: M > max_q H(0, q), exact for kinetic energy |p|^2 / 2 plus a potential.
enum class SurfaceRule { growth, star_shaped };

const char* to_string(SurfaceRule r);

/// Energy level M together with the constants bounding the momentum shell of H^{-1}(M).
struct EnergyContext {
  double M = 0.0;
  double Mstar = 0.0;  ///< max H over |p| <= r
  SurfaceRule rule = SurfaceRule::growth;
  double threshold = 0.0;  ///< M must exceed this: M* or max_q H(0, q)
  double a = 0.0;      ///< min over |p| = r of H / |p|^mu
  double rlow = 0.0;   ///< min |p| on the energy surface
  double rhigh = 0.0;  ///< max(r, (M / a)^{1/mu})
};

/// Computes M*, a, r', r'' by grid search plus Nelder-Mead polish.
/// Throws InputError when M does not exceed the threshold of `rule`.
EnergyContext energy_context(const HamiltonianSystem& sys, double M, SurfaceRule rule = SurfaceRule::growth);

/// Solves H(lambda dir, q) = M for lambda in [lo, hi] (H increasing in lambda there).
double radial_level_root(const HamiltonianSystem& sys, double M, const PointVec& dir, const PointVec& q, double lo,
                         double hi, double guess);

/// Deterministic unit directions in R^np: {+1, -1} for np = 1, equally spaced angles for np = 2,
/// seeded pseudo-random points otherwise.
std::vector<PointVec> sphere_directions(int np, int count);

}  // namespace rotsol
