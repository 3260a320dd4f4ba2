#pragma once

#include <memory>
#include <vector>

#include "rotsol/loops.hpp"
#include "rotsol/modification.hpp"
#include "rotsol/traces.hpp"

namespace rotsol {

/// Raised by the fixed-point solve when the iteration stops contracting.
class ContractionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct ReductionOptions {
  double tol_fp = 1e-11;
  double tol_crit = 1e-9;
  int d_cut_override = 0;
  int nt_override = 0;
  int max_fp_iterations = 500;
};

struct YSolution {
  FourierLoop y;
  int iterations = 0;
  double max_ratio = 0.0;  ///< largest observed step ratio
  double residual = 0.0;   ///< || y - A0^{-1} Pperp B'(z + y) ||
};

/// Closure diagnostics of a loop against xdot + (0, k) = That J Hhat'(x + t (0, k)).
struct LoopResidual {
  double ode = 0.0;      ///< sup-norm residual of the spectral derivative on the grid
  double closure = 0.0;  ///< | x(1) - x(0) | after integrating the ODE from x(0)
  double level_spread = 0.0;
  double level = 0.0;    ///< mean Hhat along the sheared loop
};

/// The splitting of the action functional for one choice of (That, k): the shear (0, L k),
/// the low-mode space Z (|m| <= d_cut) and the contraction that solves for the high modes.
class ReductionContext {
 public:
  /// Requires That != 0, k != 0 with one entry per q coordinate, and l = n.
  ReductionContext(std::shared_ptr<const ExtendedHamiltonian> hhat, double that, IntVec k,
                   ReductionOptions opts = {}, double m2_scale = 1.0);

  const ExtendedHamiltonian& hhat() const { return *hhat_; }
  std::shared_ptr<const ExtendedHamiltonian> hhat_ptr() const { return hhat_; }
  double that() const { return that_; }
  const IntVec& k() const { return k_; }
  const ReductionOptions& options() const { return opts_; }
  int dim() const { return dim_; }
  int d_cut() const { return cut_.d_cut; }
  int d_grid() const { return d_grid_; }
  int nt() const { return nt_; }
  double lambda() const { return cut_.lambda; }
  double m2() const { return m2_; }
  double m2_scale() const { return m2_scale_; }
  const PointVec& shear() const { return shear_; }
  int z_size() const { return dim_ * (2 * cut_.d_cut + 1); }
  int full_size() const { return dim_ * (2 * d_grid_ + 1); }

  /// Same problem with the Hessian bound scaled up (larger d_cut).
  ReductionContext inflated(double factor) const;

  /// z coordinates are the low modes stacked by m = -d_cut..d_cut.
  FourierLoop z_loop(const Vec& z) const;
  Vec z_vector(const FourierLoop& x) const;
  /// Lattice translate (m', L m) added to the mean mode.
  Vec lattice_shift(const Vec& z, const PointVec& shift) const;

  /// gamma(t_j) = x(t_j) + t_j (0, L k) on the nt-point grid.
  Mat sheared_samples(const FourierLoop& x) const;
  FourierLoop B_gradient(const FourierLoop& x) const;
  double B_value(const FourierLoop& x) const;
  /// 1/2 <Ax, x> - B(x).
  double action(const FourierLoop& x) const;

  /// y -> A0^{-1} Pperp B'(z + y).
  FourierLoop contraction_map(const FourierLoop& zl, const FourierLoop& y) const;
  /// Fixed-point iteration from `warm` (or zero). Throws ContractionError if the step ratio
  /// exceeds 0.9 for three consecutive iterations.
  YSolution solve_y(const Vec& z, const FourierLoop* warm = nullptr) const;

  double reduced_value(const Vec& z) const;
  Vec reduced_gradient(const Vec& z) const;
  /// Az - P B'(z + y) for a given y.
  Vec reduced_gradient(const Vec& z, const FourierLoop& y) const;

  struct Linearization {
    Mat jacobian;  ///< G''(z) by the Schur complement of A - B''
    Mat dy_dz;     ///< derivative of y(z), high-mode coefficients by z coordinates
  };
  Linearization linearize(const Vec& z, const FourierLoop& y) const;
  /// Adds the linear prediction dy_dz * dz to y.
  FourierLoop predict_y(const FourierLoop& y, const Mat& dy_dz, const Vec& dz) const;

  LoopResidual loop_residual(const FourierLoop& x) const;

 private:
  std::shared_ptr<const ExtendedHamiltonian> hhat_;
  double that_;
  IntVec k_;
  ReductionOptions opts_;
  double m2_scale_;
  double m2_;
  int dim_;
  SpectralCutoff cut_;
  int d_grid_;
  int nt_;
  PointVec shear_;
};

struct CriticalPoint {
  Vec z;
  FourierLoop y;
  FourierLoop x;  ///< canonical representative z + y
  double residual = 0.0;
  double value = 0.0;
  double level = 0.0;  ///< mean Hhat along the sheared loop
  int start_index = -1;
  int multiplicity = 1;  ///< converged starts that landed in this class
  bool ambiguous = false;
};

struct SearchOptions {
  int flow_steps = 12;
  int max_iterations = 60;
  int progress_window = 10;  ///< reject when ||G'|| has not dropped tenfold within this many iterations
  int stall_window = 4;      ///< reject when ||G'|| has not halved within this many iterations
  double same_class_tol = 1e-4;  ///< trace distance on the full lattice
  double ambiguous_tol = 1e-2;
  int max_inflations = 3;
};

struct SearchResult {
  std::vector<CriticalPoint> classes;
  std::shared_ptr<const ReductionContext> context;  ///< final context after any Hessian-bound inflation
  int converged_starts = 0;
  int rejected_starts = 0;
  int ambiguous_pairs = 0;
  int inflations = 0;
};

/// Time shift and lattice translate putting x in canonical form: phase from the first Fourier
/// mode, mean reduced to the fundamental cell.
FourierLoop canonical_loop(const ReductionContext& ctx, const FourierLoop& x);

/// The sheared loop as a closed curve and its full-lattice periods (N0 in p, L in q).
ClosedCurve sheared_curve(const ReductionContext& ctx, const FourierLoop& x);
WrapPeriods full_lattice(const ReductionContext& ctx);

/// Short flows along +G' and -G', then Levenberg-Marquardt on ||G'||^2 from every start.
/// Converged points are merged into lattice classes and sorted by Hhat level.
SearchResult find_critical_points(const ReductionContext& ctx, const std::vector<FourierLoop>& starts,
                                  const SearchOptions& opts = {});

/// Fits a 1-periodic loop sampled at t_j = j / N (dim x N, N a power of two) on the grid band.
FourierLoop loop_from_samples(const ReductionContext& ctx, const Mat& samples);
/// Low-mode projection of a sampled solution loop.
Vec seed_from_orbit(const ReductionContext& ctx, const Mat& samples);

}  // namespace rotsol
