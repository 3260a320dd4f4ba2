#pragma once

#include "rotsol/types.hpp"

namespace rotsol {

/// A real 1-periodic loop x(t) = sum_{|m| <= d} exp(2 pi m t J) c_m in R^{2n}.
/// The basis is L^2-orthonormal per component and diagonalizes A = -J d/dt with eigenvalue 2 pi m.
class FourierLoop {
 public:
  FourierLoop() = default;
  FourierLoop(int dim, int modes) : coeffs_(Mat::Zero(dim, 2 * modes + 1)), d_(modes) {}

  int dim() const { return static_cast<int>(coeffs_.rows()); }
  int modes() const { return d_; }
  Mat& coeffs() { return coeffs_; }
  const Mat& coeffs() const { return coeffs_; }
  auto mode(int m) { return coeffs_.col(m + d_); }
  auto mode(int m) const { return coeffs_.col(m + d_); }
  PointVec mean() const { return coeffs_.col(d_); }

  PointVec eval(double t) const;
  /// x(t), x'(t) and x''(t) together.
  void eval_jet(double t, PointVec& x, PointVec& dx, PointVec& ddx) const;
  /// Samples at t_j = j / nt, returned as a dim x nt matrix. Needs nt > 2 d.
  Mat grid_eval(int nt) const;

  FourierLoop apply_A() const;
  FourierLoop derivative() const;
  /// t -> x(t + tau).
  FourierLoop time_shifted(double tau) const;
  /// Same loop with a different number of retained modes (truncating or zero padding).
  FourierLoop resized(int modes) const;

  double inner(const FourierLoop& other) const;
  double norm() const { return std::sqrt(inner(*this)); }

  FourierLoop& operator+=(const FourierLoop& o);
  FourierLoop& operator-=(const FourierLoop& o);
  friend FourierLoop operator+(FourierLoop a, const FourierLoop& b) { return a += b; }
  friend FourierLoop operator-(FourierLoop a, const FourierLoop& b) { return a -= b; }
  friend FourierLoop operator*(double s, FourierLoop a) {
    a.coeffs_ *= s;
    return a;
  }

 private:
  Mat coeffs_;
  int d_ = 0;
};

struct GridFit {
  FourierLoop loop;
  double tail_energy = 0.0;   ///< L^2 energy of sampled modes above the retained band
  double total_energy = 0.0;
  bool aliasing_flagged = false;
};

/// Trigonometric collocation of samples taken at t_j = j / nt. Requires nt >= 4 (d + 1), a power of two.
/// Flags aliasing when more than 1e-20 (relative) of the energy falls above the retained band.
GridFit grid_fit(const Mat& samples, int modes);

struct SpectralCutoff {
  int d_cut = 1;
  double lambda = 0.0;  ///< 2 |That| M2 + C = 2 pi (d_cut + 1/2)
  double margin = 0.0;  ///< C >= 0
};

/// Places the projection threshold at the smallest half-integer multiple of 2 pi that is at
/// least 2 |That| M2 and above 2 pi.
SpectralCutoff spectral_cutoff(double that, double m2);

/// Mode partition into |m| <= d_cut (z) and d_cut < |m| <= d (y).
struct SplitLoop {
  FourierLoop z_part;
  FourierLoop y_part;
};

SplitLoop project(const FourierLoop& x, int d_cut);
FourierLoop project_P(const FourierLoop& x, int d_cut);
FourierLoop project_Pperp(const FourierLoop& x, int d_cut);

/// Inverse of A on the high-mode space: c_m -> c_m / (2 pi m). Throws InputError when modes
/// |m| <= d_cut carry nonzero coefficients.
FourierLoop invert_A0(const FourierLoop& y, int d_cut);

/// Smallest power of two that is >= n.
int next_pow2(int n);

}  // namespace rotsol
