#include "rotsol/loops.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace rotsol {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

PointVec FourierLoop::eval(double t) const {
  PointVec x, dx, ddx;
  eval_jet(t, x, dx, ddx);
  return x;
}

void FourierLoop::eval_jet(double t, PointVec& x, PointVec& dx, PointVec& ddx) const {
  x = coeffs_.col(d_);
  dx = PointVec::Zero(dim());
  ddx = PointVec::Zero(dim());
  const double c1 = std::cos(kTwoPi * t), s1 = std::sin(kTwoPi * t);
  double c = 1.0, s = 0.0;
  for (int m = 1; m <= d_; ++m) {
    // Angle-addition recurrence for cos / sin of 2 pi m t.
    const double cn = c * c1 - s * s1;
    s = s * c1 + c * s1;
    c = cn;
    const double w = kTwoPi * m;
    const PointVec a = coeffs_.col(d_ + m) + coeffs_.col(d_ - m);
    const PointVec diff = coeffs_.col(d_ + m) - coeffs_.col(d_ - m);
    const PointVec b = apply_J(diff);
    // x += a cos + b sin
    x += c * a + s * b;
    dx += w * (c * b - s * a);
    ddx -= (w * w) * (c * a + s * b);
  }
}

Mat FourierLoop::grid_eval(int nt) const {
  if (nt <= 2 * d_) throw InputError("grid_eval: grid too small for the retained modes");
  const int rows = dim(), n = rows / 2;
  Mat out(rows, nt);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec(nt);
  std::vector<std::complex<double>> time(nt);
  for (int i = 0; i < rows; ++i) {
    std::fill(spec.begin(), spec.end(), std::complex<double>(0.0, 0.0));
    spec[0] = coeffs_(i, d_) * nt;
    const int partner = i < n ? i + n : i - n;
    const double jsign = i < n ? -1.0 : 1.0;  // (J v)_i = jsign * v_partner
    for (int m = 1; m <= d_; ++m) {
      const double a = coeffs_(i, d_ + m) + coeffs_(i, d_ - m);
      const double b = jsign * (coeffs_(partner, d_ + m) - coeffs_(partner, d_ - m));
      spec[m] = std::complex<double>(a, -b) * (0.5 * nt);
      spec[nt - m] = std::conj(spec[m]);
    }
    fft.inv(time, spec);
    for (int j = 0; j < nt; ++j) out(i, j) = time[j].real();
  }
  return out;
}

GridFit grid_fit(const Mat& samples, int modes) {
  const int rows = static_cast<int>(samples.rows()), nt = static_cast<int>(samples.cols()), n = rows / 2;
  if (!is_pow2(nt) || nt < 4 * (modes + 1)) throw InputError("grid_fit: need a power-of-two grid with nt >= 4(d+1)");
  GridFit out;
  out.loop = FourierLoop(rows, modes);
  Mat a(rows, modes + 1), b(rows, modes + 1);
  Eigen::FFT<double> fft;
  std::vector<double> time(nt);
  std::vector<std::complex<double>> spec;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < nt; ++j) time[j] = samples(i, j);
    fft.fwd(spec, time);
    a(i, 0) = spec[0].real() / nt;
    b(i, 0) = 0.0;
    out.total_energy += a(i, 0) * a(i, 0);
    for (int m = 1; m <= nt / 2; ++m) {
      const std::complex<double> X = spec[m] / static_cast<double>(nt);
      const double e = (m == nt / 2) ? std::norm(X) : 2.0 * std::norm(X);
      out.total_energy += e;
      if (m <= modes) {
        a(i, m) = 2.0 * X.real();
        b(i, m) = -2.0 * X.imag();
      } else {
        out.tail_energy += e;
      }
    }
  }
  auto& c = out.loop.coeffs();
  c.col(modes) = a.col(0);
  for (int m = 1; m <= modes; ++m) {
    // c_m = (a - J b) / 2, c_{-m} = (a + J b) / 2 with J b = (-b_q, b_p).
    Vec jb(rows);
    jb.head(n) = -b.col(m).tail(n);
    jb.tail(n) = b.col(m).head(n);
    c.col(modes + m) = 0.5 * (a.col(m) - jb);
    c.col(modes - m) = 0.5 * (a.col(m) + jb);
  }
  out.aliasing_flagged = out.tail_energy > 1e-20 * std::max(1.0, out.total_energy);
  return out;
}

FourierLoop FourierLoop::apply_A() const {
  FourierLoop out = *this;
  for (int m = -d_; m <= d_; ++m) out.mode(m) *= kTwoPi * m;
  return out;
}

FourierLoop FourierLoop::derivative() const {
  // d/dt exp(2 pi m t J) c = exp(2 pi m t J) (2 pi m J c)
  FourierLoop out = *this;
  for (int m = -d_; m <= d_; ++m) out.mode(m) = kTwoPi * m * Vec(apply_J(PointVec(mode(m))));
  return out;
}

FourierLoop FourierLoop::time_shifted(double tau) const {
  FourierLoop out = *this;
  for (int m = -d_; m <= d_; ++m) {
    const double th = kTwoPi * m * tau;
    const PointVec c = mode(m);
    out.mode(m) = std::cos(th) * c + std::sin(th) * apply_J(c);
  }
  return out;
}

FourierLoop FourierLoop::resized(int modes) const {
  FourierLoop out(dim(), modes);
  const int keep = std::min(modes, d_);
  for (int m = -keep; m <= keep; ++m) out.mode(m) = mode(m);
  return out;
}

double FourierLoop::inner(const FourierLoop& other) const {
  const int keep = std::min(d_, other.d_);
  double acc = 0.0;
  for (int m = -keep; m <= keep; ++m) acc += mode(m).dot(other.mode(m));
  return acc;
}

FourierLoop& FourierLoop::operator+=(const FourierLoop& o) {
  if (o.d_ > d_) *this = resized(o.d_);
  for (int m = -o.d_; m <= o.d_; ++m) mode(m) += o.mode(m);
  return *this;
}

FourierLoop& FourierLoop::operator-=(const FourierLoop& o) {
  if (o.d_ > d_) *this = resized(o.d_);
  for (int m = -o.d_; m <= o.d_; ++m) mode(m) -= o.mode(m);
  return *this;
}

SpectralCutoff spectral_cutoff(double that, double m2) {
  if (that == 0.0 || !(m2 > 0.0)) throw InputError("spectral_cutoff: need That != 0 and M2 > 0");
  const double base = 2.0 * std::abs(that) * m2;
  SpectralCutoff out;
  out.d_cut = std::max(1, static_cast<int>(std::ceil(base / kTwoPi - 0.5)));
  out.lambda = kTwoPi * (out.d_cut + 0.5);
  out.margin = out.lambda - base;
  return out;
}

SplitLoop project(const FourierLoop& x, int d_cut) { return {project_P(x, d_cut), project_Pperp(x, d_cut)}; }

FourierLoop project_P(const FourierLoop& x, int d_cut) {
  if (d_cut >= x.modes()) throw InputError("project_P: d_cut must be below the grid band");
  FourierLoop out(x.dim(), x.modes());
  for (int m = -d_cut; m <= d_cut; ++m) out.mode(m) = x.mode(m);
  return out;
}

FourierLoop project_Pperp(const FourierLoop& x, int d_cut) {
  if (d_cut >= x.modes()) throw InputError("project_Pperp: d_cut must be below the grid band");
  FourierLoop out = x;
  for (int m = -d_cut; m <= d_cut; ++m) out.mode(m).setZero();
  return out;
}

FourierLoop invert_A0(const FourierLoop& y, int d_cut) {
  FourierLoop out = y;
  for (int m = -y.modes(); m <= y.modes(); ++m) {
    if (std::abs(m) <= d_cut) {
      if (!y.mode(m).isZero(0.0)) throw InputError("invert_A0: input has components in the low-mode space");
      continue;
    }
    out.mode(m) /= kTwoPi * m;
  }
  return out;
}

}  // namespace rotsol
