#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rotsol {

/// Largest supported phase-space dimension 2n.
inline constexpr int kMaxPhaseDim = 8;

/// Small fixed-capacity column vector; lives on the stack.
template <typename Scalar>
using PointVecT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxPhaseDim, 1>;
template <typename Scalar>
using PointMatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxPhaseDim, kMaxPhaseDim>;

using PointVec = PointVecT<double>;
using PointMat = PointMatT<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IntVec = Eigen::VectorXi;

/// Thrown when a precondition on user-facing input does not hold.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical procedure cannot meet its contract.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point (p, q) of R^{2n} with p in R^{2n-l} and q in R^l.
struct PhasePoint {
  PointVec p;
  PointVec q;

  PointVec stacked() const {
    PointVec x(p.size() + q.size());
    x << p, q;
    return x;
  }

  static PhasePoint split(const PointVec& x, int np) {
    return {x.head(np), x.tail(x.size() - np)};
  }
};

/// Standard symplectic matrix applied to x = (x_1..x_n, x_{n+1}..x_{2n}):
/// J x = (-x_{n+1..2n}, x_{1..n}), so that zdot = J H'(z) gives pdot = -H_q, qdot = H_p.
template <typename Derived>
PointVecT<typename Derived::Scalar> apply_J(const Eigen::MatrixBase<Derived>& x) {
  const Eigen::Index n = x.size() / 2;
  PointVecT<typename Derived::Scalar> out(x.size());
  out.head(n) = -x.tail(n);
  out.tail(n) = x.head(n);
  return out;
}

template <typename Scalar>
PointMatT<Scalar> symplectic_matrix(int dim) {
  const int n = dim / 2;
  PointMatT<Scalar> J = PointMatT<Scalar>::Zero(dim, dim);
  J.topRightCorner(n, n) = -PointMatT<Scalar>::Identity(n, n);
  J.bottomLeftCorner(n, n) = PointMatT<Scalar>::Identity(n, n);
  return J;
}

/// Componentwise x - period * round(x / period), ties to even.
template <typename Derived, typename PeriodDerived>
PointVecT<typename Derived::Scalar> wrap_centered(const Eigen::MatrixBase<Derived>& x,
                                                  const Eigen::MatrixBase<PeriodDerived>& period) {
  PointVecT<typename Derived::Scalar> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out[i] = x[i] - period[i] * std::nearbyint(x[i] / period[i]);
  }
  return out;
}

template <typename Scalar>
Scalar wrap_centered(Scalar x, Scalar period) {
  return x - period * std::nearbyint(x / period);
}

}  // namespace rotsol
