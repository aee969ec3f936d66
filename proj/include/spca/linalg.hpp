#pragma once

#include <Eigen/Dense>
#include <Eigen/Jacobi>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "spca/error.hpp"

namespace spca {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Dense symmetric matrix. The stored entries are exactly symmetric:
/// construction averages the input with its transpose.
template <typename Scalar>
class BasicSymMatrix {
 public:
  using MatrixType = MatrixX<Scalar>;

  BasicSymMatrix() = default;

  template <typename Derived>
  explicit BasicSymMatrix(const Eigen::MatrixBase<Derived>& m) : m_(m) {
    if (m_.rows() != m_.cols()) {
      throw DimensionMismatch("SymMatrix: input is " + std::to_string(m_.rows()) + "x" +
                              std::to_string(m_.cols()));
    }
    if (m_.rows() < 1) throw PreconditionError("SymMatrix: dimension must be >= 1");
    symmetrize();
  }

  static BasicSymMatrix identity(Index p) { return BasicSymMatrix(MatrixType::Identity(p, p)); }

  template <typename Derived>
  static BasicSymMatrix diagonal(const Eigen::MatrixBase<Derived>& d) {
    return BasicSymMatrix(d.asDiagonal().toDenseMatrix());
  }

  Index dim() const { return m_.rows(); }
  const MatrixType& matrix() const { return m_; }
  Scalar operator()(Index i, Index j) const { return m_(i, j); }
  Scalar frobenius_norm() const { return m_.norm(); }

 private:
  void symmetrize() {
    for (Index j = 0; j < m_.cols(); ++j) {
      for (Index i = j + 1; i < m_.rows(); ++i) {
        const Scalar avg = (m_(i, j) + m_(j, i)) / Scalar(2);
        m_(i, j) = avg;
        m_(j, i) = avg;
      }
    }
  }

  MatrixType m_;
};

/// Vector on the unit sphere, |‖v‖₂ − 1| ≤ 1e-12.
template <typename Scalar>
class BasicUnitVector {
 public:
  using VectorType = VectorX<Scalar>;
  static constexpr double kNormTolerance = 1e-12;

  BasicUnitVector() = default;

  template <typename Derived>
  explicit BasicUnitVector(const Eigen::MatrixBase<Derived>& v) : v_(v) {
    if (v_.size() < 1) throw PreconditionError("UnitVector: dimension must be >= 1");
    const Scalar norm = v_.norm();
    if (!(std::abs(norm - Scalar(1)) <= Scalar(kNormTolerance))) {
      throw PreconditionError("UnitVector: norm " + std::to_string(double(norm)) + " is not 1");
    }
  }

  /// Scales v to unit length; throws DegenerateInput for the zero vector.
  template <typename Derived>
  static BasicUnitVector normalized(const Eigen::MatrixBase<Derived>& v) {
    const Scalar norm = v.norm();
    if (!(norm > Scalar(0)) || !std::isfinite(double(norm))) {
      throw DegenerateInput("UnitVector: cannot normalize a zero or non-finite vector");
    }
    VectorType out = v / norm;
    // One more pass pulls the norm to within an ulp or two of 1.
    out /= out.norm();
    return BasicUnitVector(out);
  }

  static BasicUnitVector basis(Index p, Index j) {
    VectorType e = VectorType::Zero(p);
    e(j) = Scalar(1);
    return BasicUnitVector(e);
  }

  Index dim() const { return v_.size(); }
  const VectorType& coords() const { return v_; }
  Scalar operator()(Index i) const { return v_(i); }
  BasicUnitVector operator-() const { return BasicUnitVector(VectorType(-v_)); }

 private:
  VectorType v_;
};

using SymMatrix = BasicSymMatrix<double>;
using UnitVector = BasicUnitVector<double>;

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
template <typename Scalar>
struct BasicEigenDecomposition {
  VectorX<Scalar> values;
  MatrixX<Scalar> vectors;
  int sweeps = 0;
  Scalar off_diagonal = 0;  ///< off-diagonal Frobenius mass at exit
};
using EigenDecomposition = BasicEigenDecomposition<double>;

struct JacobiOptions {
  double relative_tolerance = 1e-12;
  int max_sweeps = 100;
};

namespace detail {

template <typename Derived>
typename Derived::Scalar off_diagonal_norm(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Scalar sum = 0;
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = j + 1; i < a.rows(); ++i) sum += a(i, j) * a(i, j);
  }
  return std::sqrt(Scalar(2) * sum);
}

}  // namespace detail

/// Cyclic Jacobi diagonalization of a symmetric matrix held in any dense
/// Eigen type (fixed-size or dynamic). On return `a` is (numerically)
/// diagonal and `v` (pre-sized n×n) holds the accumulated rotations.
/// Returns the number of sweeps; throws ConvergenceError if the off-diagonal
/// mass is still above tolerance after max_sweeps.
template <typename MatA, typename MatV>
int jacobi_diagonalize(Eigen::MatrixBase<MatA>& a, Eigen::MatrixBase<MatV>& v,
                       const JacobiOptions& opts = {}) {
  using Scalar = typename MatA::Scalar;
  const Index n = a.rows();
  v.setIdentity();
  const Scalar scale = a.norm();
  const Scalar target = Scalar(opts.relative_tolerance) * scale;
  if (n < 2 || scale == Scalar(0)) return 0;

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    if (detail::off_diagonal_norm(a) <= target) return sweep;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        if (a(p, q) == Scalar(0)) continue;
        Eigen::JacobiRotation<Scalar> rot;
        rot.makeJacobi(a, p, q);
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        a(p, q) = Scalar(0);
        a(q, p) = Scalar(0);
        v.applyOnTheRight(p, q, rot);
      }
    }
  }
  const Scalar residual = detail::off_diagonal_norm(a);
  if (residual <= target) return opts.max_sweeps;
  throw ConvergenceError("jacobi_diagonalize: off-diagonal mass " + std::to_string(double(residual)) +
                             " above tolerance after " + std::to_string(opts.max_sweeps) + " sweeps",
                         double(residual));
}

/// Largest eigenvalue of a small symmetric block. Uses closed forms for
/// n ≤ 2 and stack-allocated Jacobi up to 16.
template <typename Derived>
typename Derived::Scalar top_eigenvalue_small(const Eigen::MatrixBase<Derived>& block) {
  using Scalar = typename Derived::Scalar;
  const Index n = block.rows();
  if (n == 1) return block(0, 0);
  if (n == 2) {
    const Scalar mean = (block(0, 0) + block(1, 1)) / Scalar(2);
    const Scalar half = (block(0, 0) - block(1, 1)) / Scalar(2);
    return mean + std::hypot(half, block(0, 1));
  }
  if (n <= 16) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, 16, 16> a = block;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, 16, 16> v(n, n);
    jacobi_diagonalize(a, v);
    return a.diagonal().maxCoeff();
  }
  MatrixX<Scalar> a = block;
  MatrixX<Scalar> v(n, n);
  jacobi_diagonalize(a, v);
  return a.diagonal().maxCoeff();
}

/// Full symmetric eigendecomposition, eigenvalues sorted descending.
template <typename Scalar>
BasicEigenDecomposition<Scalar> sym_eig(const BasicSymMatrix<Scalar>& m, const JacobiOptions& opts = {}) {
  MatrixX<Scalar> a = m.matrix();
  MatrixX<Scalar> v(m.dim(), m.dim());
  BasicEigenDecomposition<Scalar> out;
  out.sweeps = jacobi_diagonalize(a, v, opts);
  out.off_diagonal = detail::off_diagonal_norm(a);

  std::vector<Index> order(static_cast<std::size_t>(m.dim()));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return a(i, i) > a(j, j); });
  out.values.resize(m.dim());
  out.vectors.resize(m.dim(), m.dim());
  for (Index k = 0; k < m.dim(); ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

/// Flips the sign so the first coordinate with magnitude above 1e-12 is
/// nonnegative.
template <typename Derived>
void canonicalize_sign(Eigen::MatrixBase<Derived>& v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

template <typename Scalar>
struct BasicTopEigenpair {
  Scalar value = 0;
  Scalar second = 0;
  BasicUnitVector<Scalar> vector;
  /// false when λ1 − λ2 < 1e-10·|λ1|: the top eigenvector is not determined.
  bool unique = true;
};
using TopEigenpair = BasicTopEigenpair<double>;

template <typename Scalar>
BasicTopEigenpair<Scalar> top_eigenpair(const BasicSymMatrix<Scalar>& m) {
  auto eig = sym_eig(m);
  BasicTopEigenpair<Scalar> out;
  out.value = eig.values(0);
  out.second = m.dim() > 1 ? eig.values(1) : -std::numeric_limits<Scalar>::infinity();
  VectorX<Scalar> v = eig.vectors.col(0);
  canonicalize_sign(v);
  out.vector = BasicUnitVector<Scalar>::normalized(v);
  const Scalar scale = std::max(std::abs(out.value), std::numeric_limits<Scalar>::min());
  out.unique = m.dim() == 1 || (out.value - out.second) >= Scalar(1e-10) * scale;
  return out;
}

namespace detail {

template <typename Scalar>
Scalar squared_sine(const BasicUnitVector<Scalar>& u, const BasicUnitVector<Scalar>& v) {
  if (u.dim() != v.dim()) {
    throw DimensionMismatch("dimension mismatch: " + std::to_string(u.dim()) + " vs " +
                            std::to_string(v.dim()));
  }
  // Residual form keeps full relative precision for nearly parallel inputs;
  // averaging both residuals makes the result exactly symmetric.
  const Scalar ip = u.coords().dot(v.coords());
  const Scalar r = Scalar(0.5) * ((u.coords() - ip * v.coords()).squaredNorm() +
                                  (v.coords() - ip * u.coords()).squaredNorm());
  return std::clamp(r, Scalar(0), Scalar(1));
}

}  // namespace detail

/// ‖uuᵀ − vvᵀ‖_F = sqrt(2(1 − ⟨u,v⟩²)), in [0, √2].
template <typename Scalar>
Scalar projection_loss(const BasicUnitVector<Scalar>& u, const BasicUnitVector<Scalar>& v) {
  return std::sqrt(Scalar(2) * detail::squared_sine(u, v));
}

/// Sine of the angle between the lines spanned by u and v.
template <typename Scalar>
Scalar sin_theta(const BasicUnitVector<Scalar>& u, const BasicUnitVector<Scalar>& v) {
  return std::sqrt(detail::squared_sine(u, v));
}

/// ⟨Σ, θ1θ1ᵀ − θθᵀ⟩ − ½(λ1 − λ2)‖θθᵀ − θ1θ1ᵀ‖²_F, nonnegative whenever θ1 is
/// the top eigenvector of a PSD Σ with spectral gap λ1 − λ2.
double curvature_gap(const SymMatrix& sigma, const UnitVector& theta1, double lambda1, double lambda2,
                     const UnitVector& theta);

}  // namespace spca
