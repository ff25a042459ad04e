#pragma once

// Dense symmetric matrix kernel shared by every solver component.
//
// Storage is a full dense Eigen matrix. Every SymMatrix built from an
// arbitrary expression is symmetrized as (A + A^T) / 2, so entry (i,j) and
// entry (j,i) are bitwise equal for the lifetime of the value. Sums,
// differences and scalings of exactly symmetric matrices are exactly
// symmetric in floating point, so those operators skip the extra pass.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "almsics/errors.hpp"

namespace almsics {

using Index = Eigen::Index;

template <typename Scalar>
class SymMatrix {
 public:
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  SymMatrix() = default;

  template <typename Derived>
  explicit SymMatrix(const Eigen::MatrixBase<Derived>& a) {
    if (a.rows() != a.cols()) {
      std::ostringstream msg;
      msg << "SymMatrix: matrix is " << a.rows() << "x" << a.cols() << ", expected square";
      throw std::invalid_argument(msg.str());
    }
    Dense tmp = a;
    m_ = (tmp + tmp.transpose()) * Scalar(0.5);
    if (!m_.allFinite()) throw DomainError("SymMatrix: non-finite entry");
  }

  static SymMatrix zero(Index n) { return SymMatrix(Dense::Zero(n, n), Trusted{}); }
  static SymMatrix identity(Index n) { return SymMatrix(Dense::Identity(n, n), Trusted{}); }

  template <typename Derived>
  static SymMatrix diagonal(const Eigen::MatrixBase<Derived>& d) {
    Vector v = d;
    if (!v.allFinite()) throw DomainError("SymMatrix: non-finite entry");
    return SymMatrix(Dense(v.asDiagonal()), Trusted{});
  }

  Index size() const { return m_.rows(); }
  Scalar operator()(Index i, Index j) const { return m_(i, j); }
  const Dense& matrix() const { return m_; }

  bool is_finite() const { return m_.allFinite(); }

  SymMatrix& operator+=(const SymMatrix& o) {
    check_same_size(o);
    m_ += o.m_;
    return *this;
  }
  SymMatrix& operator-=(const SymMatrix& o) {
    check_same_size(o);
    m_ -= o.m_;
    return *this;
  }
  SymMatrix& operator*=(Scalar s) {
    m_ *= s;
    return *this;
  }
  SymMatrix& operator/=(Scalar s) {
    m_ /= s;
    return *this;
  }

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator-(SymMatrix a) {
    a.m_ = -a.m_;
    return a;
  }
  friend SymMatrix operator*(Scalar s, SymMatrix a) { return a *= s; }
  friend SymMatrix operator*(SymMatrix a, Scalar s) { return a *= s; }
  friend SymMatrix operator/(SymMatrix a, Scalar s) { return a /= s; }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.size() == b.size() && a.m_ == b.m_;
  }

  // Entrywise map that preserves symmetry when f does not depend on (i,j)
  // orientation.
  template <typename F>
  SymMatrix unary_expr(F&& f) const {
    return SymMatrix(Dense(m_.unaryExpr(std::forward<F>(f))), Trusted{});
  }

 private:
  struct Trusted {};
  SymMatrix(Dense m, Trusted) : m_(std::move(m)) {}

  void check_same_size(const SymMatrix& o) const {
    if (o.size() != size()) {
      std::ostringstream msg;
      msg << "SymMatrix: dimension mismatch " << size() << " vs " << o.size();
      throw std::invalid_argument(msg.str());
    }
  }

  Dense m_;
};

using SymMatrixd = SymMatrix<double>;

/// Orthonormal eigenbasis and ascending eigenvalues of a symmetric matrix.
template <typename Scalar>
struct EigenDecomposition {
  using Dense = typename SymMatrix<Scalar>::Dense;
  using Vector = typename SymMatrix<Scalar>::Vector;

  Dense basis;
  Vector eigenvalues;

  Index size() const { return eigenvalues.size(); }
  Scalar min_eigenvalue() const { return eigenvalues(0); }
  Scalar max_eigenvalue() const { return eigenvalues(eigenvalues.size() - 1); }
};

using EigenDecompositiond = EigenDecomposition<double>;

/// basis * diag(values) * basis^T. `values` may differ from the
/// decomposition's own eigenvalues (spectral functions).
template <typename Scalar, typename Derived>
SymMatrix<Scalar> spectral_compose(const typename EigenDecomposition<Scalar>::Dense& basis,
                                   const Eigen::MatrixBase<Derived>& values) {
  using Dense = typename SymMatrix<Scalar>::Dense;
  Dense scaled = basis * values.asDiagonal();
  return SymMatrix<Scalar>(Dense(scaled * basis.transpose()));
}

template <typename Scalar>
SymMatrix<Scalar> reconstruct(const EigenDecomposition<Scalar>& e) {
  return spectral_compose<Scalar>(e.basis, e.eigenvalues);
}

// Eigen's tridiagonal QR caps its sweeps at 30*n; exceeding the cap is
// reported as a DecompositionError.
template <typename Scalar>
EigenDecomposition<Scalar> sym_eig(const SymMatrix<Scalar>& a) {
  if (!a.is_finite()) throw DomainError("sym_eig: non-finite input");
  Eigen::SelfAdjointEigenSolver<typename SymMatrix<Scalar>::Dense> solver(a.matrix(),
                                                                          Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "sym_eig: eigendecomposition of " << a.size() << "x" << a.size()
        << " matrix did not converge";
    throw DecompositionError(msg.str());
  }
  return {solver.eigenvectors(), solver.eigenvalues()};
}

template <typename Scalar>
Scalar soft_threshold(Scalar z, Scalar tau) {
  const Scalar mag = std::abs(z) - tau;
  if (mag <= Scalar(0)) return Scalar(0);
  return z > Scalar(0) ? mag : -mag;
}

/// Entrywise soft-thresholding sgn(z) * max(|z| - tau, 0). Truncated entries
/// are exact zeros.
template <typename Scalar>
SymMatrix<Scalar> shrink(const SymMatrix<Scalar>& z, Scalar tau) {
  if (!(tau >= Scalar(0))) throw std::invalid_argument("shrink: threshold must be nonnegative");
  return z.unary_expr([tau](Scalar v) { return soft_threshold(v, tau); });
}

template <typename Scalar>
SymMatrix<Scalar> inverse_from_eig(const EigenDecomposition<Scalar>& e) {
  const Scalar min_abs = e.eigenvalues.cwiseAbs().minCoeff();
  if (!(min_abs > Scalar(1e-12))) {
    std::ostringstream msg;
    msg << "inverse_from_eig: matrix is numerically singular (min |eigenvalue| = " << min_abs << ")";
    throw SingularMatrixError(msg.str());
  }
  return spectral_compose<Scalar>(e.basis, e.eigenvalues.cwiseInverse());
}

template <typename Scalar>
Scalar log_det_from_eig(const EigenDecomposition<Scalar>& e) {
  if (!(e.min_eigenvalue() > Scalar(0))) {
    std::ostringstream msg;
    msg << "log_det_from_eig: matrix is not positive definite (min eigenvalue = "
        << e.min_eigenvalue() << ")";
    throw NotPositiveDefiniteError(msg.str());
  }
  return e.eigenvalues.array().log().sum();
}

template <typename Scalar>
struct MatrixNorms {
  Scalar l1 = 0;        // sum of |entries|, all n^2 of them
  Scalar inf = 0;       // largest |entry|
  Scalar fro = 0;
  Scalar spectral = 0;  // largest |eigenvalue|
};

template <typename Scalar>
Scalar l1_norm(const SymMatrix<Scalar>& z) {
  return z.matrix().cwiseAbs().sum();
}

template <typename Scalar>
Scalar max_abs(const SymMatrix<Scalar>& z) {
  return z.size() == 0 ? Scalar(0) : z.matrix().cwiseAbs().maxCoeff();
}

template <typename Scalar>
Scalar spectral_norm(const SymMatrix<Scalar>& z) {
  if (z.size() == 0) return Scalar(0);
  Eigen::SelfAdjointEigenSolver<typename SymMatrix<Scalar>::Dense> solver(z.matrix(),
                                                                          Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "spectral_norm: eigenvalues of " << z.size() << "x" << z.size()
        << " matrix did not converge";
    throw DecompositionError(msg.str());
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

template <typename Scalar>
MatrixNorms<Scalar> norms(const SymMatrix<Scalar>& z) {
  if (!z.is_finite()) throw DomainError("norms: non-finite input");
  return {l1_norm(z), max_abs(z), z.matrix().norm(), spectral_norm(z)};
}

/// True iff a Cholesky factorization of A - tol*I succeeds, i.e. the
/// smallest eigenvalue of A exceeds tol.
template <typename Scalar>
bool is_positive_definite(const SymMatrix<Scalar>& a, Scalar tol = Scalar(0)) {
  using Dense = typename SymMatrix<Scalar>::Dense;
  if (!a.is_finite()) return false;
  Dense shifted = a.matrix();
  shifted.diagonal().array() -= tol;
  Eigen::LLT<Dense> llt(shifted);
  return llt.info() == Eigen::Success;
}

/// log det(A) through a Cholesky factor; empty when A is not positive definite.
template <typename Scalar>
std::optional<Scalar> log_det_if_positive_definite(const SymMatrix<Scalar>& a) {
  using Dense = typename SymMatrix<Scalar>::Dense;
  Eigen::LLT<Dense> llt(a.matrix());
  if (llt.info() != Eigen::Success) return std::nullopt;
  const auto diag = llt.matrixLLT().diagonal().array();
  if ((diag <= Scalar(0)).any()) return std::nullopt;
  return Scalar(2) * diag.log().sum();
}

// Frobenius inner product and squared norm, for both SymMatrix and plain
// Eigen points so generic solvers can use either.
template <typename Scalar>
Scalar inner(const SymMatrix<Scalar>& a, const SymMatrix<Scalar>& b) {
  return a.matrix().cwiseProduct(b.matrix()).sum();
}

template <typename Scalar>
Scalar squared_norm(const SymMatrix<Scalar>& a) {
  return a.matrix().squaredNorm();
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar inner(const Eigen::MatrixBase<DerivedA>& a,
                                const Eigen::MatrixBase<DerivedB>& b) {
  return a.cwiseProduct(b).sum();
}

template <typename Derived>
typename Derived::Scalar squared_norm(const Eigen::MatrixBase<Derived>& a) {
  return a.squaredNorm();
}

}  // namespace almsics
