#pragma once

// Dense real-symmetric operator algebra on 2^n-dimensional qubit spaces.
//
// Everything here is templated on the scalar type. The double instantiation
// of the eigensolver may be routed to LAPACK (see operator_core.cpp); every other
// scalar goes through Eigen::SelfAdjointEigenSolver.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbm/spin.hpp"

namespace qbm {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class PauliKind { X, Z };

namespace detail {

inline int qubits_for_dimension(Eigen::Index dim) {
  if (dim < 1 || (dim & (dim - 1)) != 0) {
    throw std::invalid_argument("operator dimension " + std::to_string(dim) +
                                " is not a power of two");
  }
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return n;
}

// Symmetric eigendecomposition, ascending eigenvalues. The double overload is
// defined out of line so that it can use a LAPACK backend.
void symmetric_eigen(const Eigen::MatrixXd& a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors);
// True while the LAPACK backend is compiled in and has not been disabled.
bool lapack_backend_active();

template <typename Scalar>
void symmetric_eigen(const DenseMatrix<Scalar>& a, DenseVector<Scalar>& values,
                     DenseMatrix<Scalar>& vectors) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> solver(a);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("spectral_decompose: eigensolver did not converge");
  }
  values = solver.eigenvalues();
  vectors = solver.eigenvectors();
}

}  // namespace detail

// Real symmetric matrix whose dimension is a power of two.
template <typename Scalar = double>
class SymmetricOperator {
 public:
  using Matrix = DenseMatrix<Scalar>;

  SymmetricOperator() : matrix_(Matrix::Zero(1, 1)) {}

  explicit SymmetricOperator(Matrix m) : matrix_(std::move(m)) {
    if (matrix_.rows() != matrix_.cols()) {
      throw std::invalid_argument("SymmetricOperator: matrix is not square");
    }
    qubits_ = detail::qubits_for_dimension(matrix_.rows());
    const Scalar scale = std::max<Scalar>(Scalar(1), matrix_.cwiseAbs().maxCoeff());
    const Scalar asym = (matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= Scalar(1e-12) * scale)) {
      throw std::invalid_argument("SymmetricOperator: matrix is not symmetric");
    }
  }

  static SymmetricOperator zero(int qubits) {
    check_size(qubits, "SymmetricOperator::zero");
    const auto d = static_cast<Eigen::Index>(basis_dimension(qubits));
    return SymmetricOperator(Matrix::Zero(d, d));
  }
  static SymmetricOperator identity(int qubits) {
    check_size(qubits, "SymmetricOperator::identity");
    const auto d = static_cast<Eigen::Index>(basis_dimension(qubits));
    return SymmetricOperator(Matrix::Identity(d, d));
  }

  const Matrix& matrix() const noexcept { return matrix_; }
  Eigen::Index dimension() const noexcept { return matrix_.rows(); }
  int qubits() const noexcept { return qubits_; }
  Scalar trace() const { return matrix_.trace(); }

  SymmetricOperator& operator+=(const SymmetricOperator& o) {
    require_same(o);
    matrix_ += o.matrix_;
    return *this;
  }
  SymmetricOperator& operator-=(const SymmetricOperator& o) {
    require_same(o);
    matrix_ -= o.matrix_;
    return *this;
  }
  SymmetricOperator& operator*=(Scalar s) {
    matrix_ *= s;
    return *this;
  }

  friend SymmetricOperator operator+(SymmetricOperator a, const SymmetricOperator& b) { return a += b; }
  friend SymmetricOperator operator-(SymmetricOperator a, const SymmetricOperator& b) { return a -= b; }
  friend SymmetricOperator operator*(Scalar s, SymmetricOperator a) { return a *= s; }
  friend SymmetricOperator operator*(SymmetricOperator a, Scalar s) { return a *= s; }
  friend SymmetricOperator operator-(SymmetricOperator a) { return a *= Scalar(-1); }

  // The product of two symmetric operators is generally not symmetric.
  friend Matrix operator*(const SymmetricOperator& a, const SymmetricOperator& b) {
    a.require_same(b);
    return a.matrix_ * b.matrix_;
  }

 private:
  void require_same(const SymmetricOperator& o) const {
    if (o.dimension() != dimension()) {
      throw std::invalid_argument("SymmetricOperator: dimension mismatch");
    }
  }

  Matrix matrix_;
  int qubits_ = 0;
};

// n-fold tensor product with the identity everywhere except qubit `qubit`
// (0-based, qubit 0 most significant).
template <typename Scalar = double>
SymmetricOperator<Scalar> pauli_operator(PauliKind kind, int qubit, int qubits) {
  check_size(qubits, "pauli_operator");
  if (qubit < 0 || qubit >= qubits) {
    throw std::out_of_range("pauli_operator: qubit " + std::to_string(qubit) +
                            " out of range for " + std::to_string(qubits) + " qubits");
  }
  const BasisIndex dim = basis_dimension(qubits);
  const BasisIndex mask = qubit_mask(qubit, qubits);
  DenseMatrix<Scalar> m = DenseMatrix<Scalar>::Zero(static_cast<Eigen::Index>(dim),
                                                    static_cast<Eigen::Index>(dim));
  for (BasisIndex i = 0; i < dim; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (kind == PauliKind::Z) {
      m(row, row) = Scalar(spin_at(i, qubit, qubits));
    } else {
      m(row, static_cast<Eigen::Index>(i ^ mask)) = Scalar(1);
    }
  }
  return SymmetricOperator<Scalar>(std::move(m));
}

// Diagonal 0/1 operator selecting basis states whose clamped qubits agree
// with the given spin values.
class Projector {
 public:
  Projector(int qubits, std::vector<int> clamped_qubits, SpinVector values);

  int qubits() const noexcept { return qubits_; }
  const std::vector<int>& clamped_qubits() const noexcept { return clamped_; }
  const SpinVector& values() const noexcept { return values_; }

  bool selects(BasisIndex index) const noexcept { return (index & mask_) == pattern_; }
  BasisIndex rank() const noexcept { return basis_dimension(qubits_ - static_cast<int>(clamped_.size())); }

  template <typename Scalar = double>
  DenseVector<Scalar> diagonal() const {
    const BasisIndex dim = basis_dimension(qubits_);
    DenseVector<Scalar> d(static_cast<Eigen::Index>(dim));
    for (BasisIndex i = 0; i < dim; ++i) d(static_cast<Eigen::Index>(i)) = selects(i) ? Scalar(1) : Scalar(0);
    return d;
  }

  template <typename Scalar = double>
  SymmetricOperator<Scalar> to_operator() const {
    return SymmetricOperator<Scalar>(DenseMatrix<Scalar>(diagonal<Scalar>().asDiagonal()));
  }

 private:
  int qubits_;
  std::vector<int> clamped_;
  SpinVector values_;
  BasisIndex mask_ = 0;
  BasisIndex pattern_ = 0;
};

// Clamps the qubits listed in `clamped_qubits` to `values`.
Projector visible_projector(const std::vector<int>& clamped_qubits, const SpinVector& values, int qubits);
// Clamps the leading values.size() qubits.
Projector visible_projector(const SpinVector& values, int qubits);

template <typename Scalar = double>
struct SpectralDecomposition {
  DenseVector<Scalar> eigenvalues;   // ascending
  DenseMatrix<Scalar> eigenvectors;  // orthonormal columns

  DenseMatrix<Scalar> reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
  }
};

template <typename Scalar>
SpectralDecomposition<Scalar> spectral_decompose(const DenseMatrix<Scalar>& m) {
  SpectralDecomposition<Scalar> out;
  detail::symmetric_eigen(m, out.eigenvalues, out.eigenvectors);
  if (!out.eigenvalues.allFinite() || !out.eigenvectors.allFinite()) {
    throw NumericalError("spectral_decompose: non-finite eigensystem");
  }
  return out;
}

template <typename Scalar>
SpectralDecomposition<Scalar> spectral_decompose(const SymmetricOperator<Scalar>& op) {
  return spectral_decompose<Scalar>(op.matrix());
}

// Boltzmann weights of a spectrum, shifted by the smallest eigenvalue so
// that the largest weight is exactly one:
//   e^{-lambda_k} = weights_k * exp(log_shift),   log_shift = -lambda_min.
template <typename Scalar = double>
struct GibbsWeights {
  DenseVector<Scalar> weights;
  Scalar log_shift = 0;
  Scalar log_partition = 0;  // log Tr e^{-H}
};

template <typename Scalar>
GibbsWeights<Scalar> gibbs_weights(const DenseVector<Scalar>& eigenvalues) {
  GibbsWeights<Scalar> g;
  const Scalar lo = eigenvalues.minCoeff();
  g.weights = (-(eigenvalues.array() - lo)).exp().matrix();
  g.log_shift = -lo;
  g.log_partition = std::log(g.weights.sum()) + g.log_shift;
  return g;
}

template <typename Scalar = double>
struct GibbsOperator {
  SymmetricOperator<Scalar> scaled_exp;  // e^{-(H - lambda_min)}
  Scalar log_shift = 0;
  Scalar log_partition = 0;

  Scalar partition() const { return std::exp(log_partition); }
  SymmetricOperator<Scalar> exp_neg_h() const { return scaled_exp * std::exp(log_shift); }
  SymmetricOperator<Scalar> density() const { return scaled_exp * (Scalar(1) / scaled_exp.trace()); }
};

template <typename Scalar>
GibbsOperator<Scalar> gibbs_operator(const SymmetricOperator<Scalar>& h) {
  const auto spectrum = spectral_decompose(h);
  const auto g = gibbs_weights(spectrum.eigenvalues);
  DenseMatrix<Scalar> e = spectrum.eigenvectors * g.weights.asDiagonal() * spectrum.eigenvectors.transpose();
  e = Scalar(0.5) * (e + e.transpose()).eval();
  return {SymmetricOperator<Scalar>(std::move(e)), g.log_shift, g.log_partition};
}

// First divided difference of x -> exp(-(x - lambda_min)) at (li, lj), given
// the shifted weight wi of li. Pairs closer than 1e-9 * max(1, |li|) take
// the derivative limit.
template <typename Scalar>
Scalar gibbs_divided_difference(Scalar li, Scalar lj, Scalar wi, Scalar wj) {
  const Scalar gap = lj - li;
  if (std::abs(gap) < Scalar(1e-9) * std::max(Scalar(1), std::abs(li))) return -wi;
  // Expand around the lower eigenvalue so that expm1 never overflows.
  if (gap > 0) return wi * std::expm1(-gap) / gap;
  return wj * std::expm1(gap) / (-gap);
}

// Loewner matrix of the shifted Gibbs weights.
template <typename Scalar>
DenseMatrix<Scalar> gibbs_loewner_kernel(const DenseVector<Scalar>& eigenvalues,
                                         const DenseVector<Scalar>& weights) {
  const Eigen::Index d = eigenvalues.size();
  DenseMatrix<Scalar> k(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j; i < d; ++i) {
      const Scalar v = gibbs_divided_difference(eigenvalues(i), eigenvalues(j), weights(i), weights(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

// Tr[projector * D exp(-H)[direction]], the directional derivative of the
// projected Gibbs trace, evaluated in the eigenbasis of H.
template <typename Scalar>
Scalar frechet_gibbs_trace(const SpectralDecomposition<Scalar>& spectrum,
                           const SymmetricOperator<Scalar>& direction, const Projector& projector) {
  const auto& v = spectrum.eigenvectors;
  if (direction.dimension() != v.rows() ||
      static_cast<Eigen::Index>(basis_dimension(projector.qubits())) != v.rows()) {
    throw std::invalid_argument("frechet_gibbs_trace: dimension mismatch");
  }
  const auto g = gibbs_weights(spectrum.eigenvalues);
  const DenseMatrix<Scalar> rotated = v.transpose() * direction.matrix() * v;
  const DenseMatrix<Scalar> inner = rotated.cwiseProduct(gibbs_loewner_kernel(spectrum.eigenvalues, g.weights));
  const DenseMatrix<Scalar> vk = v * inner;
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    if (projector.selects(static_cast<BasisIndex>(i))) acc += vk.row(i).dot(v.row(i));
  }
  return acc * std::exp(g.log_shift);
}

template <typename Scalar>
Scalar frechet_gibbs_trace(const SymmetricOperator<Scalar>& h, const SymmetricOperator<Scalar>& direction,
                           const Projector& projector) {
  if (direction.dimension() != h.dimension()) {
    throw std::invalid_argument("frechet_gibbs_trace: dimension mismatch");
  }
  return frechet_gibbs_trace(spectral_decompose(h), direction, projector);
}

}  // namespace qbm
