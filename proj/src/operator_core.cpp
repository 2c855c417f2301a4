#include "qbm/operator_core.hpp"

#include <atomic>
#include <cstdio>
#include <set>

#ifdef QBM_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace qbm {

Projector::Projector(int qubits, std::vector<int> clamped_qubits, SpinVector values)
    : qubits_(qubits), clamped_(std::move(clamped_qubits)), values_(std::move(values)) {
  check_size(qubits, "visible_projector");
  if (static_cast<int>(clamped_.size()) != values_.size()) {
    throw std::invalid_argument("visible_projector: clamped qubit count differs from value count");
  }
  std::set<int> seen;
  for (std::size_t k = 0; k < clamped_.size(); ++k) {
    const int q = clamped_[k];
    if (q < 0 || q >= qubits) throw std::out_of_range("visible_projector: qubit index out of range");
    if (!seen.insert(q).second) throw std::invalid_argument("visible_projector: repeated qubit index");
    const BasisIndex bit = qubit_mask(q, qubits);
    mask_ |= bit;
    if (values_[static_cast<int>(k)] < 0) pattern_ |= bit;
  }
}

Projector visible_projector(const std::vector<int>& clamped_qubits, const SpinVector& values, int qubits) {
  return Projector(qubits, clamped_qubits, values);
}

Projector visible_projector(const SpinVector& values, int qubits) {
  std::vector<int> leading(static_cast<std::size_t>(values.size()));
  for (int q = 0; q < values.size(); ++q) leading[static_cast<std::size_t>(q)] = q;
  return Projector(qubits, std::move(leading), values);
}

namespace detail {

namespace {

void eigen_solve(const Eigen::MatrixXd& a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("spectral_decompose: eigensolver did not converge");
  }
  values = solver.eigenvalues();
  vectors = solver.eigenvectors();
}

#ifdef QBM_HAVE_LAPACKE
// Some OpenBLAS builds select broken kernels on CPUs they misdetect and return
// garbage without an error code. Every LAPACK result is therefore probed
// (column norms plus a spread of eigenpair residuals) before it is accepted.
std::atomic<bool> g_lapack_usable{true};

bool plausible(const Eigen::MatrixXd& a, const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors) {
  if (!values.allFinite() || !vectors.allFinite()) return false;
  const Eigen::Index d = a.rows();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 1; k < d; ++k) {
    if (values(k) < values(k - 1)) return false;
  }
  const Eigen::VectorXd norms = vectors.colwise().squaredNorm().transpose();
  if ((norms.array() - 1.0).abs().maxCoeff() > 1e-8) return false;
  const Eigen::Index probes = std::min<Eigen::Index>(d, 8);
  for (Eigen::Index p = 0; p < probes; ++p) {
    const Eigen::Index k = probes == 1 ? 0 : p * (d - 1) / (probes - 1);
    const double residual = (a * vectors.col(k) - values(k) * vectors.col(k)).norm();
    if (residual > 1e-8 * scale) return false;
    const Eigen::Index other = (k + d / 2) % d;
    if (other != k && std::abs(vectors.col(k).dot(vectors.col(other))) > 1e-8) return false;
  }
  return true;
}
#endif

}  // namespace

void symmetric_eigen(const Eigen::MatrixXd& a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
#ifdef QBM_HAVE_LAPACKE
  if (a.rows() >= 64 && g_lapack_usable.load(std::memory_order_relaxed)) {
    vectors = a;
    values.resize(a.rows());
    const auto n = static_cast<lapack_int>(a.rows());
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, vectors.data(), n, values.data());
    if (info == 0 && plausible(a, values, vectors)) return;
    if (g_lapack_usable.exchange(false)) {
      std::fprintf(stderr,
                   "qbm: LAPACK dsyevd returned an invalid eigensystem (info=%d); "
                   "falling back to Eigen for the rest of this process. Setting "
                   "OPENBLAS_CORETYPE may restore the fast path.\n",
                   static_cast<int>(info));
    }
  }
#endif
  eigen_solve(a, values, vectors);
}

bool lapack_backend_active() {
#ifdef QBM_HAVE_LAPACKE
  return g_lapack_usable.load(std::memory_order_relaxed);
#else
  return false;
#endif
}

}  // namespace detail

}  // namespace qbm
