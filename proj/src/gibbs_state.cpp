#include "qbm/gibbs_state.hpp"

#include <cmath>

namespace qbm {

GibbsState::GibbsState(const ModelParameters& p) : qubits_(p.qubits()), classical_(p.is_classical()) {
  p.validate();
  if (classical_) {
    levels_ = classical_energies(p);
    const double ground = levels_.minCoeff();
    weights_ = (-(levels_.array() - ground)).exp().matrix();
    log_shift_ = -ground;
    const double total = weights_.sum();
    log_partition_ = std::log(total) + log_shift_;
    probabilities_ = weights_ / total;
    return;
  }
  auto spectrum = spectral_decompose(build_hamiltonian(p));
  auto g = gibbs_weights(spectrum.eigenvalues);
  levels_ = std::move(spectrum.eigenvalues);
  vectors_ = std::move(spectrum.eigenvectors);
  weights_ = std::move(g.weights);
  log_shift_ = g.log_shift;
  log_partition_ = g.log_partition;
  const double total = weights_.sum();
  probabilities_ = (vectors_.cwiseAbs2() * weights_) / total;
}

Eigen::VectorXd GibbsState::leading_marginal(int k) const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_dimension(k)));
  const int tail = qubits_ - k;
  for (Eigen::Index i = 0; i < probabilities_.size(); ++i) m(i >> tail) += probabilities_(i);
  return m;
}

Eigen::VectorXd GibbsState::x_expectations() const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(qubits_);
  if (classical_) return x;
  const Eigen::Index d = vectors_.rows();
  for (Eigen::Index k = 0; k < d; ++k) {
    const double w = weights_(k);
    if (w == 0.0) continue;
    const double* col = vectors_.col(k).data();
    for (int a = 0; a < qubits_; ++a) {
      const auto m = static_cast<Eigen::Index>(qubit_mask(a, qubits_));
      double acc = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) acc += col[i] * col[i ^ m];
      x(a) += w * acc;
    }
  }
  return x / weights_.sum();
}

void z_moments(const Eigen::VectorXd& probabilities, int qubits, Eigen::VectorXd& z, Eigen::VectorXd& zz) {
  z = Eigen::VectorXd::Zero(qubits);
  zz = Eigen::VectorXd::Zero(qubits * (qubits - 1) / 2);
  Eigen::VectorXd s(qubits);
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    const double pi = probabilities(i);
    if (pi == 0.0) continue;
    for (int a = 0; a < qubits; ++a) s(a) = spin_at(static_cast<BasisIndex>(i), a, qubits);
    z += pi * s;
    int k = 0;
    for (int a = 0; a < qubits; ++a) {
      const double psa = pi * s(a);
      for (int b = a + 1; b < qubits; ++b) zz(k++) += psa * s(b);
    }
  }
}

MomentSet GibbsState::moments() const {
  MomentSet m;
  z_moments(probabilities_, qubits_, m.z, m.zz);
  m.x = x_expectations();
  return m;
}

}  // namespace qbm
