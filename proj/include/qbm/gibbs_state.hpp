#pragma once

#include <Eigen/Dense>

#include "qbm/model.hpp"

namespace qbm {

// Exact thermal state e^{-H}/Z of a model, kept in whichever form is cheap:
// basis energies when every transverse field vanishes, otherwise the full
// spectral decomposition. All weights are shifted by the ground energy.
class GibbsState {
 public:
  explicit GibbsState(const ModelParameters& p);

  int qubits() const noexcept { return qubits_; }
  bool classical() const noexcept { return classical_; }
  double log_partition() const noexcept { return log_partition_; }
  double log_shift() const noexcept { return log_shift_; }

  // Diagonal of the density matrix.
  const Eigen::VectorXd& probabilities() const noexcept { return probabilities_; }
  // Marginal of the basis probabilities over the leading k qubits.
  Eigen::VectorXd leading_marginal(int k) const;

  // Classical representation: basis energies. Quantum: eigenpairs.
  const Eigen::VectorXd& energies() const noexcept { return levels_; }
  const Eigen::MatrixXd& eigenvectors() const noexcept { return vectors_; }
  // e^{-(level - ground)}, per basis state (classical) or eigenvalue.
  const Eigen::VectorXd& weights() const noexcept { return weights_; }

  MomentSet moments() const;
  Eigen::VectorXd x_expectations() const;

 private:
  int qubits_ = 0;
  bool classical_ = true;
  Eigen::VectorXd levels_;
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd probabilities_;
  double log_shift_ = 0.0;
  double log_partition_ = 0.0;
};

// <Z_a> and <Z_a Z_b> (all pairs) of a diagonal probability table.
void z_moments(const Eigen::VectorXd& probabilities, int qubits, Eigen::VectorXd& z, Eigen::VectorXd& zz);

}  // namespace qbm
