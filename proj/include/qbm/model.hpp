#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "qbm/distribution.hpp"
#include "qbm/operator_core.hpp"
#include "qbm/spin.hpp"

namespace qbm {

// Parameters of the transverse-field Ising Hamiltonian
//
//   H = - sum_a gamma_a X_a - sum_a bias_a Z_a - sum_{a<b} w_ab Z_a Z_b.
//
// Qubits 0 .. n_visible-1 are visible, the rest hidden. Couplings are stored
// once per unordered pair in lexicographic (a, b), a < b order; pairs
// excluded by the mask are held at exactly zero.
struct ModelParameters {
  int n_visible = 0;
  int n_hidden = 0;
  Eigen::VectorXd gamma;
  Eigen::VectorXd bias;
  Eigen::VectorXd coupling;
  std::vector<bool> coupling_mask;
  bool shared_gamma = false;
  bool restricted = false;  // no hidden-hidden couplings

  static ModelParameters fully_connected(int n_visible, int n_hidden = 0);
  // Visible-visible and visible-hidden couplings only.
  static ModelParameters semi_restricted(int n_visible, int n_hidden);

  int qubits() const noexcept { return n_visible + n_hidden; }
  int pair_count() const noexcept { return qubits() * (qubits() - 1) / 2; }
  int pair_index(int a, int b) const;
  std::pair<int, int> pair_qubits(int k) const;

  double coupling_between(int a, int b) const;
  void set_coupling(int a, int b, double value);
  void set_gamma(double value);
  bool is_classical() const { return gamma.size() == 0 || gamma.cwiseAbs().maxCoeff() == 0.0; }
  double mean_gamma() const { return gamma.size() == 0 ? 0.0 : gamma.mean(); }

  // Throws std::invalid_argument on any broken invariant.
  void validate() const;
};

// Lexicographic pair list for n qubits, index k <-> (a, b).
std::vector<std::pair<int, int>> qubit_pairs(int qubits);

SymmetricOperator<double> build_hamiltonian(const ModelParameters& p);

// Diagonal (classical) part of H for every basis state.
Eigen::VectorXd classical_energies(const ModelParameters& p);

// Visible qubits removed and folded into hidden biases; `offset` is the
// constant energy -sum b_v v - sum w_vu v u contributed by the clamped spins,
// so Tr e^{-H_v} = e^{-offset} Tr e^{-H(hidden)}.
struct ClampedModel {
  ModelParameters hidden;
  double offset = 0.0;
};

ClampedModel clamp_visible(const ModelParameters& p, const SpinVector& v);

struct MomentSet {
  Eigen::VectorXd z;   // <Z_a>
  Eigen::VectorXd zz;  // <Z_a Z_b> per pair (masked pairs included)
  Eigen::VectorXd x;   // <X_a>
};

struct EnergyDecomposition {
  double classical = 0.0;  // E_cl
  double quantum = 0.0;    // E_q
};

VisibleDistribution visible_marginals(const ModelParameters& p);
MomentSet gibbs_moments(const ModelParameters& p);
EnergyDecomposition energy_decomposition(const ModelParameters& p);

// Conditional over the output variables given the leading `n_inputs` visible
// spins, P(y|x) = Tr[L_x L_y e^{-H}] / Tr[L_x e^{-H}]. The outputs are the
// remaining visible qubits. Throws NumericalError when P(x) < 1e-300.
VisibleDistribution conditional_distribution(const ModelParameters& p, int n_inputs, const SpinVector& x);

// Output distribution of the Hamiltonian with the inputs clamped (removed and
// folded into biases). Equals conditional_distribution when H is classical.
VisibleDistribution clamped_conditional_distribution(const ModelParameters& p, int n_inputs,
                                                     const SpinVector& x);

// Qubit model over outputs (visible) and hidden units driven by real-valued
// inputs that carry no qubits: b_eff(x) = bias + input_coupling * x.
struct DiscriminativeParameters {
  ModelParameters qubits;
  Eigen::MatrixXd input_coupling;  // (output + hidden) x inputs

  static DiscriminativeParameters create(ModelParameters qubit_model, int inputs);
  int inputs() const noexcept { return static_cast<int>(input_coupling.cols()); }
  void validate() const;
};

ModelParameters discriminative_hamiltonian(const DiscriminativeParameters& p, const Eigen::VectorXd& x);

}  // namespace qbm
