#include "qbm/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qbm/gibbs_state.hpp"

namespace qbm {

namespace {

ModelParameters blank(int n_visible, int n_hidden) {
  if (n_visible < 0 || n_hidden < 0) throw std::invalid_argument("ModelParameters: negative unit count");
  ModelParameters p;
  p.n_visible = n_visible;
  p.n_hidden = n_hidden;
  const int n = n_visible + n_hidden;
  p.gamma = Eigen::VectorXd::Zero(n);
  p.bias = Eigen::VectorXd::Zero(n);
  p.coupling = Eigen::VectorXd::Zero(n * (n - 1) / 2);
  p.coupling_mask.assign(static_cast<std::size_t>(n * (n - 1) / 2), true);
  return p;
}

// Removes the leading `spins.size()` qubits, which must all be visible.
ClampedModel clamp_leading(const ModelParameters& p, const SpinVector& spins) {
  const int k = spins.size();
  const int n = p.qubits();
  ClampedModel out;
  ModelParameters& r = out.hidden;
  r = blank(p.n_visible - k, p.n_hidden);
  r.shared_gamma = p.shared_gamma;
  r.restricted = p.restricted;
  double offset = 0.0;
  for (int a = 0; a < k; ++a) {
    offset -= p.bias(a) * spins[a];
    for (int b = a + 1; b < k; ++b) offset -= p.coupling_between(a, b) * spins[a] * spins[b];
  }
  for (int a = k; a < n; ++a) {
    double b_eff = p.bias(a);
    for (int c = 0; c < k; ++c) b_eff += p.coupling_between(c, a) * spins[c];
    r.bias(a - k) = b_eff;
    r.gamma(a - k) = p.gamma(a);
    for (int b = a + 1; b < n; ++b) {
      const int dst = r.pair_index(a - k, b - k);
      const int src = p.pair_index(a, b);
      r.coupling(dst) = p.coupling(src);
      r.coupling_mask[static_cast<std::size_t>(dst)] = p.coupling_mask[static_cast<std::size_t>(src)];
    }
  }
  out.offset = offset;
  return out;
}

}  // namespace

ModelParameters ModelParameters::fully_connected(int n_visible, int n_hidden) {
  return blank(n_visible, n_hidden);
}

ModelParameters ModelParameters::semi_restricted(int n_visible, int n_hidden) {
  ModelParameters p = blank(n_visible, n_hidden);
  p.restricted = true;
  const int n = p.qubits();
  for (int a = n_visible; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) p.coupling_mask[static_cast<std::size_t>(p.pair_index(a, b))] = false;
  }
  return p;
}

int ModelParameters::pair_index(int a, int b) const {
  const int n = qubits();
  if (a > b) std::swap(a, b);
  if (a < 0 || b >= n || a == b) throw std::out_of_range("pair_index: invalid qubit pair");
  return a * n - a * (a + 1) / 2 + (b - a - 1);
}

std::pair<int, int> ModelParameters::pair_qubits(int k) const {
  const int n = qubits();
  for (int a = 0; a < n; ++a) {
    const int row = n - a - 1;
    if (k < row) return {a, a + 1 + k};
    k -= row;
  }
  throw std::out_of_range("pair_qubits: pair index out of range");
}

double ModelParameters::coupling_between(int a, int b) const { return coupling(pair_index(a, b)); }

void ModelParameters::set_coupling(int a, int b, double value) {
  const int k = pair_index(a, b);
  if (!coupling_mask[static_cast<std::size_t>(k)] && value != 0.0) {
    throw std::invalid_argument("set_coupling: pair is excluded by the connectivity mask");
  }
  coupling(k) = value;
}

void ModelParameters::set_gamma(double value) {
  if (value < 0.0) throw std::invalid_argument("set_gamma: transverse field must be non-negative");
  gamma.setConstant(value);
}

void ModelParameters::validate() const {
  const int n = qubits();
  if (n_visible < 0 || n_hidden < 0) throw std::invalid_argument("ModelParameters: negative unit count");
  if (gamma.size() != n || bias.size() != n || coupling.size() != pair_count() ||
      static_cast<int>(coupling_mask.size()) != pair_count()) {
    throw std::invalid_argument("ModelParameters: array sizes do not match the qubit count");
  }
  if (!gamma.allFinite() || !bias.allFinite() || !coupling.allFinite()) {
    throw std::invalid_argument("ModelParameters: non-finite parameter");
  }
  if (n > 0 && gamma.minCoeff() < 0.0) throw std::invalid_argument("ModelParameters: negative transverse field");
  if (shared_gamma && n > 0 && gamma.maxCoeff() != gamma.minCoeff()) {
    throw std::invalid_argument("ModelParameters: shared transverse field differs across qubits");
  }
  for (int k = 0; k < pair_count(); ++k) {
    if (!coupling_mask[static_cast<std::size_t>(k)] && coupling(k) != 0.0) {
      throw std::invalid_argument("ModelParameters: masked coupling is non-zero");
    }
  }
  if (restricted) {
    for (int a = n_visible; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (coupling_mask[static_cast<std::size_t>(pair_index(a, b))]) {
          throw std::invalid_argument("ModelParameters: restricted model enables a hidden-hidden pair");
        }
      }
    }
  }
}

std::vector<std::pair<int, int>> qubit_pairs(int qubits) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(qubits * (qubits - 1) / 2));
  for (int a = 0; a < qubits; ++a) {
    for (int b = a + 1; b < qubits; ++b) pairs.emplace_back(a, b);
  }
  return pairs;
}

Eigen::VectorXd classical_energies(const ModelParameters& p) {
  const int n = p.qubits();
  check_size(n, "classical_energies");
  const BasisIndex dim = basis_dimension(n);
  const auto pairs = qubit_pairs(n);
  Eigen::VectorXd e(static_cast<Eigen::Index>(dim));
  std::vector<double> s(static_cast<std::size_t>(n));
  for (BasisIndex i = 0; i < dim; ++i) {
    double acc = 0.0;
    for (int a = 0; a < n; ++a) {
      s[static_cast<std::size_t>(a)] = spin_at(i, a, n);
      acc -= p.bias(a) * s[static_cast<std::size_t>(a)];
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      acc -= p.coupling(static_cast<Eigen::Index>(k)) * s[static_cast<std::size_t>(pairs[k].first)] *
             s[static_cast<std::size_t>(pairs[k].second)];
    }
    e(static_cast<Eigen::Index>(i)) = acc;
  }
  return e;
}

SymmetricOperator<double> build_hamiltonian(const ModelParameters& p) {
  p.validate();
  const int n = p.qubits();
  check_size(n, "build_hamiltonian");
  const auto d = static_cast<Eigen::Index>(basis_dimension(n));
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  h.diagonal() = classical_energies(p);
  for (int a = 0; a < n; ++a) {
    if (p.gamma(a) == 0.0) continue;
    const auto m = static_cast<Eigen::Index>(qubit_mask(a, n));
    for (Eigen::Index i = 0; i < d; ++i) h(i, i ^ m) = -p.gamma(a);
  }
  return SymmetricOperator<double>(std::move(h));
}

ClampedModel clamp_visible(const ModelParameters& p, const SpinVector& v) {
  if (v.size() != p.n_visible) {
    throw std::invalid_argument("clamp_visible: expected " + std::to_string(p.n_visible) +
                                " visible spins, got " + std::to_string(v.size()));
  }
  return clamp_leading(p, v);
}

VisibleDistribution visible_marginals(const ModelParameters& p) {
  check_size(p.qubits(), "visible_marginals");
  GibbsState state(p);
  return VisibleDistribution::from_weights(p.n_visible, state.leading_marginal(p.n_visible));
}

MomentSet gibbs_moments(const ModelParameters& p) {
  check_size(p.qubits(), "gibbs_moments");
  return GibbsState(p).moments();
}

EnergyDecomposition energy_decomposition(const ModelParameters& p) {
  check_size(p.qubits(), "energy_decomposition");
  GibbsState state(p);
  Eigen::VectorXd z, zz;
  z_moments(state.probabilities(), p.qubits(), z, zz);
  EnergyDecomposition e;
  e.classical = -(p.bias.dot(z) + p.coupling.dot(zz));
  e.quantum = p.is_classical() ? 0.0 : -p.gamma.dot(state.x_expectations());
  return e;
}

namespace {

void check_partition(const ModelParameters& p, int n_inputs, const SpinVector& x) {
  if (n_inputs < 0 || n_inputs >= p.n_visible) {
    throw std::invalid_argument("conditional: input count must leave at least one visible output");
  }
  if (x.size() != n_inputs) throw std::invalid_argument("conditional: input length mismatch");
}

}  // namespace

VisibleDistribution conditional_distribution(const ModelParameters& p, int n_inputs, const SpinVector& x) {
  check_partition(p, n_inputs, x);
  GibbsState state(p);
  const Eigen::VectorXd joint = state.leading_marginal(p.n_visible);
  const int n_out = p.n_visible - n_inputs;
  const auto width = static_cast<Eigen::Index>(basis_dimension(n_out));
  const Eigen::VectorXd slice = joint.segment(static_cast<Eigen::Index>(x.to_index()) * width, width);
  const double px = slice.sum();
  if (!(px >= 1e-300)) throw NumericalError("conditional_distribution: P(x) is numerically zero");
  return VisibleDistribution::from_weights(n_out, slice / px);
}

VisibleDistribution clamped_conditional_distribution(const ModelParameters& p, int n_inputs,
                                                     const SpinVector& x) {
  check_partition(p, n_inputs, x);
  return visible_marginals(clamp_leading(p, x).hidden);
}

DiscriminativeParameters DiscriminativeParameters::create(ModelParameters qubit_model, int inputs) {
  if (inputs < 0) throw std::invalid_argument("DiscriminativeParameters: negative input count");
  DiscriminativeParameters d;
  d.input_coupling = Eigen::MatrixXd::Zero(qubit_model.qubits(), inputs);
  d.qubits = std::move(qubit_model);
  return d;
}

void DiscriminativeParameters::validate() const {
  qubits.validate();
  if (input_coupling.rows() != qubits.qubits()) {
    throw std::invalid_argument("DiscriminativeParameters: input coupling rows must match the qubit count");
  }
  if (!input_coupling.allFinite()) throw std::invalid_argument("DiscriminativeParameters: non-finite coupling");
}

ModelParameters discriminative_hamiltonian(const DiscriminativeParameters& p, const Eigen::VectorXd& x) {
  p.validate();
  if (x.size() != p.inputs()) {
    throw std::invalid_argument("discriminative_hamiltonian: expected " + std::to_string(p.inputs()) +
                                " inputs, got " + std::to_string(x.size()));
  }
  ModelParameters m = p.qubits;
  m.bias += p.input_coupling * x;
  return m;
}

}  // namespace qbm
