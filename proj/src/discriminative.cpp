#include <cmath>
#include <stdexcept>
#include <string>

#include "qbm/training.hpp"

namespace qbm {

void LabeledDataset::validate() const {
  if (output_bits < 0) throw std::invalid_argument("LabeledDataset: negative output width");
  if (joint.rows() != static_cast<Eigen::Index>(inputs.size())) {
    throw std::invalid_argument("LabeledDataset: one joint row per input is required");
  }
  if (joint.cols() != static_cast<Eigen::Index>(basis_dimension(output_bits))) {
    throw std::invalid_argument("LabeledDataset: joint columns must cover the output basis");
  }
  if (!joint.allFinite() || (joint.size() > 0 && joint.minCoeff() < 0.0)) {
    throw std::invalid_argument("LabeledDataset: probabilities must be finite and non-negative");
  }
  if (std::abs(joint.sum() - 1.0) > 1e-10) throw std::invalid_argument("LabeledDataset: total mass must be one");
  for (const auto& x : inputs) {
    if (x.size() != inputs.front().size() || !x.allFinite()) {
      throw std::invalid_argument("LabeledDataset: inputs must be finite and of equal length");
    }
  }
}

LabeledDataset LabeledDataset::from_joint(const VisibleDistribution& joint, int n_inputs) {
  const int n = joint.variable_count();
  if (n_inputs < 0 || n_inputs > n) throw std::invalid_argument("LabeledDataset::from_joint: bad input count");
  LabeledDataset d;
  d.output_bits = n - n_inputs;
  const auto width = static_cast<Eigen::Index>(basis_dimension(d.output_bits));
  const Eigen::VectorXd& p = joint.probabilities();
  std::vector<Eigen::Index> kept;
  for (Eigen::Index xi = 0; xi < p.size() / width; ++xi) {
    if (p.segment(xi * width, width).sum() > 0.0) kept.push_back(xi);
  }
  d.joint.resize(static_cast<Eigen::Index>(kept.size()), width);
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const SpinVector x = SpinVector::from_index(static_cast<BasisIndex>(kept[r]), n_inputs);
    Eigen::VectorXd v(n_inputs);
    for (int k = 0; k < n_inputs; ++k) v(k) = x[k];
    d.inputs.push_back(std::move(v));
    d.joint.row(static_cast<Eigen::Index>(r)) = p.segment(kept[r] * width, width).transpose();
  }
  return d;
}

double DiscriminativeGradient::inf_norm() const {
  double m = qubits.inf_norm();
  if (input_coupling.size()) m = std::max(m, input_coupling.cwiseAbs().maxCoeff());
  return m;
}

namespace {

void check_dataset(const DiscriminativeParameters& p, const LabeledDataset& data) {
  p.validate();
  data.validate();
  if (data.output_bits != p.qubits.n_visible) {
    throw std::invalid_argument("discriminative loss: dataset output width differs from the visible qubit count");
  }
  if (!data.inputs.empty() && data.inputs.front().size() != p.inputs()) {
    throw std::invalid_argument("discriminative loss: dataset input length differs from the model");
  }
}

template <typename PerInput>
DiscriminativeLoss accumulate(const DiscriminativeParameters& p, const LabeledDataset& data,
                              const std::vector<GibbsState>& states, bool with_gradient, PerInput&& per_input) {
  check_dataset(p, data);
  if (states.size() != data.inputs.size()) throw std::invalid_argument("discriminative loss: state count mismatch");
  DiscriminativeLoss out;
  out.gradient.qubits = ParameterGradient::zeros(p.qubits);
  out.gradient.input_coupling = Eigen::MatrixXd::Zero(p.qubits.qubits(), p.inputs());
  const int n_out = data.output_bits;
  for (std::size_t r = 0; r < data.inputs.size(); ++r) {
    const Eigen::VectorXd row = data.joint.row(static_cast<Eigen::Index>(r)).transpose();
    const double px = row.sum();
    if (px == 0.0) continue;
    const ModelParameters m = discriminative_hamiltonian(p, data.inputs[r]);
    const VisibleDistribution cond(n_out, row / px);
    const LossAndGradient term = per_input(m, cond, states[r]);
    out.loss += px * term.loss;
    if (!with_gradient) continue;
    out.gradient.qubits.bias += px * term.gradient.bias;
    out.gradient.qubits.coupling += px * term.gradient.coupling;
    out.gradient.qubits.gamma += px * term.gradient.gamma;
    out.gradient.input_coupling.noalias() += px * term.gradient.bias * data.inputs[r].transpose();
  }
  return out;
}

}  // namespace

std::vector<GibbsState> discriminative_states(const DiscriminativeParameters& p, const LabeledDataset& data) {
  check_dataset(p, data);
  std::vector<GibbsState> states;
  states.reserve(data.inputs.size());
  for (const auto& x : data.inputs) states.emplace_back(discriminative_hamiltonian(p, x));
  return states;
}

DiscriminativeLoss evaluate_discriminative_bound(const DiscriminativeParameters& p, const LabeledDataset& data,
                                                 const std::vector<GibbsState>& states, bool with_gradient,
                                                 bool with_gamma) {
  const bool analytic = p.qubits.n_hidden > 0 && hidden_layer_factorized(p.qubits);
  return accumulate(p, data, states, with_gradient,
                    [&](const ModelParameters& m, const VisibleDistribution& cond, const GibbsState& s) {
                      if (analytic) {
                        return evaluate_bound_semirestricted(m, cond, s, PositivePhase::quantum, with_gradient,
                                                             with_gamma);
                      }
                      return evaluate_bound(m, cond, s, with_gradient, with_gamma);
                    });
}

DiscriminativeLoss evaluate_discriminative_exact(const DiscriminativeParameters& p, const LabeledDataset& data,
                                                 const std::vector<GibbsState>& states, bool with_gradient) {
  return accumulate(p, data, states, with_gradient,
                    [&](const ModelParameters& m, const VisibleDistribution& cond, const GibbsState& s) {
                      return evaluate_exact(m, cond, s, with_gradient);
                    });
}

DiscriminativeLoss evaluate_discriminative_bound(const DiscriminativeParameters& p, const LabeledDataset& data,
                                                 bool with_gradient, bool with_gamma) {
  return evaluate_discriminative_bound(p, data, discriminative_states(p, data), with_gradient, with_gamma);
}

DiscriminativeLoss evaluate_discriminative_exact(const DiscriminativeParameters& p, const LabeledDataset& data,
                                                 bool with_gradient) {
  return evaluate_discriminative_exact(p, data, discriminative_states(p, data), with_gradient);
}

double discriminative_loss_bound(const DiscriminativeParameters& p, const LabeledDataset& data) {
  return evaluate_discriminative_bound(p, data, false).loss;
}

DiscriminativeGradient discriminative_grad_bound(const DiscriminativeParameters& p, const LabeledDataset& data,
                                                 bool with_gamma) {
  return evaluate_discriminative_bound(p, data, true, with_gamma).gradient;
}

double discriminative_loss_exact(const DiscriminativeParameters& p, const LabeledDataset& data) {
  return evaluate_discriminative_exact(p, data, false).loss;
}

BasisIndex argmax_label(const VisibleDistribution& conditional) {
  const Eigen::VectorXd& p = conditional.probabilities();
  const double top = p.maxCoeff();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) >= top * (1.0 - 1e-12)) return static_cast<BasisIndex>(i);
  }
  return 0;
}

SpinVector predict_label(const ModelParameters& p, int n_inputs, const SpinVector& x) {
  const VisibleDistribution cond = conditional_distribution(p, n_inputs, x);
  return SpinVector::from_index(argmax_label(cond), cond.variable_count());
}

SpinVector predict_label(const DiscriminativeParameters& p, const Eigen::VectorXd& x) {
  const ModelParameters m = discriminative_hamiltonian(p, x);
  return SpinVector::from_index(argmax_label(visible_marginals(m)), m.n_visible);
}

// ---------------------------------------------------------------------------

DiscriminativePacking::DiscriminativePacking(DiscriminativeParameters reference, GammaMode mode)
    : reference_(std::move(reference)), qubit_packing_(reference_.qubits, mode) {
  reference_.validate();
  const auto& q = reference_.qubits;
  Eigen::Index enabled = 0;
  for (int k = 0; k < q.pair_count(); ++k) enabled += q.coupling_mask[static_cast<std::size_t>(k)] ? 1 : 0;
  bias_and_couplings_ = q.qubits() + enabled;
  size_ = qubit_packing_.size() + reference_.input_coupling.size();
}

Eigen::VectorXd DiscriminativePacking::pack(const DiscriminativeParameters& p) const {
  if (p.input_coupling.rows() != reference_.input_coupling.rows() ||
      p.input_coupling.cols() != reference_.input_coupling.cols()) {
    throw std::invalid_argument("DiscriminativePacking::pack: input coupling shape mismatch");
  }
  const Eigen::VectorXd q = qubit_packing_.pack(p.qubits);
  const Eigen::Index w = p.input_coupling.size();
  Eigen::VectorXd theta(size_);
  theta.head(bias_and_couplings_) = q.head(bias_and_couplings_);
  theta.segment(bias_and_couplings_, w) = p.input_coupling.reshaped();
  theta.tail(q.size() - bias_and_couplings_) = q.tail(q.size() - bias_and_couplings_);
  return theta;
}

DiscriminativeParameters DiscriminativePacking::unpack(const Eigen::VectorXd& theta) const {
  if (theta.size() != size_) throw std::invalid_argument("DiscriminativePacking::unpack: vector size mismatch");
  const Eigen::Index w = reference_.input_coupling.size();
  Eigen::VectorXd q(qubit_packing_.size());
  q.head(bias_and_couplings_) = theta.head(bias_and_couplings_);
  q.tail(q.size() - bias_and_couplings_) = theta.tail(q.size() - bias_and_couplings_);
  DiscriminativeParameters p = reference_;
  p.qubits = qubit_packing_.unpack(q);
  p.input_coupling.reshaped() = theta.segment(bias_and_couplings_, w);
  return p;
}

Eigen::VectorXd DiscriminativePacking::pack_gradient(const DiscriminativeGradient& g,
                                                     const Eigen::VectorXd& theta) const {
  const Eigen::Index w = reference_.input_coupling.size();
  Eigen::VectorXd q_theta(qubit_packing_.size());
  q_theta.head(bias_and_couplings_) = theta.head(bias_and_couplings_);
  q_theta.tail(q_theta.size() - bias_and_couplings_) = theta.tail(q_theta.size() - bias_and_couplings_);
  const Eigen::VectorXd q = qubit_packing_.pack_gradient(g.qubits, q_theta);
  Eigen::VectorXd out(size_);
  out.head(bias_and_couplings_) = q.head(bias_and_couplings_);
  out.segment(bias_and_couplings_, w) = g.input_coupling.reshaped();
  out.tail(q.size() - bias_and_couplings_) = q.tail(q.size() - bias_and_couplings_);
  return out;
}

}  // namespace qbm
