#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "qbm/distribution.hpp"
#include "qbm/gibbs_state.hpp"
#include "qbm/model.hpp"
#include "qbm/optimize.hpp"

namespace qbm {

// dL/d(parameter), laid out like ModelParameters. Masked couplings carry
// exactly zero.
struct ParameterGradient {
  Eigen::VectorXd bias;
  Eigen::VectorXd coupling;
  Eigen::VectorXd gamma;  // per qubit; the tied-field derivative is gamma.sum()

  static ParameterGradient zeros(const ModelParameters& p);
  double shared_gamma() const { return gamma.sum(); }
  double inf_norm() const;
};

struct LossAndGradient {
  double loss = 0.0;
  ParameterGradient gradient;
};

// ---------------------------------------------------------------------------
// Log-likelihood of the visible marginals.

// -sum_v P_data(v) log P(v); throws NumericalError when a data-supported
// P(v) underflows.
double nll_exact(const ModelParameters& p, const VisibleDistribution& data);
ParameterGradient grad_exact(const ModelParameters& p, const VisibleDistribution& data);
LossAndGradient evaluate_exact(const ModelParameters& p, const VisibleDistribution& data, const GibbsState& state,
                               bool with_gradient);

// Golden-Thompson upper bound -sum_v P_data(v) log(Tr e^{-H_v} / Tr e^{-H}).
double nll_bound(const ModelParameters& p, const VisibleDistribution& data);
// The transverse-field component is filled only when with_gamma is set.
ParameterGradient grad_bound(const ModelParameters& p, const VisibleDistribution& data, bool with_gamma = false);
LossAndGradient evaluate_bound(const ModelParameters& p, const VisibleDistribution& data, const GibbsState& state,
                               bool with_gradient, bool with_gamma = false);

// ---------------------------------------------------------------------------
// Semi-restricted models: the clamped hidden layer factorizes.

enum class PositivePhase { quantum, classical };

// True when no hidden-hidden pair is enabled.
bool hidden_layer_factorized(const ModelParameters& p);

// <Z_i> of a single hidden qubit with field gamma and bias b_eff:
// (b_eff / D) tanh D with D = sqrt(gamma^2 + b_eff^2); tanh(b_eff) in the
// classical mode. Zero at D = 0.
double rqbm_hidden_expectation(double gamma, double b_eff, PositivePhase mode);

// Bound gradient with analytic hidden expectations in the positive phase.
// The classical mode evaluates them with the transverse field switched off
// while the negative phase stays quantum.
ParameterGradient grad_bound_semirestricted(const ModelParameters& p, const VisibleDistribution& data,
                                            PositivePhase mode, bool with_gamma = false);
// Objective whose exact gradient is grad_bound_semirestricted in the given
// mode; the quantum mode coincides with nll_bound.
double nll_bound_semirestricted(const ModelParameters& p, const VisibleDistribution& data, PositivePhase mode);
LossAndGradient evaluate_bound_semirestricted(const ModelParameters& p, const VisibleDistribution& data,
                                              const GibbsState& state, PositivePhase mode, bool with_gradient,
                                              bool with_gamma = false);

// sum_v P_data(v) log(P_data(v) / P_model(v)).
double kl_divergence(const VisibleDistribution& model, const VisibleDistribution& data);

// Central differences of `loss` in every bias, enabled coupling and
// transverse field (per qubit; fields closer than eps to zero are skipped).
ParameterGradient finite_difference_gradient(const std::function<double(const ModelParameters&)>& loss,
                                             const ModelParameters& p, double eps);

// ---------------------------------------------------------------------------
// Supervised learning. Joint distributions are over [x, y] with the inputs x
// on the leading visible qubits.

double generative_supervised_loss(const ModelParameters& p, const VisibleDistribution& joint);

enum class ConditionalKind { exact, clamped };

// -sum_{x,y} P_data(x, y) log P(y|x) for the model's conditional or clamped
// conditional distribution.
double conditional_nll(const ModelParameters& p, int n_inputs, const VisibleDistribution& joint,
                       ConditionalKind kind);
double conditional_nll(const ModelParameters& p, const GibbsState& state, int n_inputs,
                       const VisibleDistribution& joint, ConditionalKind kind);
// Data conditional entropy -sum P(x, y) log P_data(y|x).
double conditional_entropy(const VisibleDistribution& joint, int n_inputs);

// Labeled data for discriminative models: one row per distinct input,
// columns over the output basis, entries P_data(x, y), total mass one.
struct LabeledDataset {
  std::vector<Eigen::VectorXd> inputs;
  Eigen::MatrixXd joint;
  int output_bits = 0;

  void validate() const;
  // Binary inputs taken from a joint table; rows with zero mass are dropped.
  static LabeledDataset from_joint(const VisibleDistribution& joint, int n_inputs);
};

struct DiscriminativeGradient {
  ParameterGradient qubits;
  Eigen::MatrixXd input_coupling;

  double inf_norm() const;
};

struct DiscriminativeLoss {
  double loss = 0.0;
  DiscriminativeGradient gradient;
};

// Bound: -sum P(x, y) log(Tr e^{-H_{x,y}} / Tr e^{-H_x}).
double discriminative_loss_bound(const DiscriminativeParameters& p, const LabeledDataset& data);
DiscriminativeGradient discriminative_grad_bound(const DiscriminativeParameters& p, const LabeledDataset& data,
                                                 bool with_gamma = false);
DiscriminativeLoss evaluate_discriminative_bound(const DiscriminativeParameters& p, const LabeledDataset& data,
                                                 bool with_gradient, bool with_gamma = false);
// Exact: -sum P(x, y) log P(y|x) with P(y|x) = Tr[L_y e^{-H_x}] / Tr e^{-H_x}.
double discriminative_loss_exact(const DiscriminativeParameters& p, const LabeledDataset& data);
DiscriminativeLoss evaluate_discriminative_exact(const DiscriminativeParameters& p, const LabeledDataset& data,
                                                 bool with_gradient);

// Thermal states of H_x, one per dataset row, for reuse across evaluations.
std::vector<GibbsState> discriminative_states(const DiscriminativeParameters& p, const LabeledDataset& data);
DiscriminativeLoss evaluate_discriminative_bound(const DiscriminativeParameters& p, const LabeledDataset& data,
                                                 const std::vector<GibbsState>& states, bool with_gradient,
                                                 bool with_gamma);
DiscriminativeLoss evaluate_discriminative_exact(const DiscriminativeParameters& p, const LabeledDataset& data,
                                                 const std::vector<GibbsState>& states, bool with_gradient);

// argmax_y P(y|x); near-ties (within 1e-12 relative) go to the lowest index.
BasisIndex argmax_label(const VisibleDistribution& conditional);
SpinVector predict_label(const ModelParameters& p, int n_inputs, const SpinVector& x);
SpinVector predict_label(const DiscriminativeParameters& p, const Eigen::VectorXd& x);

// ---------------------------------------------------------------------------
// Flat parameter vectors for the optimizers.

enum class GammaMode { fixed, shared, per_qubit };

// Layout [bias (n), enabled couplings, gamma (0, 1 or n)]. Transverse fields
// enter as |theta|; every loss here is even in each gamma, so the map is
// smooth and keeps fields non-negative without clipping.
class ParameterPacking {
 public:
  ParameterPacking(ModelParameters reference, GammaMode mode);

  Eigen::Index size() const noexcept { return size_; }
  GammaMode gamma_mode() const noexcept { return mode_; }
  Eigen::VectorXd pack(const ModelParameters& p) const;
  ModelParameters unpack(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd pack_gradient(const ParameterGradient& g, const Eigen::VectorXd& theta) const;

 private:
  ModelParameters reference_;
  GammaMode mode_;
  std::vector<int> enabled_pairs_;
  Eigen::Index size_ = 0;
};

// [qubit layout as above with input couplings (column-major) inserted
// before the transverse fields].
class DiscriminativePacking {
 public:
  DiscriminativePacking(DiscriminativeParameters reference, GammaMode mode);

  Eigen::Index size() const noexcept { return size_; }
  Eigen::VectorXd pack(const DiscriminativeParameters& p) const;
  DiscriminativeParameters unpack(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd pack_gradient(const DiscriminativeGradient& g, const Eigen::VectorXd& theta) const;

 private:
  DiscriminativeParameters reference_;
  ParameterPacking qubit_packing_;
  Eigen::Index bias_and_couplings_ = 0;
  Eigen::Index size_ = 0;
};

// ---------------------------------------------------------------------------
// Training loops.

enum class LossKind {
  exact,                     // nll_exact / grad_exact
  bound,                     // nll_bound / grad_bound
  bound_classical_positive,  // semi-restricted bound, classical positive phase
};

const char* to_string(LossKind kind) noexcept;

struct TraceRow {
  int iteration = 0;
  double loss = 0.0;
  double kl = 0.0;
  double e_cl = 0.0;
  double e_q = 0.0;
  double gamma = 0.0;
  double grad_norm = 0.0;
  double wall_ms = 0.0;
};

struct TrainingTrace {
  std::vector<TraceRow> rows;

  void append(const TraceRow& row);  // iteration indices must increase
  bool empty() const noexcept { return rows.empty(); }
  const TraceRow& back() const { return rows.back(); }
};

struct TrainingHooks {
  // Called once per trace row with the accepted parameters and their state.
  std::function<void(int iteration, const ModelParameters&, const GibbsState&)> on_iteration;
  bool record_wall_time = false;
};

struct TrainingResult {
  ModelParameters parameters;
  TrainingTrace trace;
  OptimizerStatus status = OptimizerStatus::max_iterations;
  int fallback_steps = 0;
  std::string error;  // set with OptimizerStatus::numerical_error
};

// Applies config.gamma_fixed / train_gamma / shared_gamma to p0 and
// minimizes the selected loss, recording one row per accepted iteration.
TrainingResult gradient_descent(const ModelParameters& p0, const VisibleDistribution& data,
                                const OptimizerConfig& config, LossKind loss, const TrainingHooks& hooks = {});
TrainingResult bfgs_minimize(const ModelParameters& p0, const VisibleDistribution& data,
                             const OptimizerConfig& config, LossKind loss, const TrainingHooks& hooks = {});
// Dispatches on config.method.
TrainingResult train(const ModelParameters& p0, const VisibleDistribution& data, const OptimizerConfig& config,
                     LossKind loss, const TrainingHooks& hooks = {});

struct DiscriminativeTrainingResult {
  DiscriminativeParameters parameters;
  TrainingTrace trace;
  OptimizerStatus status = OptimizerStatus::max_iterations;
  int fallback_steps = 0;
  std::string error;
};

// Minimizes the exact (LossKind::exact) or bound discriminative loss. The
// trace's kl column holds the exact discriminative loss minus the data
// conditional entropy; e_cl / e_q are averaged over P_data(x).
DiscriminativeTrainingResult train_discriminative(const DiscriminativeParameters& p0, const LabeledDataset& data,
                                                  const OptimizerConfig& config, LossKind loss,
                                                  const TrainingHooks& hooks = {});

}  // namespace qbm
