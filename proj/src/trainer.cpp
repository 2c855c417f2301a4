#include <chrono>
#include <memory>
#include <stdexcept>

#include "qbm/training.hpp"

namespace qbm {

const char* to_string(LossKind kind) noexcept {
  switch (kind) {
    case LossKind::exact: return "exact";
    case LossKind::bound: return "bound";
    case LossKind::bound_classical_positive: return "bound_classical_positive";
  }
  return "unknown";
}

void TrainingTrace::append(const TraceRow& row) {
  if (!rows.empty() && row.iteration <= rows.back().iteration) {
    throw std::invalid_argument("TrainingTrace: iteration indices must increase");
  }
  rows.push_back(row);
}

namespace {

using Clock = std::chrono::steady_clock;

GammaMode gamma_mode(const OptimizerConfig& config) {
  if (!config.train_gamma) return GammaMode::fixed;
  return config.shared_gamma ? GammaMode::shared : GammaMode::per_qubit;
}

ModelParameters starting_point(const ModelParameters& p0, const OptimizerConfig& config) {
  ModelParameters p = p0;
  if (config.gamma_fixed) p.set_gamma(*config.gamma_fixed);
  if (config.train_gamma && config.shared_gamma) p.shared_gamma = true;
  p.validate();
  return p;
}

// Most recent thermal state keyed by the exact parameter vector, so the
// accepted line-search point is diagonalized once.
template <typename State>
class StateCache {
 public:
  template <typename Build>
  const State& get(const Eigen::VectorXd& theta, Build&& build) {
    if (!state_ || theta_.size() != theta.size() || theta_ != theta) {
      state_ = std::make_shared<const State>(build());
      theta_ = theta;
    }
    return *state_;
  }

 private:
  Eigen::VectorXd theta_;
  std::shared_ptr<const State> state_;
};

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double vector_inf_norm(const Eigen::VectorXd& g) { return g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff(); }

TrainingResult run_model_training(const ModelParameters& p0, const VisibleDistribution& data,
                                  const OptimizerConfig& config, LossKind loss, const TrainingHooks& hooks,
                                  OptimizerMethod method) {
  config.validate();
  if (data.variable_count() != p0.n_visible) {
    throw std::invalid_argument("train: data covers a different number of variables than the visible layer");
  }
  const ModelParameters start = starting_point(p0, config);
  const ParameterPacking packing(start, gamma_mode(config));
  const bool with_gamma = config.train_gamma;
  const bool analytic_bound = start.n_hidden > 0 && hidden_layer_factorized(start);
  if (loss == LossKind::bound_classical_positive && !hidden_layer_factorized(start)) {
    throw std::invalid_argument("train: the classical positive phase needs a semi-restricted model");
  }

  StateCache<GibbsState> cache;
  auto state_at = [&](const Eigen::VectorXd& theta, const ModelParameters& p) -> const GibbsState& {
    return cache.get(theta, [&] { return GibbsState(p); });
  };
  auto evaluate = [&](const ModelParameters& p, const GibbsState& s, bool with_gradient) {
    switch (loss) {
      case LossKind::exact: return evaluate_exact(p, data, s, with_gradient);
      case LossKind::bound:
        if (analytic_bound) {
          return evaluate_bound_semirestricted(p, data, s, PositivePhase::quantum, with_gradient, with_gamma);
        }
        return evaluate_bound(p, data, s, with_gradient, with_gamma);
      case LossKind::bound_classical_positive:
        return evaluate_bound_semirestricted(p, data, s, PositivePhase::classical, with_gradient, with_gamma);
    }
    throw std::logic_error("train: unknown loss");
  };

  Objective objective;
  objective.value = [&](const Eigen::VectorXd& theta) {
    const ModelParameters p = packing.unpack(theta);
    return evaluate(p, state_at(theta, p), false).loss;
  };
  objective.value_and_gradient = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& gradient) {
    const ModelParameters p = packing.unpack(theta);
    const LossAndGradient r = evaluate(p, state_at(theta, p), true);
    gradient = packing.pack_gradient(r.gradient, theta);
    return r.loss;
  };

  TrainingResult result;
  result.parameters = start;
  const auto clock_start = Clock::now();
  auto observer = [&](const IterationReport& report) {
    const ModelParameters p = packing.unpack(*report.theta);
    const GibbsState& s = state_at(*report.theta, p);
    TraceRow row;
    row.iteration = report.iteration;
    row.loss = report.loss;
    row.kl = kl_divergence(VisibleDistribution::from_weights(p.n_visible, s.leading_marginal(p.n_visible)), data);
    Eigen::VectorXd z, zz;
    z_moments(s.probabilities(), p.qubits(), z, zz);
    row.e_cl = -(p.bias.dot(z) + p.coupling.dot(zz));
    row.e_q = s.classical() ? 0.0 : -p.gamma.dot(s.x_expectations());
    row.gamma = p.mean_gamma();
    row.grad_norm = vector_inf_norm(*report.gradient);
    row.wall_ms = hooks.record_wall_time ? elapsed_ms(clock_start) : 0.0;
    result.trace.append(row);
    result.parameters = p;
    if (report.steepest_fallback) ++result.fallback_steps;
    if (hooks.on_iteration) hooks.on_iteration(report.iteration, p, s);
  };

  try {
    const OptimizationResult r = method == OptimizerMethod::bfgs
                                     ? minimize_bfgs(objective, packing.pack(start), config, observer)
                                     : minimize_gradient_descent(objective, packing.pack(start), config, observer);
    result.status = r.status;
  } catch (const NumericalError& e) {
    result.status = OptimizerStatus::numerical_error;
    result.error = e.what();
  }
  return result;
}

}  // namespace

TrainingResult gradient_descent(const ModelParameters& p0, const VisibleDistribution& data,
                                const OptimizerConfig& config, LossKind loss, const TrainingHooks& hooks) {
  return run_model_training(p0, data, config, loss, hooks, OptimizerMethod::gradient_descent);
}

TrainingResult bfgs_minimize(const ModelParameters& p0, const VisibleDistribution& data,
                             const OptimizerConfig& config, LossKind loss, const TrainingHooks& hooks) {
  return run_model_training(p0, data, config, loss, hooks, OptimizerMethod::bfgs);
}

TrainingResult train(const ModelParameters& p0, const VisibleDistribution& data, const OptimizerConfig& config,
                     LossKind loss, const TrainingHooks& hooks) {
  return run_model_training(p0, data, config, loss, hooks, config.method);
}

DiscriminativeTrainingResult train_discriminative(const DiscriminativeParameters& p0, const LabeledDataset& data,
                                                  const OptimizerConfig& config, LossKind loss,
                                                  const TrainingHooks& hooks) {
  config.validate();
  if (loss == LossKind::bound_classical_positive) {
    throw std::invalid_argument("train_discriminative: supported losses are exact and bound");
  }
  DiscriminativeParameters start = p0;
  start.qubits = starting_point(p0.qubits, config);
  const DiscriminativePacking packing(start, gamma_mode(config));
  const bool with_gamma = config.train_gamma;
  double entropy = 0.0;
  for (Eigen::Index r = 0; r < data.joint.rows(); ++r) {
    const double px = data.joint.row(r).sum();
    for (Eigen::Index y = 0; y < data.joint.cols(); ++y) {
      const double pxy = data.joint(r, y);
      if (pxy > 0.0) entropy -= pxy * std::log(pxy / px);
    }
  }

  StateCache<std::vector<GibbsState>> cache;
  auto states_at = [&](const Eigen::VectorXd& theta, const DiscriminativeParameters& p)
      -> const std::vector<GibbsState>& { return cache.get(theta, [&] { return discriminative_states(p, data); }); };
  auto evaluate = [&](const DiscriminativeParameters& p, const std::vector<GibbsState>& s, bool with_gradient) {
    return loss == LossKind::exact ? evaluate_discriminative_exact(p, data, s, with_gradient)
                                   : evaluate_discriminative_bound(p, data, s, with_gradient, with_gamma);
  };

  Objective objective;
  objective.value = [&](const Eigen::VectorXd& theta) {
    const DiscriminativeParameters p = packing.unpack(theta);
    return evaluate(p, states_at(theta, p), false).loss;
  };
  objective.value_and_gradient = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& gradient) {
    const DiscriminativeParameters p = packing.unpack(theta);
    const DiscriminativeLoss r = evaluate(p, states_at(theta, p), true);
    gradient = packing.pack_gradient(r.gradient, theta);
    return r.loss;
  };

  DiscriminativeTrainingResult result;
  result.parameters = start;
  const auto clock_start = Clock::now();
  auto observer = [&](const IterationReport& report) {
    const DiscriminativeParameters p = packing.unpack(*report.theta);
    const auto& states = states_at(*report.theta, p);
    TraceRow row;
    row.iteration = report.iteration;
    row.loss = report.loss;
    const double exact = loss == LossKind::exact ? report.loss : evaluate_discriminative_exact(p, data, states, false).loss;
    row.kl = std::max(exact - entropy, 0.0);
    for (std::size_t r = 0; r < states.size(); ++r) {
      const double px = data.joint.row(static_cast<Eigen::Index>(r)).sum();
      if (px == 0.0) continue;
      const ModelParameters m = discriminative_hamiltonian(p, data.inputs[r]);
      Eigen::VectorXd z, zz;
      z_moments(states[r].probabilities(), m.qubits(), z, zz);
      row.e_cl -= px * (m.bias.dot(z) + m.coupling.dot(zz));
      if (!states[r].classical()) row.e_q -= px * m.gamma.dot(states[r].x_expectations());
    }
    row.gamma = p.qubits.mean_gamma();
    row.grad_norm = vector_inf_norm(*report.gradient);
    row.wall_ms = hooks.record_wall_time ? elapsed_ms(clock_start) : 0.0;
    result.trace.append(row);
    result.parameters = p;
    if (report.steepest_fallback) ++result.fallback_steps;
  };

  try {
    const OptimizationResult r = config.method == OptimizerMethod::bfgs
                                     ? minimize_bfgs(objective, packing.pack(start), config, observer)
                                     : minimize_gradient_descent(objective, packing.pack(start), config, observer);
    result.status = r.status;
  } catch (const NumericalError& e) {
    result.status = OptimizerStatus::numerical_error;
    result.error = e.what();
  }
  return result;
}

}  // namespace qbm
