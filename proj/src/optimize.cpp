#include "qbm/optimize.hpp"

#include <cmath>
#include <stdexcept>

namespace qbm {

const char* to_string(OptimizerStatus status) noexcept {
  switch (status) {
    case OptimizerStatus::converged: return "converged";
    case OptimizerStatus::max_iterations: return "max_iterations";
    case OptimizerStatus::diverged: return "diverged";
    case OptimizerStatus::line_search_failed: return "line_search_failed";
    case OptimizerStatus::numerical_error: return "numerical_error";
  }
  return "unknown";
}

const char* to_string(OptimizerMethod method) noexcept {
  return method == OptimizerMethod::bfgs ? "bfgs" : "gd";
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("OptimizerConfig: learning rate must be positive");
  if (max_iterations < 0) throw std::invalid_argument("OptimizerConfig: max_iterations must be non-negative");
  if (!(gradient_tolerance > 0.0)) throw std::invalid_argument("OptimizerConfig: gradient tolerance must be positive");
  if (!(armijo > 0.0 && armijo < 1.0)) throw std::invalid_argument("OptimizerConfig: Armijo constant must lie in (0, 1)");
  if (!(contraction > 0.0 && contraction < 1.0)) {
    throw std::invalid_argument("OptimizerConfig: contraction must lie in (0, 1)");
  }
  if (max_backtracks < 1) throw std::invalid_argument("OptimizerConfig: max_backtracks must be positive");
  if (!(curvature_threshold > 0.0)) throw std::invalid_argument("OptimizerConfig: curvature threshold must be positive");
  if (!(loss_noise >= 0.0)) throw std::invalid_argument("OptimizerConfig: loss noise must be non-negative");
  if (divergence_window < 1) throw std::invalid_argument("OptimizerConfig: divergence window must be positive");
  if (gamma_fixed && !(*gamma_fixed >= 0.0)) {
    throw std::invalid_argument("OptimizerConfig: fixed transverse field must be non-negative");
  }
}

namespace {

void report(const IterationObserver& observer, int iteration, const Eigen::VectorXd& theta, double loss,
            const Eigen::VectorXd& gradient, bool fallback) {
  if (!observer) return;
  IterationReport r;
  r.iteration = iteration;
  r.theta = &theta;
  r.loss = loss;
  r.gradient = &gradient;
  r.steepest_fallback = fallback;
  observer(r);
}

double inf_norm(const Eigen::VectorXd& g) { return g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff(); }

}  // namespace

OptimizationResult minimize_gradient_descent(const Objective& objective, Eigen::VectorXd theta0,
                                             const OptimizerConfig& config, const IterationObserver& observer) {
  config.validate();
  OptimizationResult r;
  r.theta = std::move(theta0);
  r.loss = objective.value_and_gradient(r.theta, r.gradient);
  report(observer, 0, r.theta, r.loss, r.gradient, false);
  int increases = 0;
  for (int it = 1; it <= config.max_iterations; ++it) {
    if (inf_norm(r.gradient) < config.gradient_tolerance) {
      r.status = OptimizerStatus::converged;
      return r;
    }
    r.theta -= config.learning_rate * r.gradient;
    const double previous = r.loss;
    r.loss = objective.value_and_gradient(r.theta, r.gradient);
    r.iterations = it;
    report(observer, it, r.theta, r.loss, r.gradient, false);
    increases = r.loss > previous ? increases + 1 : 0;
    if (increases >= config.divergence_window || !std::isfinite(r.loss)) {
      r.status = OptimizerStatus::diverged;
      return r;
    }
  }
  r.status = inf_norm(r.gradient) < config.gradient_tolerance ? OptimizerStatus::converged
                                                               : OptimizerStatus::max_iterations;
  return r;
}

OptimizationResult minimize_bfgs(const Objective& objective, Eigen::VectorXd theta0, const OptimizerConfig& config,
                                 const IterationObserver& observer) {
  config.validate();
  OptimizationResult r;
  r.theta = std::move(theta0);
  r.loss = objective.value_and_gradient(r.theta, r.gradient);
  report(observer, 0, r.theta, r.loss, r.gradient, false);

  const Eigen::Index n = r.theta.size();
  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);

  // Returns the accepted step length, or 0 when no step satisfied Armijo.
  auto line_search = [&](const Eigen::VectorXd& direction, Eigen::VectorXd& trial, double& trial_loss) {
    const double slope = r.gradient.dot(direction);
    const double noise = config.loss_noise * std::abs(r.loss);
    double step = 1.0;
    for (int bt = 0; bt < config.max_backtracks; ++bt) {
      trial = r.theta + step * direction;
      trial_loss = objective.value(trial);
      if (std::isfinite(trial_loss) && trial_loss <= r.loss + config.armijo * step * slope + noise) return step;
      step *= config.contraction;
    }
    return 0.0;
  };

  for (int it = 1; it <= config.max_iterations; ++it) {
    if (inf_norm(r.gradient) < config.gradient_tolerance) {
      r.status = OptimizerStatus::converged;
      return r;
    }
    Eigen::VectorXd direction = -inv_hessian * r.gradient;
    bool steepest = false;
    if (!(r.gradient.dot(direction) < 0.0)) {
      inv_hessian.setIdentity();
      direction = -r.gradient;
      steepest = true;
    }
    Eigen::VectorXd trial;
    double trial_loss = 0.0;
    double step = line_search(direction, trial, trial_loss);
    bool fallback = false;
    if (step == 0.0 && !steepest) {
      inv_hessian.setIdentity();
      direction = -r.gradient;
      fallback = true;
      step = line_search(direction, trial, trial_loss);
    }
    if (step == 0.0) {
      r.status = OptimizerStatus::line_search_failed;
      return r;
    }
    Eigen::VectorXd trial_gradient;
    trial_loss = objective.value_and_gradient(trial, trial_gradient);
    const Eigen::VectorXd s = trial - r.theta;
    const Eigen::VectorXd y = trial_gradient - r.gradient;
    const double sy = s.dot(y);
    if (sy > config.curvature_threshold) {
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = inv_hessian * y;
      const double yhy = y.dot(hy);
      // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded.
      inv_hessian.noalias() -= rho * (hy * s.transpose() + s * hy.transpose());
      inv_hessian.noalias() += (rho * rho * yhy + rho) * (s * s.transpose());
    }
    r.theta = std::move(trial);
    r.loss = trial_loss;
    r.gradient = std::move(trial_gradient);
    r.iterations = it;
    report(observer, it, r.theta, r.loss, r.gradient, fallback);
  }
  r.status = inf_norm(r.gradient) < config.gradient_tolerance ? OptimizerStatus::converged
                                                               : OptimizerStatus::max_iterations;
  return r;
}

Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& theta, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite_difference_gradient: eps must be positive");
  Eigen::VectorXd g(theta.size());
  Eigen::VectorXd probe = theta;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    probe(k) = theta(k) + eps;
    const double up = f(probe);
    probe(k) = theta(k) - eps;
    const double down = f(probe);
    probe(k) = theta(k);
    g(k) = (up - down) / (2.0 * eps);
  }
  return g;
}

}  // namespace qbm
