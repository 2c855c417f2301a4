#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>

namespace qbm {

// Smooth objective over a flat parameter vector.
struct Objective {
  std::function<double(const Eigen::VectorXd&)> value;
  // Returns the value and writes the gradient.
  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)> value_and_gradient;
};

enum class OptimizerMethod { gradient_descent, bfgs };

enum class OptimizerStatus { converged, max_iterations, diverged, line_search_failed, numerical_error };

const char* to_string(OptimizerStatus status) noexcept;
const char* to_string(OptimizerMethod method) noexcept;

struct OptimizerConfig {
  OptimizerMethod method = OptimizerMethod::bfgs;
  double learning_rate = 0.05;
  int max_iterations = 500;
  double gradient_tolerance = 1e-5;  // infinity norm

  // Backtracking line search (BFGS).
  double armijo = 1e-4;
  double contraction = 0.5;
  int max_backtracks = 40;
  double curvature_threshold = 1e-10;
  // Armijo accepts increases up to loss_noise * |loss|, the rounding level
  // of losses built from large eigendecompositions.
  double loss_noise = 1e-12;

  // Gradient descent aborts after this many consecutive loss increases.
  int divergence_window = 50;

  // Transverse-field handling for model training.
  bool train_gamma = false;
  bool shared_gamma = true;
  std::optional<double> gamma_fixed;

  void validate() const;
};

struct IterationReport {
  int iteration = 0;
  const Eigen::VectorXd* theta = nullptr;
  double loss = 0.0;
  const Eigen::VectorXd* gradient = nullptr;
  bool steepest_fallback = false;
};

using IterationObserver = std::function<void(const IterationReport&)>;

struct OptimizationResult {
  Eigen::VectorXd theta;
  double loss = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  OptimizerStatus status = OptimizerStatus::max_iterations;
};

// Plain steps theta <- theta - eta * grad. Iteration 0 reports the start.
OptimizationResult minimize_gradient_descent(const Objective& objective, Eigen::VectorXd theta0,
                                             const OptimizerConfig& config,
                                             const IterationObserver& observer = {});

// Quasi-Newton with an inverse-Hessian update and Armijo backtracking.
// Starts from the identity, skips updates whose curvature s.y is below the
// threshold, and retries a failed line search along -grad with the Hessian
// reset before giving up.
OptimizationResult minimize_bfgs(const Objective& objective, Eigen::VectorXd theta0,
                                 const OptimizerConfig& config, const IterationObserver& observer = {});

// Central differences (f(t + eps e_k) - f(t - eps e_k)) / (2 eps).
Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& theta, double eps);

}  // namespace qbm
