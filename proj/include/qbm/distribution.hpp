#pragma once

#include <Eigen/Dense>

#include "qbm/spin.hpp"

namespace qbm {

// Exact probability table over all 2^n joint states of n spin variables,
// indexed with the basis convention of spin.hpp.
class VisibleDistribution {
 public:
  VisibleDistribution() = default;
  // Requires non-negative entries summing to one within 1e-10.
  VisibleDistribution(int variables, Eigen::VectorXd probabilities);

  // Normalizes non-negative weights.
  static VisibleDistribution from_weights(int variables, Eigen::VectorXd weights);
  static VisibleDistribution uniform(int variables);
  static VisibleDistribution point_mass(const SpinVector& state);

  int variable_count() const noexcept { return variables_; }
  Eigen::Index size() const noexcept { return p_.size(); }
  const Eigen::VectorXd& probabilities() const noexcept { return p_; }
  double operator[](BasisIndex index) const { return p_(static_cast<Eigen::Index>(index)); }
  double probability(const SpinVector& state) const;

  // Marginal over the leading `k` variables.
  VisibleDistribution leading_marginal(int k) const;
  // Shannon entropy in nats.
  double entropy() const;

 private:
  int variables_ = 0;
  Eigen::VectorXd p_ = Eigen::VectorXd::Ones(1);
};

}  // namespace qbm
