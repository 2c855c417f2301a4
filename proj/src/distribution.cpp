#include "qbm/distribution.hpp"

#include <cmath>
#include <stdexcept>

namespace qbm {

VisibleDistribution::VisibleDistribution(int variables, Eigen::VectorXd probabilities)
    : variables_(variables), p_(std::move(probabilities)) {
  if (variables < 0 || variables > 30) throw std::invalid_argument("VisibleDistribution: bad variable count");
  if (p_.size() != static_cast<Eigen::Index>(basis_dimension(variables))) {
    throw std::invalid_argument("VisibleDistribution: table size must be 2^variables");
  }
  if (!p_.allFinite() || (p_.array() < 0.0).any()) {
    throw std::invalid_argument("VisibleDistribution: probabilities must be finite and non-negative");
  }
  if (std::abs(p_.sum() - 1.0) > 1e-10) {
    throw std::invalid_argument("VisibleDistribution: probabilities do not sum to one");
  }
}

VisibleDistribution VisibleDistribution::from_weights(int variables, Eigen::VectorXd weights) {
  if (weights.size() == 0 || !weights.allFinite() || (weights.array() < 0.0).any()) {
    throw std::invalid_argument("VisibleDistribution::from_weights: weights must be finite and non-negative");
  }
  const double total = weights.sum();
  if (!(total > 0.0)) throw std::invalid_argument("VisibleDistribution::from_weights: zero total weight");
  return VisibleDistribution(variables, weights / total);
}

VisibleDistribution VisibleDistribution::uniform(int variables) {
  const auto d = static_cast<Eigen::Index>(basis_dimension(variables));
  return VisibleDistribution(variables, Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d)));
}

VisibleDistribution VisibleDistribution::point_mass(const SpinVector& state) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_dimension(state.size())));
  p(static_cast<Eigen::Index>(state.to_index())) = 1.0;
  return VisibleDistribution(state.size(), std::move(p));
}

double VisibleDistribution::probability(const SpinVector& state) const {
  if (state.size() != variables_) throw std::invalid_argument("VisibleDistribution: state length mismatch");
  return (*this)[state.to_index()];
}

VisibleDistribution VisibleDistribution::leading_marginal(int k) const {
  if (k < 0 || k > variables_) throw std::invalid_argument("leading_marginal: bad variable count");
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_dimension(k)));
  const int tail = variables_ - k;
  for (Eigen::Index i = 0; i < p_.size(); ++i) m(i >> tail) += p_(i);
  return VisibleDistribution(k, std::move(m));
}

double VisibleDistribution::entropy() const {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p_.size(); ++i) {
    if (p_(i) > 0.0) h -= p_(i) * std::log(p_(i));
  }
  return h;
}

}  // namespace qbm
