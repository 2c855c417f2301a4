#include <cmath>
#include <stdexcept>
#include <string>

#include "qbm/harness.hpp"

namespace qbm {

ModelParameters annealer_parameter_map(const AnnealerSchedulePoint& point) {
  if (!(point.beta > 0.0) || !std::isfinite(point.beta)) {
    throw std::invalid_argument("annealer_parameter_map: beta must be positive");
  }
  if (!(point.a_star >= 0.0) || !(point.b_star >= 0.0)) {
    throw std::invalid_argument("annealer_parameter_map: A and B must be non-negative");
  }
  const int n = static_cast<int>(point.h.size());
  ModelParameters p = ModelParameters::fully_connected(n, 0);
  const std::size_t pairs = static_cast<std::size_t>(p.pair_count());
  if (!point.j.empty() && point.j.size() != pairs) {
    throw std::invalid_argument("annealer_parameter_map: expected " + std::to_string(pairs) + " couplings, got " +
                                std::to_string(point.j.size()));
  }
  const double field = point.beta * point.a_star;
  const double scale = point.beta * point.b_star;
  p.shared_gamma = true;
  p.gamma.setConstant(field);
  for (int a = 0; a < n; ++a) p.bias(a) = scale * point.h[static_cast<std::size_t>(a)];
  for (std::size_t k = 0; k < point.j.size(); ++k) p.coupling(static_cast<Eigen::Index>(k)) = scale * point.j[k];
  p.validate();
  return p;
}

}  // namespace qbm
