#include "qbm/data.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qbm {

std::uint64_t SplitMix64::next() noexcept {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void MixtureSpec::validate() const {
  if (n < 1) throw std::invalid_argument("MixtureSpec: at least one variable is required");
  if (modes < 1) throw std::invalid_argument("MixtureSpec: at least one mode is required");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("MixtureSpec: p must lie in (0, 1)");
}

int hamming_distance(const SpinVector& u, const SpinVector& v) {
  if (u.size() != v.size()) throw std::invalid_argument("hamming_distance: length mismatch");
  int d = 0;
  for (int i = 0; i < u.size(); ++i) d += u[i] != v[i] ? 1 : 0;
  return d;
}

ModeCenters draw_centers(const MixtureSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  ModeCenters c;
  for (int k = 0; k < spec.modes; ++k) {
    std::vector<int> s(static_cast<std::size_t>(spec.n));
    for (auto& v : s) v = rng.bit() ? -1 : 1;
    c.centers.emplace_back(std::move(s));
  }
  return c;
}

VisibleDistribution mixture_distribution(const ModeCenters& centers, double p) {
  if (centers.centers.empty()) throw std::invalid_argument("mixture_distribution: no centers");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("mixture_distribution: p must lie in (0, 1)");
  const int n = centers.centers.front().size();
  check_size(n, "bernoulli_mixture");
  std::vector<BasisIndex> idx;
  for (const auto& c : centers.centers) {
    if (c.size() != n) throw std::invalid_argument("mixture_distribution: centers differ in length");
    idx.push_back(c.to_index());
  }
  std::vector<double> term(static_cast<std::size_t>(n) + 1);
  for (int d = 0; d <= n; ++d) term[static_cast<std::size_t>(d)] = std::pow(p, n - d) * std::pow(1.0 - p, d);
  const auto dim = static_cast<Eigen::Index>(basis_dimension(n));
  Eigen::VectorXd prob(dim);
  const double m = static_cast<double>(idx.size());
  for (Eigen::Index v = 0; v < dim; ++v) {
    double acc = 0.0;
    for (BasisIndex c : idx) acc += term[static_cast<std::size_t>(std::popcount(static_cast<BasisIndex>(v) ^ c))];
    prob(v) = acc / m;
  }
  return VisibleDistribution::from_weights(n, std::move(prob));
}

Mixture bernoulli_mixture(const MixtureSpec& spec) {
  spec.validate();
  check_size(spec.n, "bernoulli_mixture");
  ModeCenters centers = draw_centers(spec);
  VisibleDistribution dist = mixture_distribution(centers, spec.p);
  return {std::move(dist), std::move(centers)};
}

void LabeledJointSpec::validate() const {
  inputs.validate();
  if (label_bits < 0) throw std::invalid_argument("LabeledJointSpec: negative label width");
  if (!labels.empty() && static_cast<int>(labels.size()) != inputs.modes) {
    throw std::invalid_argument("LabeledJointSpec: one label per mode is required");
  }
  const long long limit = 1LL << label_bits;
  for (int k = 0; k < inputs.modes; ++k) {
    const int l = label_of(k);
    if (l < 0 || l >= limit) {
      throw std::invalid_argument("LabeledJointSpec: label " + std::to_string(l) + " does not fit in " +
                                  std::to_string(label_bits) + " bits");
    }
  }
}

int LabeledJointSpec::label_of(int mode) const {
  return labels.empty() ? mode : labels.at(static_cast<std::size_t>(mode));
}

SpinVector label_spins(int label, int bits) {
  if (bits < 0 || label < 0 || (bits < 31 && label >= (1 << bits))) {
    throw std::invalid_argument("label_spins: label does not fit");
  }
  std::vector<int> s(static_cast<std::size_t>(bits));
  for (int j = 0; j < bits; ++j) s[static_cast<std::size_t>(j)] = ((label >> (bits - 1 - j)) & 1) ? 1 : -1;
  return SpinVector(std::move(s));
}

LabeledMixture labeled_mixture(const LabeledJointSpec& spec) {
  spec.validate();
  const int n = spec.inputs.n;
  const int w = spec.label_bits;
  check_size(n + w, "labeled_mixture");
  LabeledMixture out{VisibleDistribution::uniform(n + w), draw_centers(spec.inputs)};
  const auto width = static_cast<Eigen::Index>(basis_dimension(w));
  Eigen::VectorXd joint = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_dimension(n + w)));
  for (int k = 0; k < spec.inputs.modes; ++k) {
    const ModeCenters single{{out.centers.centers[static_cast<std::size_t>(k)]}};
    const Eigen::VectorXd px = mixture_distribution(single, spec.inputs.p).probabilities();
    const auto y = static_cast<Eigen::Index>(label_spins(spec.label_of(k), w).to_index());
    for (Eigen::Index x = 0; x < px.size(); ++x) joint(x * width + y) += px(x);
  }
  out.joint = VisibleDistribution::from_weights(n + w, std::move(joint));
  return out;
}

void randomize_parameters(ModelParameters& p, std::uint64_t seed, double range) {
  if (!(range >= 0.0)) throw std::invalid_argument("randomize_parameters: range must be non-negative");
  SplitMix64 rng(seed);
  for (int a = 0; a < p.qubits(); ++a) p.bias(a) = rng.uniform(-range, range);
  for (int k = 0; k < p.pair_count(); ++k) {
    const double v = rng.uniform(-range, range);
    p.coupling(k) = p.coupling_mask[static_cast<std::size_t>(k)] ? v : 0.0;
  }
}

}  // namespace qbm
