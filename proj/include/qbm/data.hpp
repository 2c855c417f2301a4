#pragma once

#include <cstdint>
#include <vector>

#include "qbm/distribution.hpp"
#include "qbm/model.hpp"
#include "qbm/spin.hpp"

namespace qbm {

// SplitMix64: state += 0x9e3779b97f4a7c15, then two xor-shift-multiply
// rounds. Counter based, so streams are identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept;
  // Top 53 bits scaled into [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // Most significant bit of the next draw.
  bool bit() noexcept { return (next() >> 63) != 0; }

 private:
  std::uint64_t state_;
};

struct MixtureSpec {
  int n = 0;      // variables
  int modes = 1;  // M
  double p = 0.9;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ModeCenters {
  std::vector<SpinVector> centers;
};

struct Mixture {
  VisibleDistribution distribution;
  ModeCenters centers;
};

int hamming_distance(const SpinVector& u, const SpinVector& v);

// Centers take one bit() per spin, mode by mode, qubit by qubit (set bit ->
// spin -1).
ModeCenters draw_centers(const MixtureSpec& spec);

// P(v) = (1/M) sum_k p^{n - d_k(v)} (1 - p)^{d_k(v)}.
VisibleDistribution mixture_distribution(const ModeCenters& centers, double p);
Mixture bernoulli_mixture(const MixtureSpec& spec);

struct LabeledJointSpec {
  MixtureSpec inputs;
  int label_bits = 0;
  // Label per mode; empty assigns label k to mode k.
  std::vector<int> labels;

  void validate() const;
  int label_of(int mode) const;
};

// Label spin encoding: bit 1 -> +1, bit 0 -> -1, most significant bit on the
// first output qubit.
SpinVector label_spins(int label, int bits);

struct LabeledMixture {
  VisibleDistribution joint;  // over [x, y]
  ModeCenters centers;
};

LabeledMixture labeled_mixture(const LabeledJointSpec& spec);

// Biases and every coupling slot drawn from U[-range, range] in that order;
// masked slots consume a draw and are then zeroed. Transverse fields are left
// untouched.
void randomize_parameters(ModelParameters& p, std::uint64_t seed, double range = 0.1);

}  // namespace qbm
