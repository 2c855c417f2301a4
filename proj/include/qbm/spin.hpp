#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbm {

// Basis convention: qubit 0 occupies the most significant bit of a basis
// index, and bit value b encodes spin z = 1 - 2b (bit 0 <-> spin +1).
using BasisIndex = std::uint64_t;

constexpr int kDefaultMaxQubits = 14;

// Process-wide ceiling on the number of qubits any dense operator may span.
int size_guard() noexcept;
void set_size_guard(int max_qubits);

class SizeGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws SizeGuardError when `qubits` exceeds the current guard.
void check_size(int qubits, const char* where);

inline BasisIndex basis_dimension(int qubits) { return BasisIndex{1} << qubits; }

inline BasisIndex qubit_mask(int qubit, int qubits) {
  return BasisIndex{1} << (qubits - 1 - qubit);
}

inline int spin_at(BasisIndex index, int qubit, int qubits) {
  return (index & qubit_mask(qubit, qubits)) ? -1 : 1;
}

class SpinVector {
 public:
  SpinVector() = default;
  explicit SpinVector(std::vector<int> values);
  SpinVector(std::initializer_list<int> values) : SpinVector(std::vector<int>(values)) {}

  static SpinVector from_index(BasisIndex index, int length);
  static SpinVector filled(int length, int value);

  int size() const noexcept { return static_cast<int>(values_.size()); }
  bool empty() const noexcept { return values_.empty(); }
  int operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& values() const noexcept { return values_; }

  BasisIndex to_index() const;
  SpinVector negated() const;
  SpinVector concat(const SpinVector& tail) const;
  std::string to_string() const;

  friend bool operator==(const SpinVector&, const SpinVector&) = default;

 private:
  std::vector<int> values_;
};

}  // namespace qbm
