#include "qbm/spin.hpp"

#include <atomic>

namespace qbm {

namespace {
std::atomic<int> g_size_guard{kDefaultMaxQubits};
}

int size_guard() noexcept { return g_size_guard.load(std::memory_order_relaxed); }

void set_size_guard(int max_qubits) {
  if (max_qubits < 1 || max_qubits > 30) {
    throw std::invalid_argument("set_size_guard: limit must lie in [1, 30]");
  }
  g_size_guard.store(max_qubits, std::memory_order_relaxed);
}

void check_size(int qubits, const char* where) {
  if (qubits < 0) {
    throw std::invalid_argument(std::string(where) + ": negative qubit count");
  }
  if (qubits > size_guard()) {
    throw SizeGuardError(std::string(where) + ": " + std::to_string(qubits) +
                         " qubits exceeds the size guard of " + std::to_string(size_guard()));
  }
}

SpinVector::SpinVector(std::vector<int> values) : values_(std::move(values)) {
  for (int v : values_) {
    if (v != 1 && v != -1) {
      throw std::invalid_argument("SpinVector: entries must be +1 or -1, got " + std::to_string(v));
    }
  }
}

SpinVector SpinVector::from_index(BasisIndex index, int length) {
  std::vector<int> values(static_cast<std::size_t>(length));
  for (int q = 0; q < length; ++q) values[static_cast<std::size_t>(q)] = spin_at(index, q, length);
  return SpinVector(std::move(values));
}

SpinVector SpinVector::filled(int length, int value) {
  return SpinVector(std::vector<int>(static_cast<std::size_t>(length), value));
}

BasisIndex SpinVector::to_index() const {
  BasisIndex index = 0;
  for (int v : values_) index = (index << 1) | (v < 0 ? 1u : 0u);
  return index;
}

SpinVector SpinVector::negated() const {
  std::vector<int> out(values_);
  for (int& v : out) v = -v;
  return SpinVector(std::move(out));
}

SpinVector SpinVector::concat(const SpinVector& tail) const {
  std::vector<int> out(values_);
  out.insert(out.end(), tail.values_.begin(), tail.values_.end());
  return SpinVector(std::move(out));
}

std::string SpinVector::to_string() const {
  std::string s;
  for (int v : values_) s += (v > 0 ? '+' : '-');
  return s;
}

}  // namespace qbm
