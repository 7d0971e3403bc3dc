#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "z2q/errors.hpp"
#include "z2q/quantum.hpp"

namespace z2q {

namespace {

std::size_t checked_dimension(std::size_t num_qubits) {
  const std::size_t cap = max_free_links();
  if (num_qubits > cap) throw CapExceeded("statevector", num_qubits, cap);
  return std::size_t{1} << num_qubits;
}

}  // namespace

StateVector::StateVector(std::size_t num_qubits)
    : num_qubits_(num_qubits), amps_(checked_dimension(num_qubits)) {
  amps_[0] = 1.0;
}

StateVector::StateVector(std::size_t num_qubits, std::vector<Amplitude> amps)
    : num_qubits_(num_qubits), amps_(std::move(amps)) {
  if (amps_.size() != checked_dimension(num_qubits)) {
    throw std::invalid_argument("amplitude count must be 2^num_qubits");
  }
}

StateVector StateVector::basis_state(std::size_t num_qubits, std::uint64_t index) {
  StateVector s(num_qubits);
  if (index >= s.size()) throw std::out_of_range("basis index out of range");
  s.amps_[0] = 0.0;
  s.amps_[index] = 1.0;
  return s;
}

StateVector StateVector::uniform(std::size_t num_qubits) {
  StateVector s(num_qubits);
  const double a = std::pow(2.0, -0.5 * static_cast<double>(num_qubits));
  std::fill(s.amps_.begin(), s.amps_.end(), Amplitude(a, 0.0));
  return s;
}

double StateVector::norm() const {
  double sum = 0.0;
  for (const auto& a : amps_) sum += std::norm(a);
  return std::sqrt(sum);
}

double StateVector::overlap(const StateVector& other) const {
  if (other.size() != size()) throw std::invalid_argument("state size mismatch");
  Amplitude dot = 0.0;
  for (std::size_t i = 0; i < amps_.size(); ++i) dot += std::conj(amps_[i]) * other.amps_[i];
  return std::norm(dot);
}

std::uint64_t free_link_mask(const GaugeFixing& gf, std::span<const LinkIndex> links) {
  std::uint64_t mask = 0;
  for (LinkIndex n : links) {
    if (!gf.is_fixed(n)) mask |= std::uint64_t{1} << gf.qubit_of(n);
  }
  return mask;
}

std::vector<std::uint64_t> plaquette_masks(const Lattice& lattice, const GaugeFixing& gf) {
  if (gf.num_links() != lattice.num_links()) {
    throw std::invalid_argument("gauge fixing does not match lattice");
  }
  std::vector<std::uint64_t> masks;
  masks.reserve(lattice.num_plaquettes());
  for (const auto& p : lattice.plaquettes()) masks.push_back(free_link_mask(gf, p.links));
  return masks;
}

double expectation_plaquette(const StateVector& state, const Lattice& lattice,
                             const GaugeFixing& gf) {
  if (state.num_qubits() != gf.num_free()) throw std::invalid_argument("state/lattice mismatch");
  const auto masks = plaquette_masks(lattice, gf);
  if (masks.empty()) return 0.0;
  const auto amps = state.amps();
  double total = 0.0;
  for (std::uint64_t b = 0; b < amps.size(); ++b) {
    const double prob = std::norm(amps[b]);
    if (prob == 0.0) continue;
    int sum = 0;
    for (auto m : masks) sum += (std::popcount(b & m) & 1) ? -1 : 1;
    total += prob * sum;
  }
  return total / static_cast<double>(masks.size());
}

double expectation_diagonal(const StateVector& state, const GaugeFixing& gf,
                            const Observable& observable) {
  if (state.num_qubits() != gf.num_free()) throw std::invalid_argument("state/gauge mismatch");
  const auto amps = state.amps();
  double total = 0.0;
  for (std::uint64_t b = 0; b < amps.size(); ++b) {
    const double prob = std::norm(amps[b]);
    if (prob == 0.0) continue;
    total += prob * observable(config_from_basis(gf, b));
  }
  return total;
}

}  // namespace z2q
