#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "z2q/lattice.hpp"

namespace z2q {

/// One gauge configuration: a +1/-1 value on every link.
class SpinConfig {
 public:
  SpinConfig() = default;
  /// All links +1.
  explicit SpinConfig(std::size_t num_links) : values_(num_links, 1) {}
  explicit SpinConfig(std::vector<std::int8_t> values);

  std::size_t size() const noexcept { return values_.size(); }
  int operator[](LinkIndex n) const { return values_[n]; }
  void set(LinkIndex n, int value);
  void flip(LinkIndex n) { values_[n] = static_cast<std::int8_t>(-values_[n]); }
  std::span<const std::int8_t> values() const noexcept { return values_; }

  /// True when every fixed link of `gf` carries +1.
  bool respects(const GaugeFixing& gf) const;

  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

 private:
  std::vector<std::int8_t> values_;
};

/// Full configuration for basis index `basis`: bit q of the index is free
/// link q, 0 meaning +1 and 1 meaning -1. Fixed links are +1.
SpinConfig config_from_basis(const GaugeFixing& gf, std::uint64_t basis);
/// Inverse of config_from_basis; fixed-link values are ignored.
std::uint64_t basis_from_config(const GaugeFixing& gf, const SpinConfig& config);

}  // namespace z2q
