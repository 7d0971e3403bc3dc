#include "z2q/config.hpp"

#include <stdexcept>

namespace z2q {

SpinConfig::SpinConfig(std::vector<std::int8_t> values) : values_(std::move(values)) {
  for (auto v : values_) {
    if (v != 1 && v != -1) throw std::invalid_argument("link values must be +1 or -1");
  }
}

void SpinConfig::set(LinkIndex n, int value) {
  if (value != 1 && value != -1) throw std::invalid_argument("link values must be +1 or -1");
  values_.at(n) = static_cast<std::int8_t>(value);
}

bool SpinConfig::respects(const GaugeFixing& gf) const {
  if (size() != gf.num_links()) return false;
  for (LinkIndex n : gf.fixed()) {
    if (values_[n] != 1) return false;
  }
  return true;
}

SpinConfig config_from_basis(const GaugeFixing& gf, std::uint64_t basis) {
  SpinConfig c(gf.num_links());
  const auto free = gf.free();
  for (std::size_t q = 0; q < free.size(); ++q) {
    if ((basis >> q) & 1U) c.flip(free[q]);
  }
  return c;
}

std::uint64_t basis_from_config(const GaugeFixing& gf, const SpinConfig& config) {
  if (config.size() != gf.num_links()) throw std::invalid_argument("config length mismatch");
  std::uint64_t b = 0;
  const auto free = gf.free();
  for (std::size_t q = 0; q < free.size(); ++q) {
    if (config[free[q]] < 0) b |= std::uint64_t{1} << q;
  }
  return b;
}

}  // namespace z2q
