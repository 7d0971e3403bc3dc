#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace z2q {

/// An exhaustive enumeration or statevector would exceed the configured size.
class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(const std::string& what_for, std::size_t requested, std::size_t cap)
      : std::runtime_error(what_for + " needs " + std::to_string(requested) +
                           " free links, cap is " + std::to_string(cap)),
        requested_(requested),
        cap_(cap) {}
  std::size_t requested() const noexcept { return requested_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t requested_;
  std::size_t cap_;
};

/// An iterative solver stopped before meeting its tolerance.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& msg, double residual)
      : std::runtime_error(msg + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Default cap on free links for enumeration and statevectors, overridable
/// through Z2Q_MAX_FREE_LINKS.
inline constexpr std::size_t kDefaultMaxFreeLinks = 24;
std::size_t max_free_links();

}  // namespace z2q
