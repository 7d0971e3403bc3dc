#pragma once

#include <stdexcept>

namespace z2q {

/// Inverse coupling beta = 1/g^2. The weak-coupling limit is a flag, so no
/// infinity ever enters arithmetic.
class Coupling {
 public:
  constexpr Coupling() = default;
  /* implicit */ Coupling(double beta) : value_(beta) {
    if (!(beta >= 0.0) || beta > 1e300) {
      throw std::invalid_argument("beta must be finite and non-negative");
    }
  }
  static constexpr Coupling infinite() {
    Coupling c;
    c.infinite_ = true;
    return c;
  }

  constexpr bool is_infinite() const noexcept { return infinite_; }
  /// Finite value; throws in the infinite limit.
  double value() const {
    if (infinite_) throw std::logic_error("beta is infinite");
    return value_;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

}  // namespace z2q
