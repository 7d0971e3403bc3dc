#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "z2q/errors.hpp"
#include "z2q/quantum.hpp"

namespace z2q {

void apply_term_evolution(StateVector& state, const LinkTerm& term, Coupling beta, double dt) {
  const std::size_t n = state.num_qubits();
  if (term.qubit >= n) throw std::out_of_range("term qubit outside state");

  // exp(-i dt h) = I + (e^{-i dt} - 1) h with
  //   h = 1/2 [[1 - z, -x], [-x, 1 + z]]  in the (U=+1, U=-1) basis.
  const int kmax = static_cast<int>(term.num_staples());
  const Amplitude phase = std::polar(1.0, -dt) - 1.0;
  struct Gate {
    Amplitude u00, u01, u11;
  };
  std::vector<Gate> gates;
  gates.reserve(2 * kmax + 1);
  for (int c = -kmax; c <= kmax; ++c) {
    const auto [z, x] = term_coefficients(c, beta);
    gates.push_back({1.0 + phase * (0.5 * (1.0 - z)), phase * (-0.5 * x),
                     1.0 + phase * (0.5 * (1.0 + z))});
  }

  // Plain real arithmetic: std::complex multiplication goes through the
  // NaN-aware __muldc3 slow path.
  auto* amps = reinterpret_cast<double*>(state.amps().data());
  const std::uint64_t bit = std::uint64_t{1} << term.qubit;
  const std::uint64_t low = bit - 1;
  const std::uint64_t half = state.size() >> 1;
  for (std::uint64_t k = 0; k < half; ++k) {
    const std::uint64_t i0 = ((k & ~low) << 1) | (k & low);
    const std::uint64_t i1 = i0 | bit;
    const Gate& g = gates[term.staple_value(i0) + kmax];
    const double r0 = amps[2 * i0], m0 = amps[2 * i0 + 1];
    const double r1 = amps[2 * i1], m1 = amps[2 * i1 + 1];
    const double ar = g.u00.real(), ai = g.u00.imag();
    const double br = g.u01.real(), bi = g.u01.imag();
    const double cr = g.u11.real(), ci = g.u11.imag();
    amps[2 * i0] = ar * r0 - ai * m0 + br * r1 - bi * m1;
    amps[2 * i0 + 1] = ar * m0 + ai * r0 + br * m1 + bi * r1;
    amps[2 * i1] = br * r0 - bi * m0 + cr * r1 - ci * m1;
    amps[2 * i1 + 1] = br * m0 + bi * r0 + cr * m1 + ci * r1;
  }
}

Schedule::Schedule(StartKind kind, double beta_target, double total_time, double dt)
    : kind_(kind), beta_target_(beta_target), total_time_(total_time), requested_dt_(dt) {
  if (!std::isfinite(beta_target) || beta_target < 0.0) {
    throw std::invalid_argument("target beta must be finite and non-negative");
  }
  if (!std::isfinite(total_time) || total_time <= 0.0) {
    throw std::invalid_argument("total time T must be positive");
  }
  if (!std::isfinite(dt) || dt <= 0.0) throw std::invalid_argument("dt must be positive");
  const double ratio = total_time / dt;
  if (ratio > 1e9) throw std::invalid_argument("T/dt exceeds 1e9 steps");
  const double nearest = std::round(ratio);
  steps_ = std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)
               ? static_cast<std::size_t>(nearest)
               : static_cast<std::size_t>(std::ceil(ratio));
  steps_ = std::max<std::size_t>(steps_, 1);
}

Coupling Schedule::beta_at(double t) const {
  if (kind_ == StartKind::Hot) return Coupling(beta_target_ * t / total_time_);
  if (t <= 0.0) return Coupling::infinite();
  return Coupling(beta_target_ * total_time_ / t);
}

Coupling Schedule::beta_for_step(std::size_t k) const {
  return beta_at((static_cast<double>(k) + 0.5) * dt());
}

Coupling Schedule::beta_start() const {
  return kind_ == StartKind::Hot ? Coupling(0.0) : Coupling::infinite();
}

void evolve(StateVector& state, std::span<const LinkTerm> terms, const Schedule& schedule) {
  const double dt = schedule.dt();
  for (std::size_t k = 0; k < schedule.steps(); ++k) {
    const Coupling beta = schedule.beta_for_step(k);
    for (const auto& term : terms) apply_term_evolution(state, term, beta, dt);
  }
}

StateVector adiabatic_evolve(const Lattice& lattice, const GaugeFixing& gf,
                             const Schedule& schedule) {
  const auto terms = build_link_terms(lattice, gf);
  StateVector state = schedule.kind() == StartKind::Hot ? StateVector::uniform(gf.num_free())
                                                        : StateVector(gf.num_free());
  evolve(state, terms, schedule);
  return state;
}

Ensemble sample_configs(const StateVector& state, const Lattice& lattice, const GaugeFixing& gf,
                        std::size_t shots, std::uint64_t seed) {
  if (state.num_qubits() != gf.num_free()) throw std::invalid_argument("state/gauge mismatch");
  const auto amps = state.amps();
  std::vector<double> cdf(amps.size());
  std::transform(amps.begin(), amps.end(), cdf.begin(),
                 [](const Amplitude& a) { return std::norm(a); });
  const double total = std::accumulate(cdf.begin(), cdf.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("state has zero norm");
  for (auto& p : cdf) p /= total;
  std::partial_sum(cdf.begin(), cdf.end(), cdf.begin());
  // Last index with nonzero probability absorbs rounding at the top end.
  std::size_t last = amps.size() - 1;
  while (last > 0 && std::norm(amps[last]) == 0.0) --last;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Ensemble out;
  out.meta.dims.assign(lattice.dims().begin(), lattice.dims().end());
  out.meta.boundary = lattice.boundary();
  out.meta.sampler = Sampler::Quantum;
  out.meta.seed = seed;
  out.meta.gauge_fixed = true;
  out.meta.params["shots"] = std::to_string(shots);
  out.configs.reserve(shots);
  for (std::size_t s = 0; s < shots; ++s) {
    const double u = unit(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto index = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), last);
    out.configs.push_back(config_from_basis(gf, index));
  }
  return out;
}

}  // namespace z2q
