#pragma once

#include <cstdint>
#include <random>

#include "z2q/config.hpp"
#include "z2q/ensemble.hpp"
#include "z2q/lattice.hpp"

namespace z2q {

/// Product of the four links of plaquette p.
int plaquette_value(const SpinConfig& config, const Lattice& lattice, std::size_t p);

/// S = -beta * sum over plaquettes of U_i U_j U_k U_l.
double action(const SpinConfig& config, const Lattice& lattice, double beta);

/// Sum over staples of link n of the product of the three staple links.
int staple_sum(const SpinConfig& config, const Lattice& lattice, LinkIndex n);

/// S(flip n) - S, evaluated locally as 2 beta U_n C_n.
double delta_action(const SpinConfig& config, LinkIndex n, const Lattice& lattice, double beta);

double plaquette_average(const SpinConfig& config, const Lattice& lattice);

/// Observables over stored configurations. Each keeps its own copy of the
/// lattice so it can outlive the caller's.
Observable plaquette_observable(const Lattice& lattice);
Observable single_plaquette_observable(const Lattice& lattice, std::size_t p);
/// Action per site, S / N_site.
Observable action_density_observable(const Lattice& lattice, double beta);

struct EnumerationOptions {
  /// 0 means max_free_links().
  std::size_t cap = 0;
  std::size_t workers = 1;
};

/// <O> = (1/Z) sum over all 2^N_free gauge-fixed configs of O e^{-S}.
/// Weights are shifted by the minimum possible action and summed in long
/// double. The enumeration is split into a fixed set of chunks that are
/// reduced in order, so the result does not depend on `workers`.
double exact_expectation(const Lattice& lattice, const GaugeFixing& gf, double beta,
                         const Observable& observable, EnumerationOptions options = {});

/// Glauber flip probability of link n, e^{-dS} / (1 + e^{-dS}).
double glauber_flip_probability(const SpinConfig& config, LinkIndex n, const Lattice& lattice,
                                double beta);

/// One Glauber update: pick a free link uniformly, flip it with the Glauber
/// probability. Returns whether the flip was accepted.
bool glauber_step(SpinConfig& config, const Lattice& lattice, const GaugeFixing& gf, double beta,
                  std::mt19937_64& rng);

struct McmcParams {
  std::size_t n_therm = 100;  // sweeps
  std::size_t n_configs = 1000;
  std::size_t stride = 10;  // sweeps between stored configs
};

/// Glauber chain from the all-ones start. One sweep is N_free steps.
Ensemble mcmc_run(const Lattice& lattice, const GaugeFixing& gf, double beta,
                  const McmcParams& params, std::uint64_t seed);

}  // namespace z2q
