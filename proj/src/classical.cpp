#include "z2q/classical.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <memory>
#include <stdexcept>

#include "z2q/errors.hpp"

namespace z2q {

namespace {

void check_length(const SpinConfig& config, const Lattice& lattice) {
  if (config.size() != lattice.num_links()) {
    throw std::invalid_argument("config has " + std::to_string(config.size()) +
                                " links, lattice has " + std::to_string(lattice.num_links()));
  }
}

int plaquette_sum(const SpinConfig& config, const Lattice& lattice) {
  int total = 0;
  for (std::size_t p = 0; p < lattice.num_plaquettes(); ++p) {
    total += plaquette_value(config, lattice, p);
  }
  return total;
}

struct Partial {
  long double weight = 0.0L;
  long double weighted = 0.0L;
};

}  // namespace

int plaquette_value(const SpinConfig& config, const Lattice& lattice, std::size_t p) {
  const auto& links = lattice.plaquettes()[p].links;
  return config[links[0]] * config[links[1]] * config[links[2]] * config[links[3]];
}

double action(const SpinConfig& config, const Lattice& lattice, double beta) {
  check_length(config, lattice);
  return -beta * plaquette_sum(config, lattice);
}

int staple_sum(const SpinConfig& config, const Lattice& lattice, LinkIndex n) {
  int c = 0;
  for (std::size_t p : lattice.plaquettes_of(n)) {
    c += plaquette_value(config, lattice, p) * config[n];
  }
  return c;
}

double delta_action(const SpinConfig& config, LinkIndex n, const Lattice& lattice, double beta) {
  check_length(config, lattice);
  if (n >= lattice.num_links()) throw std::out_of_range("link index out of range");
  return 2.0 * beta * config[n] * staple_sum(config, lattice, n);
}

double plaquette_average(const SpinConfig& config, const Lattice& lattice) {
  check_length(config, lattice);
  if (lattice.num_plaquettes() == 0) return 0.0;
  return static_cast<double>(plaquette_sum(config, lattice)) /
         static_cast<double>(lattice.num_plaquettes());
}

Observable plaquette_observable(const Lattice& lattice) {
  auto lat = std::make_shared<const Lattice>(lattice);
  return [lat](const SpinConfig& c) { return plaquette_average(c, *lat); };
}

Observable single_plaquette_observable(const Lattice& lattice, std::size_t p) {
  if (p >= lattice.num_plaquettes()) throw std::out_of_range("plaquette index out of range");
  auto lat = std::make_shared<const Lattice>(lattice);
  return [lat, p](const SpinConfig& c) {
    return static_cast<double>(plaquette_value(c, *lat, p));
  };
}

Observable action_density_observable(const Lattice& lattice, double beta) {
  auto lat = std::make_shared<const Lattice>(lattice);
  return [lat, beta](const SpinConfig& c) {
    return action(c, *lat, beta) / static_cast<double>(lat->num_sites());
  };
}

double exact_expectation(const Lattice& lattice, const GaugeFixing& gf, double beta,
                         const Observable& observable, EnumerationOptions options) {
  const std::size_t cap = options.cap == 0 ? max_free_links() : options.cap;
  const std::size_t nf = gf.num_free();
  if (nf > cap) throw CapExceeded("exact enumeration", nf, cap);
  if (gf.num_links() != lattice.num_links()) {
    throw std::invalid_argument("gauge fixing does not match lattice");
  }

  const std::uint64_t total = std::uint64_t{1} << nf;
  const double s_min = -beta * static_cast<double>(lattice.num_plaquettes());
  constexpr std::uint64_t kChunks = 64;
  const std::uint64_t chunk = (total + kChunks - 1) / kChunks;

  auto run_chunk = [&](std::uint64_t c) {
    Partial acc;
    const std::uint64_t lo = c * chunk;
    const std::uint64_t hi = std::min(total, lo + chunk);
    if (lo >= hi) return acc;
    SpinConfig config = config_from_basis(gf, lo);
    std::uint64_t prev = lo;
    for (std::uint64_t b = lo; b < hi; ++b) {
      // Gray-code style update: flip only the bits that changed.
      for (std::uint64_t diff = b ^ prev; diff != 0; diff &= diff - 1) {
        config.flip(gf.link_of_qubit(static_cast<std::size_t>(std::countr_zero(diff))));
      }
      prev = b;
      const double s = -beta * plaquette_sum(config, lattice);
      const long double w = std::exp(-static_cast<long double>(s - s_min));
      acc.weight += w;
      acc.weighted += w * observable(config);
    }
    return acc;
  };

  std::vector<Partial> partials(kChunks);
  const std::size_t workers = std::max<std::size_t>(1, options.workers);
  if (workers == 1) {
    for (std::uint64_t c = 0; c < kChunks; ++c) partials[c] = run_chunk(c);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::uint64_t c = w; c < kChunks; c += workers) partials[c] = run_chunk(c);
      }));
    }
    for (auto& j : jobs) j.get();
  }

  Partial sum;
  for (const auto& p : partials) {
    sum.weight += p.weight;
    sum.weighted += p.weighted;
  }
  return static_cast<double>(sum.weighted / sum.weight);
}

double glauber_flip_probability(const SpinConfig& config, LinkIndex n, const Lattice& lattice,
                                double beta) {
  const double ds = delta_action(config, n, lattice, beta);
  // e^{-dS}/(1+e^{-dS}) written to stay finite for large |dS|.
  return ds >= 0.0 ? std::exp(-ds) / (1.0 + std::exp(-ds)) : 1.0 / (1.0 + std::exp(ds));
}

bool glauber_step(SpinConfig& config, const Lattice& lattice, const GaugeFixing& gf, double beta,
                  std::mt19937_64& rng) {
  if (gf.num_free() == 0) return false;
  std::uniform_int_distribution<std::size_t> pick(0, gf.num_free() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const LinkIndex n = gf.link_of_qubit(pick(rng));
  const double p = glauber_flip_probability(config, n, lattice, beta);
  if (unit(rng) < p) {
    config.flip(n);
    return true;
  }
  return false;
}

Ensemble mcmc_run(const Lattice& lattice, const GaugeFixing& gf, double beta,
                  const McmcParams& params, std::uint64_t seed) {
  if (params.n_configs == 0 || params.stride == 0) {
    throw std::invalid_argument("n_configs and stride must be positive");
  }
  std::mt19937_64 rng(seed);
  SpinConfig config(lattice.num_links());
  const std::size_t sweep = gf.num_free();
  auto sweeps = [&](std::size_t count) {
    for (std::size_t i = 0; i < count * sweep; ++i) glauber_step(config, lattice, gf, beta, rng);
  };

  Ensemble out;
  out.meta.dims.assign(lattice.dims().begin(), lattice.dims().end());
  out.meta.boundary = lattice.boundary();
  out.meta.beta = beta;
  out.meta.sampler = Sampler::Mcmc;
  out.meta.seed = seed;
  out.meta.gauge_fixed = true;
  out.meta.params = {{"n_therm", std::to_string(params.n_therm)},
                     {"stride", std::to_string(params.stride)}};
  out.configs.reserve(params.n_configs);

  sweeps(params.n_therm);
  for (std::size_t i = 0; i < params.n_configs; ++i) {
    sweeps(params.stride);
    out.configs.push_back(config);
  }
  return out;
}

}  // namespace z2q
