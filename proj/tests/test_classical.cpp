#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "z2q/classical.hpp"
#include "z2q/errors.hpp"

using namespace z2q;

namespace {

SpinConfig random_config(const Lattice& lat, const GaugeFixing* gf, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  SpinConfig c(lat.num_links());
  for (LinkIndex n = 0; n < lat.num_links(); ++n) {
    if ((gf == nullptr || !gf->is_fixed(n)) && coin(rng)) c.flip(n);
  }
  return c;
}

// Independent oracle: sum over every one of the 2^N link assignments, no gauge
// fixing, weights straight from the plaquette products.
double brute_force_plaquette(const Lattice& lat, double beta) {
  const std::size_t n = lat.num_links();
  double z = 0.0;
  double num = 0.0;
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
    int sum = 0;
    for (const auto& p : lat.plaquettes()) {
      int prod = 1;
      for (LinkIndex l : p.links) prod *= ((b >> l) & 1U) ? -1 : 1;
      sum += prod;
    }
    const double w = std::exp(beta * sum);
    z += w;
    num += w * sum / static_cast<double>(lat.num_plaquettes());
  }
  return num / z;
}

// Axial gauge: link (x, mu) fixed when x_nu = 0 for every nu < mu. A
// different maximal tree from the BFS one.
GaugeFixing axial_gauge(const Lattice& lat) {
  std::vector<LinkIndex> fixed;
  for (LinkIndex n = 0; n < lat.num_links(); ++n) {
    const auto x = lat.coords(lat.link_site(n));
    bool ok = true;
    for (std::size_t nu = 0; nu < lat.link_direction(n); ++nu) ok = ok && x[nu] == 0;
    if (ok) fixed.push_back(n);
  }
  return GaugeFixing(lat.num_links(), fixed);
}

}  // namespace

TEST_CASE("action examples") {
  const Lattice hyper({2, 2, 2, 2}, Boundary::Open);
  const SpinConfig ones(hyper.num_links());
  CHECK(action(ones, hyper, 0.7) == doctest::Approx(-24 * 0.7));
  CHECK(action(ones, hyper, 1.3) == doctest::Approx(-24 * 1.3));

  std::mt19937_64 rng(1);
  CHECK(action(random_config(hyper, nullptr, rng), hyper, 0.0) == 0.0);

  const Lattice sq({2, 2}, Boundary::Open);
  const GaugeFixing gf = gauge_fix(sq);
  SpinConfig c(sq.num_links());
  c.flip(gf.link_of_qubit(0));
  CHECK(action(c, sq, 0.7) == doctest::Approx(0.7));

  CHECK_THROWS_AS(action(SpinConfig(5), sq, 0.7), std::invalid_argument);
}

TEST_CASE("delta_action examples") {
  const Lattice hyper({2, 2, 2, 2}, Boundary::Open);
  const SpinConfig ones(hyper.num_links());
  for (LinkIndex n = 0; n < hyper.num_links(); ++n) {
    CHECK(delta_action(ones, n, hyper, 0.7) == doctest::Approx(6 * 0.7));
    CHECK(delta_action(ones, n, hyper, 0.0) == 0.0);
  }
  std::mt19937_64 rng(2);
  SpinConfig c = random_config(hyper, nullptr, rng);
  const double first = delta_action(c, 5, hyper, 0.8);
  c.flip(5);
  CHECK(first + delta_action(c, 5, hyper, 0.8) == 0.0);
}

TEST_CASE("delta_action equals the action difference") {
  // Exhaustive on the 2x2 lattice.
  const Lattice sq({2, 2}, Boundary::Open);
  for (std::uint64_t b = 0; b < 16; ++b) {
    SpinConfig c(sq.num_links());
    for (LinkIndex n = 0; n < 4; ++n) {
      if ((b >> n) & 1U) c.flip(n);
    }
    for (LinkIndex n = 0; n < 4; ++n) {
      SpinConfig f = c;
      f.flip(n);
      CHECK(delta_action(c, n, sq, 0.7) == doctest::Approx(action(f, sq, 0.7) - action(c, sq, 0.7)));
    }
  }
  // Randomized on the hypercube and a periodic lattice.
  std::mt19937_64 rng(3);
  for (const Lattice& lat : {Lattice({2, 2, 2, 2}, Boundary::Open),
                             Lattice({3, 3, 3}, Boundary::Periodic)}) {
    std::uniform_int_distribution<LinkIndex> pick(0, lat.num_links() - 1);
    for (int t = 0; t < 200; ++t) {
      const SpinConfig c = random_config(lat, nullptr, rng);
      const LinkIndex n = pick(rng);
      SpinConfig f = c;
      f.flip(n);
      CHECK(delta_action(c, n, lat, 1.1) ==
            doctest::Approx(action(f, lat, 1.1) - action(c, lat, 1.1)).epsilon(1e-14));
    }
  }
}

TEST_CASE("plaquette_average examples") {
  const Lattice hyper({2, 2, 2, 2}, Boundary::Open);
  SpinConfig c(hyper.num_links());
  CHECK(plaquette_average(c, hyper) == 1.0);
  for (LinkIndex n = 0; n < hyper.num_links(); ++n) c.flip(n);
  CHECK(plaquette_average(c, hyper) == 1.0);

  const Lattice sq({2, 2}, Boundary::Open);
  SpinConfig s(sq.num_links());
  s.flip(gauge_fix(sq).link_of_qubit(0));
  CHECK(plaquette_average(s, sq) == -1.0);
}

TEST_CASE("exact_expectation examples") {
  const Lattice hyper({2, 2, 2, 2}, Boundary::Open);
  const GaugeFixing gf = gauge_fix(hyper);
  const auto plaq = plaquette_observable(hyper);
  CHECK(std::abs(exact_expectation(hyper, gf, 0.0, plaq)) < 1e-15);
  // Frozen from an independent numpy enumeration in axial gauge.
  CHECK(exact_expectation(hyper, gf, 0.7, plaq) == doctest::Approx(0.7530336862157457).epsilon(1e-12));

  const Lattice sq({2, 2}, Boundary::Open);
  CHECK(exact_expectation(sq, gauge_fix(sq), 0.7, plaquette_observable(sq)) ==
        doctest::Approx(std::tanh(0.7)).epsilon(1e-14));
}

TEST_CASE("exact_expectation matches the un-fixed brute force") {
  for (const Lattice& lat : {Lattice({2, 2, 2}, Boundary::Open), Lattice({2, 3}, Boundary::Open),
                             Lattice({3, 3}, Boundary::Open)}) {
    for (double beta : {0.0, 0.4, 1.2}) {
      CHECK(exact_expectation(lat, gauge_fix(lat), beta, plaquette_observable(lat)) ==
            doctest::Approx(brute_force_plaquette(lat, beta)).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact_expectation does not depend on the choice of gauge tree") {
  const Lattice hyper({2, 2, 2, 2}, Boundary::Open);
  const GaugeFixing bfs = gauge_fix(hyper);
  const GaugeFixing axial = axial_gauge(hyper);
  REQUIRE(axial.num_free() == 17);
  CHECK(std::vector(axial.free().begin(), axial.free().end()) !=
        std::vector(bfs.free().begin(), bfs.free().end()));
  const auto obs = action_density_observable(hyper, 0.9);
  CHECK(exact_expectation(hyper, axial, 0.9, obs) ==
        doctest::Approx(exact_expectation(hyper, bfs, 0.9, obs)).epsilon(1e-12));
}

TEST_CASE("exact_expectation is independent of the worker count") {
  const Lattice lat({3, 3, 2}, Boundary::Open);
  const GaugeFixing gf = gauge_fix(lat);
  const auto obs = plaquette_observable(lat);
  const double one = exact_expectation(lat, gf, 0.8, obs, {0, 1});
  for (std::size_t w : {2u, 3u, 8u}) {
    CHECK(exact_expectation(lat, gf, 0.8, obs, {0, w}) == one);
  }
}

TEST_CASE("exact_expectation refuses past the enumeration cap") {
  const Lattice hyper({2, 2, 2, 2}, Boundary::Open);
  CHECK_THROWS_AS(exact_expectation(hyper, gauge_fix(hyper), 0.7, plaquette_observable(hyper),
                                    {16, 1}),
                  CapExceeded);
}

TEST_CASE("exact_expectation stays finite at large beta") {
  const Lattice lat({3, 3, 2}, Boundary::Open);
  const double p = exact_expectation(lat, gauge_fix(lat), 400.0, plaquette_observable(lat));
  CHECK(p == doctest::Approx(1.0));
}

TEST_CASE("plaquette expectation is non-decreasing in beta on the hypercube") {
  const Lattice hyper({2, 2, 2, 2}, Boundary::Open);
  const GaugeFixing gf = gauge_fix(hyper);
  const auto obs = plaquette_observable(hyper);
  double prev = -1.0;
  for (double beta = 0.0; beta <= 2.0; beta += 0.25) {
    const double p = exact_expectation(hyper, gf, beta, obs);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("Glauber flip probability") {
  const Lattice hyper({2, 2, 2, 2}, Boundary::Open);
  const SpinConfig ones(hyper.num_links());
  CHECK(glauber_flip_probability(ones, 3, hyper, 0.0) == 0.5);
  const double expected = std::exp(-4.2) / (1.0 + std::exp(-4.2));
  CHECK(glauber_flip_probability(ones, 3, hyper, 0.7) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(0.0148).epsilon(0.01));

  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const SpinConfig c = random_config(hyper, nullptr, rng);
    const LinkIndex n = t % hyper.num_links();
    const double beta = 0.05 * t;
    const int cn = staple_sum(c, hyper, n);
    const double formula = std::exp(-beta * c[n] * cn) / (2.0 * std::cosh(beta * cn));
    CHECK(glauber_flip_probability(c, n, hyper, beta) == doctest::Approx(formula).epsilon(1e-13));
  }
}

TEST_CASE("Glauber chain satisfies detailed balance") {
  std::mt19937_64 rng(5);
  for (const Lattice& lat : {Lattice({2, 2, 2, 2}, Boundary::Open),
                             Lattice({3, 3}, Boundary::Periodic)}) {
    const GaugeFixing gf = gauge_fix(lat);
    const double select = 1.0 / static_cast<double>(gf.num_free());
    std::uniform_int_distribution<std::size_t> pick(0, gf.num_free() - 1);
    for (int t = 0; t < 500; ++t) {
      const double beta = 0.003 * t;
      const SpinConfig c = random_config(lat, &gf, rng);
      const LinkIndex n = gf.link_of_qubit(pick(rng));
      SpinConfig f = c;
      f.flip(n);
      // pi(c) P(c->f) = pi(f) P(f->c), divided through by pi(c).
      const double lhs = select * glauber_flip_probability(c, n, lat, beta);
      const double rhs = std::exp(-(action(f, lat, beta) - action(c, lat, beta))) * select *
                         glauber_flip_probability(f, n, lat, beta);
      CHECK(std::abs(lhs - rhs) <= 1e-12);
    }
  }
}

TEST_CASE("glauber_step leaves fixed links alone and accepts half the time at beta 0") {
  const Lattice hyper({2, 2, 2, 2}, Boundary::Open);
  const GaugeFixing gf = gauge_fix(hyper);
  std::mt19937_64 rng(6);
  SpinConfig c(hyper.num_links());
  int accepted = 0;
  const int steps = 20000;
  for (int i = 0; i < steps; ++i) {
    accepted += glauber_step(c, hyper, gf, 0.0, rng);
    REQUIRE(c.respects(gf));
  }
  const double rate = static_cast<double>(accepted) / steps;
  CHECK(std::abs(rate - 0.5) < 4 * std::sqrt(0.25 / steps));
}

TEST_CASE("mcmc_run is deterministic under a fixed seed") {
  const Lattice hyper({2, 2, 2, 2}, Boundary::Open);
  const GaugeFixing gf = gauge_fix(hyper);
  const McmcParams params{10, 50, 2};
  const Ensemble a = mcmc_run(hyper, gf, 0.7, params, 99);
  const Ensemble b = mcmc_run(hyper, gf, 0.7, params, 99);
  CHECK(a == b);
  CHECK(a.configs.size() == 50);
  CHECK(a.meta.sampler == Sampler::Mcmc);
  const Ensemble c = mcmc_run(hyper, gf, 0.7, params, 100);
  CHECK(!(a == c));
  for (const auto& cfg : a.configs) CHECK(cfg.respects(gf));
}

TEST_CASE("mcmc_run at beta 0 averages to zero") {
  const Lattice hyper({2, 2, 2, 2}, Boundary::Open);
  const GaugeFixing gf = gauge_fix(hyper);
  const Ensemble e = mcmc_run(hyper, gf, 0.0, {20, 4000, 2}, 11);
  const auto est = estimate(e, plaquette_observable(hyper));
  CHECK(est.method == ErrorMethod::Binned);
  CHECK(std::abs(est.mean) < 3 * est.error);
}
