#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "z2q/coupling.hpp"
#include "z2q/ensemble.hpp"
#include "z2q/lattice.hpp"

namespace z2q {

using Amplitude = std::complex<double>;

/// Amplitudes over the 2^N_free gauge-fixed basis. Bit q of a basis index is
/// free link q; 0 is U = +1 (Z = +1), 1 is U = -1.
class StateVector {
 public:
  /// |0...0>, i.e. every link +1.
  explicit StateVector(std::size_t num_qubits);
  StateVector(std::size_t num_qubits, std::vector<Amplitude> amps);

  static StateVector basis_state(std::size_t num_qubits, std::uint64_t index);
  /// Equal superposition 2^{-n/2} sum_b |b>.
  static StateVector uniform(std::size_t num_qubits);

  std::size_t num_qubits() const noexcept { return num_qubits_; }
  std::size_t size() const noexcept { return amps_.size(); }
  std::span<const Amplitude> amps() const noexcept { return amps_; }
  std::span<Amplitude> amps() noexcept { return amps_; }
  double norm() const;
  /// |<this|other>|^2 for normalized states.
  double overlap(const StateVector& other) const;

 private:
  std::size_t num_qubits_;
  std::vector<Amplitude> amps_;
};

/// Bitmask over basis bits of the free links among `links`.
std::uint64_t free_link_mask(const GaugeFixing& gf, std::span<const LinkIndex> links);

/// Per-plaquette free-link masks; a plaquette's value on basis b is
/// (-1)^popcount(b & mask) since fixed links are +1.
std::vector<std::uint64_t> plaquette_masks(const Lattice& lattice, const GaugeFixing& gf);

/// Diagonal of the action operator over the gauge-fixed basis.
class ActionDiagonal {
 public:
  ActionDiagonal(const Lattice& lattice, const GaugeFixing& gf, double beta);
  std::size_t num_qubits() const noexcept { return num_qubits_; }
  double operator()(std::uint64_t basis) const;
  /// Dense diagonal; subject to the free-link cap.
  std::vector<double> materialize() const;

 private:
  std::size_t num_qubits_;
  double beta_;
  std::vector<std::uint64_t> masks_;
};

ActionDiagonal encode_action_diagonal(const Lattice& lattice, const GaugeFixing& gf, double beta);

/// Per-link term of the Glauber parent Hamiltonian,
///   h_n = 1/2 (I - tanh(beta C_n) Z_n - sech(beta C_n) X_n),
/// with the staple operator C_n diagonal on the neighbor qubits.
struct LinkTerm {
  std::size_t qubit = 0;
  /// Free links appearing in the staples of this link, ascending.
  std::vector<std::size_t> neighbor_qubits;
  /// Staple sum C_n for every assignment of the neighbor qubits; bit j of the
  /// table index is neighbor_qubits[j].
  std::vector<int> staple_table;
  /// One basis-bit mask per staple (fixed links substituted as +1).
  std::vector<std::uint64_t> staple_masks;

  std::size_t num_staples() const noexcept { return staple_masks.size(); }
  /// C_n on a full basis index.
  int staple_value(std::uint64_t basis) const;
};

std::vector<LinkTerm> build_link_terms(const Lattice& lattice, const GaugeFixing& gf);

/// (tanh(beta c), sech(beta c)); in the infinite limit (sign c, 0), or (0, 1)
/// when c = 0.
struct TermCoefficients {
  double z;
  double x;
};
TermCoefficients term_coefficients(int staple, Coupling beta);

/// Dense H = sum_n h_n for verification (N_free <= 12). H is real symmetric.
Eigen::MatrixXd build_dense_hamiltonian(std::span<const LinkTerm> terms, std::size_t num_qubits,
                                        Coupling beta);

/// out = H in, matrix-free.
void apply_hamiltonian(std::span<const LinkTerm> terms, Coupling beta, std::span<const double> in,
                       std::span<double> out);

/// Gibbs-weighted zero mode, amps[b] = e^{-S(b)/2} / sqrt(Z). In the infinite
/// limit the weight is spread evenly over the minimum-action basis states.
StateVector ground_state_reference(const Lattice& lattice, const GaugeFixing& gf, Coupling beta);

/// In-place exp(-i dt h_n) = I + (e^{-i dt} - 1) h_n, applied as one 2x2
/// unitary per staple-sum value.
void apply_term_evolution(StateVector& state, const LinkTerm& term, Coupling beta, double dt);

enum class StartKind { Hot, Cold };

/// Adiabatic ramp. Hot: beta'(t) = beta t / T from beta' = 0. Cold:
/// beta'(t) = beta T / t, linear in g^2 from the beta' = infinity limit.
/// beta' is evaluated at step midpoints.
class Schedule {
 public:
  Schedule(StartKind kind, double beta_target, double total_time, double dt);

  StartKind kind() const noexcept { return kind_; }
  double beta_target() const noexcept { return beta_target_; }
  double total_time() const noexcept { return total_time_; }
  /// T / steps; equal to the requested dt when T/dt is an integer.
  double dt() const noexcept { return total_time_ / static_cast<double>(steps_); }
  double requested_dt() const noexcept { return requested_dt_; }
  std::size_t steps() const noexcept { return steps_; }
  Coupling beta_at(double t) const;
  Coupling beta_for_step(std::size_t k) const;
  Coupling beta_start() const;

 private:
  StartKind kind_;
  double beta_target_;
  double total_time_;
  double requested_dt_;
  std::size_t steps_;
};

/// First-order Trotter evolution from the exact ground state of H(beta_0),
/// all link terms once per step in ascending qubit order.
StateVector adiabatic_evolve(const Lattice& lattice, const GaugeFixing& gf,
                             const Schedule& schedule);
/// Same, continuing from `state`.
void evolve(StateVector& state, std::span<const LinkTerm> terms, const Schedule& schedule);

/// Average over plaquettes of <Z_i Z_j Z_k Z_l>, fixed links counting +1.
double expectation_plaquette(const StateVector& state, const Lattice& lattice,
                             const GaugeFixing& gf);
/// <Psi| O |Psi> for an observable diagonal in the link basis.
double expectation_diagonal(const StateVector& state, const GaugeFixing& gf,
                            const Observable& observable);

/// Measurement shots: basis indices drawn from |amps|^2 by inverse CDF,
/// expanded to full configurations with fixed links +1.
Ensemble sample_configs(const StateVector& state, const Lattice& lattice, const GaugeFixing& gf,
                        std::size_t shots, std::uint64_t seed);

struct EigenOptions {
  double tolerance = 1e-9;
  std::size_t krylov_dim = 40;
  std::size_t max_restarts = 200;
  std::uint64_t seed = 12345;
};

/// k lowest eigenvalues of the matrix-free H via restarted Lanczos with
/// deflation (N_free <= 20). Throws NonConvergence with the residual norm.
std::vector<double> lowest_eigenvalues(std::span<const LinkTerm> terms, std::size_t num_qubits,
                                       Coupling beta, std::size_t k, EigenOptions options = {});

}  // namespace z2q
