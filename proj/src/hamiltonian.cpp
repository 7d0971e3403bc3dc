#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "z2q/errors.hpp"
#include "z2q/quantum.hpp"

namespace z2q {

ActionDiagonal::ActionDiagonal(const Lattice& lattice, const GaugeFixing& gf, double beta)
    : num_qubits_(gf.num_free()), beta_(beta), masks_(plaquette_masks(lattice, gf)) {
  if (num_qubits_ >= 64) throw CapExceeded("action diagonal", num_qubits_, 63);
}

double ActionDiagonal::operator()(std::uint64_t basis) const {
  int sum = 0;
  for (auto m : masks_) sum += (std::popcount(basis & m) & 1) ? -1 : 1;
  return -beta_ * sum;
}

std::vector<double> ActionDiagonal::materialize() const {
  const std::size_t cap = max_free_links();
  if (num_qubits_ > cap) throw CapExceeded("action diagonal", num_qubits_, cap);
  std::vector<double> diag(std::size_t{1} << num_qubits_);
  for (std::uint64_t b = 0; b < diag.size(); ++b) diag[b] = (*this)(b);
  return diag;
}

ActionDiagonal encode_action_diagonal(const Lattice& lattice, const GaugeFixing& gf, double beta) {
  return ActionDiagonal(lattice, gf, beta);
}

int LinkTerm::staple_value(std::uint64_t basis) const {
  int c = 0;
  for (auto m : staple_masks) c += (std::popcount(basis & m) & 1) ? -1 : 1;
  return c;
}

std::vector<LinkTerm> build_link_terms(const Lattice& lattice, const GaugeFixing& gf) {
  if (gf.num_links() != lattice.num_links()) {
    throw std::invalid_argument("gauge fixing does not match lattice");
  }
  std::vector<LinkTerm> terms;
  terms.reserve(gf.num_free());
  for (std::size_t q = 0; q < gf.num_free(); ++q) {
    LinkTerm term;
    term.qubit = q;
    std::uint64_t neighbors = 0;
    for (const auto& st : staples_of(lattice, gf.link_of_qubit(q))) {
      const std::uint64_t m = free_link_mask(gf, st.links);
      term.staple_masks.push_back(m);
      neighbors |= m;
    }
    for (std::uint64_t rest = neighbors; rest != 0; rest &= rest - 1) {
      term.neighbor_qubits.push_back(static_cast<std::size_t>(std::countr_zero(rest)));
    }
    const std::size_t k = term.neighbor_qubits.size();
    term.staple_table.resize(std::size_t{1} << k);
    for (std::uint64_t a = 0; a < term.staple_table.size(); ++a) {
      std::uint64_t basis = 0;
      for (std::size_t j = 0; j < k; ++j) {
        if ((a >> j) & 1U) basis |= std::uint64_t{1} << term.neighbor_qubits[j];
      }
      term.staple_table[a] = term.staple_value(basis);
    }
    terms.push_back(std::move(term));
  }
  return terms;
}

TermCoefficients term_coefficients(int staple, Coupling beta) {
  if (staple == 0) return {0.0, 1.0};
  if (beta.is_infinite()) return {staple > 0 ? 1.0 : -1.0, 0.0};
  const double arg = beta.value() * staple;
  // sech underflows to 0 cleanly; cosh overflow gives 1/inf = 0.
  return {std::tanh(arg), 1.0 / std::cosh(arg)};
}

namespace {

int max_staples(std::span<const LinkTerm> terms) {
  std::size_t k = 0;
  for (const auto& t : terms) k = std::max(k, t.num_staples());
  return static_cast<int>(k);
}

// Coefficients indexed by c + kmax.
std::vector<TermCoefficients> coefficient_table(int kmax, Coupling beta) {
  std::vector<TermCoefficients> table;
  for (int c = -kmax; c <= kmax; ++c) table.push_back(term_coefficients(c, beta));
  return table;
}

}  // namespace

Eigen::MatrixXd build_dense_hamiltonian(std::span<const LinkTerm> terms, std::size_t num_qubits,
                                        Coupling beta) {
  constexpr std::size_t kDenseCap = 12;
  if (num_qubits > kDenseCap) throw CapExceeded("dense Hamiltonian", num_qubits, kDenseCap);
  const int kmax = max_staples(terms);
  const auto coeff = coefficient_table(kmax, beta);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << num_qubits);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& term : terms) {
    const std::uint64_t bit = std::uint64_t{1} << term.qubit;
    for (Eigen::Index b = 0; b < dim; ++b) {
      const auto ub = static_cast<std::uint64_t>(b);
      const auto [z, x] = coeff[term.staple_value(ub) + kmax];
      const double zsign = (ub & bit) ? -1.0 : 1.0;
      h(b, b) += 0.5 * (1.0 - z * zsign);
      h(static_cast<Eigen::Index>(ub ^ bit), b) -= 0.5 * x;
    }
  }
  return h;
}

void apply_hamiltonian(std::span<const LinkTerm> terms, Coupling beta, std::span<const double> in,
                       std::span<double> out) {
  if (in.size() != out.size() || !std::has_single_bit(in.size())) {
    throw std::invalid_argument("vector sizes must match and be a power of two");
  }
  const int kmax = max_staples(terms);
  const auto coeff = coefficient_table(kmax, beta);
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& term : terms) {
    const std::uint64_t bit = std::uint64_t{1} << term.qubit;
    for (std::uint64_t b = 0; b < in.size(); ++b) {
      const auto [z, x] = coeff[term.staple_value(b) + kmax];
      const double zsign = (b & bit) ? -1.0 : 1.0;
      out[b] += 0.5 * ((1.0 - z * zsign) * in[b] - x * in[b ^ bit]);
    }
  }
}

StateVector ground_state_reference(const Lattice& lattice, const GaugeFixing& gf, Coupling beta) {
  const std::size_t cap = max_free_links();
  if (gf.num_free() > cap) throw CapExceeded("ground state reference", gf.num_free(), cap);
  // The plaquette sum carries the whole action, S = -beta * sum.
  const ActionDiagonal plaq_sum(lattice, gf, -1.0);
  const std::vector<double> sums = plaq_sum.materialize();
  const double best = *std::max_element(sums.begin(), sums.end());

  std::vector<Amplitude> amps(sums.size());
  double norm2 = 0.0;
  for (std::size_t b = 0; b < sums.size(); ++b) {
    double w;
    if (beta.is_infinite()) {
      w = sums[b] == best ? 1.0 : 0.0;
    } else {
      // e^{-(S - S_min)/2} with S - S_min = beta (best - sum) >= 0.
      w = std::exp(-0.5 * beta.value() * (best - sums[b]));
    }
    amps[b] = w;
    norm2 += w * w;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& a : amps) a *= inv;
  return StateVector(gf.num_free(), std::move(amps));
}

}  // namespace z2q
