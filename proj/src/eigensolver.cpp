#include <cmath>
#include <random>
#include <stdexcept>

#include "z2q/errors.hpp"
#include "z2q/quantum.hpp"

namespace z2q {

namespace {

using Vec = Eigen::VectorXd;

void project_out(Vec& v, const std::vector<Vec>& basis) {
  for (const auto& q : basis) v -= q.dot(v) * q;
}

}  // namespace

std::vector<double> lowest_eigenvalues(std::span<const LinkTerm> terms, std::size_t num_qubits,
                                       Coupling beta, std::size_t k, EigenOptions options) {
  constexpr std::size_t kIterativeCap = 20;
  if (num_qubits > kIterativeCap) throw CapExceeded("Lanczos", num_qubits, kIterativeCap);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << num_qubits);
  if (k == 0 || static_cast<Eigen::Index>(k) > dim) {
    throw std::invalid_argument("k must be between 1 and the Hilbert space dimension");
  }

  auto apply = [&](const Vec& in, Vec& out) {
    out.resize(dim);
    apply_hamiltonian(terms, beta, std::span<const double>(in.data(), in.size()),
                      std::span<double>(out.data(), out.size()));
  };

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss;
  std::vector<Vec> locked;
  std::vector<double> values;
  Vec hv(dim);

  // Deflated, explicitly restarted Lanczos: converge the lowest Ritz pair of
  // H restricted to the complement of the locked vectors, lock it, repeat.
  for (std::size_t target = 0; target < k; ++target) {
    Vec start(dim);
    for (auto& x : start) x = gauss(rng);
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;

    for (std::size_t restart = 0; restart <= options.max_restarts && !converged; ++restart) {
      project_out(start, locked);
      std::vector<Vec> q;
      std::vector<double> alpha;
      std::vector<double> off;
      q.push_back(start.normalized());
      const std::size_t m = std::min<std::size_t>(
          options.krylov_dim, static_cast<std::size_t>(dim) - locked.size());
      for (std::size_t j = 0; j < m; ++j) {
        apply(q[j], hv);
        alpha.push_back(q[j].dot(hv));
        // Full reorthogonalization, twice.
        for (int pass = 0; pass < 2; ++pass) {
          project_out(hv, locked);
          project_out(hv, q);
        }
        const double b = hv.norm();
        if (j + 1 == m || b < 1e-12) break;
        off.push_back(b);
        q.push_back(hv / b);
      }

      const auto size = static_cast<Eigen::Index>(alpha.size());
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(size, size);
      for (Eigen::Index i = 0; i < size; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < size) t(i, i + 1) = t(i + 1, i) = off[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
      const double theta = small.eigenvalues()(0);
      Vec ritz = Vec::Zero(dim);
      for (Eigen::Index i = 0; i < size; ++i) ritz += small.eigenvectors()(i, 0) * q[i];
      project_out(ritz, locked);
      ritz.normalize();
      apply(ritz, hv);
      residual = (hv - theta * ritz).norm();
      if (residual < options.tolerance) {
        locked.push_back(ritz);
        values.push_back(theta);
        converged = true;
      } else {
        start = ritz;
      }
    }
    if (!converged) {
      throw NonConvergence("Lanczos did not converge for eigenvalue " + std::to_string(target),
                           residual);
    }
  }
  std::sort(values.begin(), values.end());
  return values;
}

}  // namespace z2q
