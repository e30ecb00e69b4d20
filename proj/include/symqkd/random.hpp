#pragma once

#include "symqkd/linalg.hpp"
#include "symqkd/source.hpp"
#include "symqkd/states.hpp"

#include <Eigen/QR>

#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>

namespace symqkd {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

/// Seed for randomized checks; QKD_SEED overrides the default (decimal or 0x hex).
inline std::uint64_t property_seed() {
  if (const char* env = std::getenv("QKD_SEED"); env != nullptr && *env != '\0') {
    try {
      return std::stoull(env, nullptr, 0);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("QKD_SEED is not an integer: ") + env);
    }
  }
  return kDefaultSeed;
}

inline Matrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = cplx(n(rng), n(rng));
  return g;
}

/// Haar-random unitary via QR with the diagonal phases of R removed.
inline Matrix random_unitary(int n, Rng& rng) {
  const Eigen::HouseholderQR<Matrix> qr(ginibre(n, n, rng));
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    const cplx diag = r(j, j);
    if (std::abs(diag) > 0) q.col(j) *= diag / std::abs(diag);
  }
  return q;
}

inline Matrix random_density(int n, Rng& rng, int rank = -1) {
  const Matrix g = ginibre(n, rank < 0 ? n : rank, rng);
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline Vector random_pure(int n, Rng& rng) {
  Vector v = ginibre(n, 1, rng).col(0);
  return v / v.norm();
}

/// Uniform draw from the probability simplex over the d^2 Bell states.
inline BellDiagonalState random_bell_diagonal(int d, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  BellDiagonalState s{d, RealMatrix(d, d)};
  for (Eigen::Index i = 0; i < s.u.size(); ++i) s.u(i) = e(rng);
  s.u /= s.u.sum();
  return s;
}

/// Random state on d (x) d whose first marginal is exactly tau.
inline Matrix random_state_with_marginal(const Matrix& tau, Rng& rng) {
  const int d = static_cast<int>(tau.rows());
  const Matrix rho = random_density(d * d, rng);
  const Matrix rho_a = partial_trace(rho, d, d, Keep::First);
  const Matrix f = sqrt_psd(tau) * pinv_sqrt_psd(rho_a);
  const Matrix filt = kron(f, Matrix(Matrix::Identity(d, d)));
  Matrix out = filt * rho * filt.adjoint();
  out = 0.5 * (out + out.adjoint());
  return out / out.trace().real();
}

/// Projective measurement in a Haar-random orthonormal basis.
inline Povm random_basis_povm(int d, Rng& rng) {
  const Matrix u = random_unitary(d, rng);
  Povm p;
  for (int k = 0; k < d; ++k) p.elements.push_back(projector(u.col(k)));
  return p;
}

}  // namespace symqkd
