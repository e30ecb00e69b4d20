#pragma once

#include "symqkd/linalg.hpp"

#include <numbers>
#include <string>
#include <vector>

namespace symqkd {

inline bool is_prime(int n) {
  if (n < 2) return false;
  for (int k = 2; k * k <= n; ++k)
    if (n % k == 0) return false;
  return true;
}

inline int mod(int a, int d) {
  const int m = a % d;
  return m < 0 ? m + d : m;
}

inline cplx omega_pow(int d, long long k) {
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(k % d) / d;
  return std::polar(1.0, angle);
}

struct PauliIndex {
  int r = 0;
  int s = 0;
};

/// Basis labels: Z is the computational basis, otherwise the eigenbasis of X Z^beta.
struct BasisLabel {
  bool is_z = true;
  int beta = 0;

  static BasisLabel z() { return {true, 0}; }
  static BasisLabel b(int beta) { return {false, beta}; }
  std::string name() const { return is_z ? std::string("Z") : std::to_string(beta); }
  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

/// Ordered list of d orthonormal vectors.
using OrthonormalBasis = std::vector<Vector>;

/// U_{r,s} = sum_k omega^{ks} |k+r><k| = X^r Z^s.
inline Matrix pauli_matrix(int d, PauliIndex idx) {
  if (d < 2) throw std::invalid_argument("pauli_matrix: d must be >= 2");
  const int r = mod(idx.r, d);
  const int s = mod(idx.s, d);
  Matrix u = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) u(mod(k + r, d), k) = omega_pow(d, static_cast<long long>(k) * s);
  return u;
}

/// |U_{r,s}> = (1/sqrt d) sum_k omega^{ks} |k+r>|k>, first factor is Alice.
inline Vector bell_vector(int d, PauliIndex idx) {
  const int r = mod(idx.r, d);
  const int s = mod(idx.s, d);
  Vector v = Vector::Zero(d * d);
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  for (int k = 0; k < d; ++k) v(mod(k + r, d) * d + k) = norm * omega_pow(d, static_cast<long long>(k) * s);
  return v;
}

inline OrthonormalBasis standard_basis(int d) {
  OrthonormalBasis out;
  for (int j = 0; j < d; ++j) out.push_back(Vector::Unit(d, j));
  return out;
}

/**
 * Mutually unbiased bases in prime dimension.
 *
 * For odd primes the X Z^beta eigenbasis is |psi_k> = d^{-1/2} sum_j
 * omega^{-kj - beta s_j} |j> with s_j = (d-j)(d+j-1)/2. At d = 2 that
 * formula makes beta = 0 and beta = 1 coincide, so the X and Y eigenbases
 * are written out directly.
 */
inline OrthonormalBasis mub_basis(int d, BasisLabel label) {
  if (!is_prime(d)) throw std::invalid_argument("mub_basis: d must be prime, got " + std::to_string(d));
  if (label.is_z) return standard_basis(d);
  const int beta = mod(label.beta, d);
  OrthonormalBasis out;
  if (d == 2) {
    const double h = 1.0 / std::sqrt(2.0);
    const cplx phase = beta == 0 ? cplx(1.0, 0.0) : cplx(0.0, 1.0);
    for (int k = 0; k < 2; ++k) {
      Vector v(2);
      v << h, (k == 0 ? 1.0 : -1.0) * phase * h;
      out.push_back(v);
    }
    return out;
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  for (int k = 0; k < d; ++k) {
    Vector v(d);
    for (int j = 0; j < d; ++j) {
      const long long sj = static_cast<long long>(d - j) * (d + j - 1) / 2;
      const long long expo = -static_cast<long long>(k) * j - beta * sj;
      v(j) = norm * omega_pow(d, mod(static_cast<int>(expo % d), d));
    }
    out.push_back(v);
  }
  return out;
}

/// Labels Z, 0, ..., d-1 in canonical order.
inline std::vector<BasisLabel> all_mub_labels(int d) {
  std::vector<BasisLabel> out{BasisLabel::z()};
  for (int b = 0; b < d; ++b) out.push_back(BasisLabel::b(b));
  return out;
}

}  // namespace symqkd
