#pragma once

#include "symqkd/gpauli.hpp"
#include "symqkd/linalg.hpp"

#include <string>
#include <vector>

namespace symqkd {

/// Density operators are plain complex matrices; validate_density checks the
/// physical invariants where inputs cross an API boundary.
using DensityOperator = Matrix;

inline void validate_density(const Matrix& rho, const char* where) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument(std::string(where) + ": not square");
  if (!is_hermitian(rho, 1e-12)) throw std::invalid_argument(std::string(where) + ": not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-12) throw std::invalid_argument(std::string(where) + ": trace != 1");
  if (jacobi_eigh(rho).values.minCoeff() < -kEigenTol)
    throw std::invalid_argument(std::string(where) + ": not positive semidefinite");
}

/// Probability table u[r][s] over the Bell basis.
struct BellDiagonalState {
  int d = 2;
  RealMatrix u;

  double at(int r, int s) const { return u(mod(r, d), mod(s, d)); }

  void validate() const {
    if (u.rows() != d || u.cols() != d) throw std::invalid_argument("BellDiagonalState: table must be d x d");
    if (u.minCoeff() < -1e-12) throw std::invalid_argument("BellDiagonalState: negative entry");
    if (std::abs(u.sum() - 1.0) > 1e-12) throw std::invalid_argument("BellDiagonalState: entries do not sum to 1");
  }
};

inline BellDiagonalState bell_delta(int d, PauliIndex idx = {}) {
  BellDiagonalState s{d, RealMatrix::Zero(d, d)};
  s.u(mod(idx.r, d), mod(idx.s, d)) = 1.0;
  return s;
}

inline Matrix bell_diag_to_density(const BellDiagonalState& s) {
  const int d = s.d;
  Matrix rho = Matrix::Zero(d * d, d * d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      if (s.u(r, c) != 0.0) rho += s.u(r, c) * projector(bell_vector(d, {r, c}));
  return rho;
}

/// u[r][s] = <U_{r,s}| rho |U_{r,s}>.
inline BellDiagonalState bell_overlaps(const Matrix& rho, int d) {
  BellDiagonalState s{d, RealMatrix(d, d)};
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      const Vector b = bell_vector(d, {r, c});
      s.u(r, c) = b.dot(rho * b).real();
    }
  return s;
}

/// Eigenvalues with the PSD clipping policy: [-1e-10, 0) becomes 0, anything
/// more negative is an error.
inline RealVector clipped_spectrum(const Matrix& rho) {
  RealVector ev = jacobi_eigh(rho).values;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -kEigenTol) throw std::domain_error("negative eigenvalue " + std::to_string(ev(i)));
    ev(i) = std::clamp(ev(i), 0.0, 1.0);
  }
  return ev;
}

inline double von_neumann_entropy(const Matrix& rho) {
  const RealVector ev = clipped_spectrum(rho);
  return shannon_entropy(std::span<const double>(ev.data(), static_cast<std::size_t>(ev.size())));
}

inline double shannon_entropy(const RealMatrix& table) {
  return shannon_entropy(std::span<const double>(table.data(), static_cast<std::size_t>(table.size())));
}

enum class Keep { First, Second };

inline Matrix partial_trace(const Matrix& rho, int m, int n, Keep keep) {
  if (rho.rows() != static_cast<Eigen::Index>(m) * n || rho.cols() != rho.rows())
    throw std::invalid_argument("partial_trace: dimension mismatch");
  if (keep == Keep::First) {
    Matrix out = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < n; ++k) out(i, j) += rho(i * n + k, j * n + k);
    return out;
  }
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < m; ++k) out(i, j) += rho(k * n + i, k * n + j);
  return out;
}

struct ConditionalState {
  double p = 0.0;
  Matrix state;  // empty when the branch has zero probability
  bool zero() const { return state.size() == 0; }
};

inline constexpr double kZeroBranch = 1e-14;

/// Applies Alice's effect `a` to the first factor of a d x d state and returns
/// p = tr{(a (x) 1) rho} together with Bob's normalized conditional state.
inline ConditionalState conditional_state_effect(const Matrix& rho_ab, const Matrix& a) {
  const Eigen::Index da = a.rows();
  const Eigen::Index db = rho_ab.rows() / da;
  if (da * db != rho_ab.rows()) throw std::invalid_argument("conditional_state: dimension mismatch");
  Matrix out = Matrix::Zero(db, db);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < da; ++j) {
      const cplx aji = a(j, i);
      if (aji == 0.0) continue;
      out += aji * rho_ab.block(i * db, j * db, db, db);
    }
  out = 0.5 * (out + out.adjoint());
  const double p = out.trace().real();
  if (p < kZeroBranch) return {p, Matrix()};
  return {p, out / p};
}

inline ConditionalState conditional_state(const Matrix& rho_ab, const Vector& alice_vector) {
  return conditional_state_effect(rho_ab, projector(alice_vector));
}

struct Purification {
  Vector vec;
  int dim_ab = 0;
  int dim_e = 0;

  Matrix reduced_ab() const {
    Eigen::Map<const Matrix> psi(vec.data(), dim_e, dim_ab);  // column major: psi(e, ab)
    return psi.transpose() * psi.conjugate();
  }
};

/// sum_{r,s} sqrt(u_{rs}) |U_{r,s}>_{AB} |U_{r,-s}>_{CD}; factor order A, B, C, D.
inline Purification purify_bell_diagonal(const BellDiagonalState& s) {
  const int d = s.d;
  Vector psi = Vector::Zero(d * d * d * d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      const double w = s.u(r, c);
      if (w <= 0.0) continue;
      psi += std::sqrt(w) * kron(bell_vector(d, {r, c}), bell_vector(d, {r, -c}));
    }
  return {psi, d * d, d * d};
}

}  // namespace symqkd
