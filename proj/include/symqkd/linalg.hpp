#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace symqkd {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kStructuralTol = 1e-12;
inline constexpr double kEigenTol = 1e-10;

/// Eigenvalues in ascending order; columns of `vectors` are the matching
/// orthonormal eigenvectors.
struct HermitianEigen {
  RealVector values;
  Matrix vectors;
};

/**
 * Cyclic Jacobi diagonalization of a Hermitian matrix.
 *
 * Each rotation first removes the phase of the pivot (p, q) with a diagonal
 * unitary and then applies the real symmetric Schur rotation. Sweeps stop
 * once the off-diagonal Frobenius norm drops below `tol`.
 */
inline HermitianEigen jacobi_eigh(const Matrix& h, double tol = 1e-13,
                                  int max_sweeps = 100) {
  const Eigen::Index n = h.rows();
  if (h.cols() != n) throw std::invalid_argument("jacobi_eigh: matrix not square");
  Matrix a = 0.5 * (h + h.adjoint());
  Matrix v = Matrix::Identity(n, n);

  auto off_norm = [&]() {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < max_sweeps && off_norm() >= tol; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag < 1e-300) continue;
        const cplx phase = apq / mag;  // e^{i phi}
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // J = diag(1, conj(phase)) * [[c, s], [-s, c]]
        const cplx jpp = c;
        const cplx jpq = s;
        const cplx jqp = -s * std::conj(phase);
        const cplx jqq = c * std::conj(phase);
        for (Eigen::Index k = 0; k < n; ++k) {
          const cplx akp = a(k, p);
          const cplx akq = a(k, q);
          a(k, p) = akp * jpp + akq * jqp;
          a(k, q) = akp * jpq + akq * jqq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const cplx apk = a(p, k);
          const cplx aqk = a(q, k);
          a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
          a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (Eigen::Index k = 0; k < n; ++k) {
          const cplx vkp = v(k, p);
          const cplx vkq = v(k, q);
          v(k, p) = vkp * jpp + vkq * jqp;
          v(k, q) = vkp * jpq + vkq * jqq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return a(x, x).real() < a(y, y).real();
  });
  HermitianEigen out{RealVector(n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto src = order[static_cast<std::size_t>(i)];
    out.values(i) = a(src, src).real();
    out.vectors.col(i) = v.col(src);
  }
  return out;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline Matrix projector(const Vector& v) { return v * v.adjoint(); }

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& m, double tol = kStructuralTol) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) < tol;
}

/// Applies f to the spectrum of a Hermitian matrix.
inline Matrix hermitian_function(const Matrix& h, const std::function<double(double)>& f) {
  const auto eig = jacobi_eigh(h);
  RealVector fv(eig.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = f(eig.values(i));
  return eig.vectors * fv.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
}

inline constexpr double kRankFloor = 1e-12;

inline Matrix sqrt_psd(const Matrix& h) {
  return hermitian_function(h, [](double x) { return x > kRankFloor ? std::sqrt(x) : 0.0; });
}

/// Inverse square root on the support; eigenvalues at or below the floor map to 0.
inline Matrix pinv_sqrt_psd(const Matrix& h) {
  return hermitian_function(h, [](double x) { return x > kRankFloor ? 1.0 / std::sqrt(x) : 0.0; });
}

/// Shannon entropy in bits; 0 log 0 := 0.
inline double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log2(x);
  return h;
}

inline double binary_entropy(double q) {
  const double p[2] = {q, 1.0 - q};
  return shannon_entropy(p);
}

/// Hilbert-Schmidt inner product tr(A^dagger B).
inline cplx hs_inner(const Matrix& a, const Matrix& b) { return (a.adjoint() * b).trace(); }

/// True when a and b agree up to a global phase.
inline bool equal_up_to_phase(const Matrix& a, const Matrix& b, double tol) {
  const cplx ov = hs_inner(a, b);
  if (std::abs(ov) < 1e-300) return max_abs(a) < tol && max_abs(b) < tol;
  const cplx phase = ov / std::abs(ov);
  return max_abs(a * phase - b) < tol;
}

inline bool equal_up_to_phase(const Vector& a, const Vector& b, double tol) {
  const cplx ov = a.dot(b);
  if (std::abs(ov) < 1e-300) return a.norm() < tol && b.norm() < tol;
  const cplx phase = ov / std::abs(ov);
  return (a * phase - b).cwiseAbs().maxCoeff() < tol;
}

}  // namespace symqkd
