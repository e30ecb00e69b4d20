#pragma once

#include "symqkd/gpauli.hpp"
#include "symqkd/linalg.hpp"
#include "symqkd/source.hpp"
#include "symqkd/states.hpp"

#include <array>
#include <deque>
#include <numbers>
#include <string>
#include <vector>

namespace symqkd {

/// Finite set of unitaries closed under multiplication up to a global phase.
struct GroupRep {
  int dim = 0;
  std::vector<Matrix> elements;
  std::string name;

  std::size_t order() const { return elements.size(); }
};

inline constexpr std::size_t kMaxGroupOrder = 10000;

inline bool contains_up_to_phase(const std::vector<Matrix>& set, const Matrix& u, double tol = 1e-10) {
  const double dim = static_cast<double>(u.rows());
  for (const auto& m : set)
    if (std::abs(std::abs(hs_inner(m, u)) - dim) < tol * dim) return true;
  return false;
}

/// Closure of a generating set, identifying elements that differ by a phase.
inline GroupRep close_group(const std::vector<Matrix>& generators, std::string name) {
  if (generators.empty()) throw std::invalid_argument("close_group: no generators");
  const auto dim = generators.front().rows();
  GroupRep g{static_cast<int>(dim), {Matrix::Identity(dim, dim)}, std::move(name)};
  std::deque<std::size_t> frontier{0};
  while (!frontier.empty()) {
    const Matrix cur = g.elements[frontier.front()];
    frontier.pop_front();
    for (const auto& gen : generators) {
      Matrix next = gen * cur;
      if (contains_up_to_phase(g.elements, next)) continue;
      g.elements.push_back(std::move(next));
      frontier.push_back(g.elements.size() - 1);
      if (g.elements.size() > kMaxGroupOrder) throw std::runtime_error("close_group: group exceeds 10000 elements");
    }
  }
  return g;
}

inline GroupRep pauli_group(int d) {
  GroupRep g{d, {}, "pauli(" + std::to_string(d) + ")"};
  for (int r = 0; r < d; ++r)
    for (int s = 0; s < d; ++s) g.elements.push_back(pauli_matrix(d, {r, s}));
  return g;
}

using Axis = std::array<double, 3>;

/// Spin-1/2 rotation cos(phi/2) 1 - i sin(phi/2) n.sigma.
inline Matrix spin_half_rotation(Axis n, double phi) {
  const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  if (len == 0.0) throw std::invalid_argument("spin_half_rotation: zero axis");
  for (auto& x : n) x /= len;
  const cplx i(0.0, 1.0);
  const double c = std::cos(phi / 2.0);
  const double s = std::sin(phi / 2.0);
  Matrix u(2, 2);
  u << c - i * s * n[2], -i * s * cplx(n[0], -n[1]),
       -i * s * cplx(n[0], n[1]), c + i * s * n[2];
  return u;
}

inline GroupRep octahedral_group() {
  constexpr double pi = std::numbers::pi;
  return close_group({spin_half_rotation({0, 0, 1}, pi / 2), spin_half_rotation({1, 1, 1}, 2 * pi / 3)}, "octahedral");
}

/// Rotation group of the icosahedron with vertices (0, ±1, ±phi) and cyclic
/// permutations. Passing {0, phi, 1} as the five-fold axis gives the mirror
/// orientation, which is the one that preserves the dodecahedron
/// (±1, ±1, ±1), (0, ±1/phi, ±phi).
inline GroupRep icosahedral_group(Axis five_fold = {0.0, 1.0, std::numbers::phi}) {
  constexpr double pi = std::numbers::pi;
  return close_group({spin_half_rotation(five_fold, 2 * pi / 5), spin_half_rotation({1, 1, 1}, 2 * pi / 3)},
                     "icosahedral");
}

inline GroupRep dodecahedral_group() {
  GroupRep g = icosahedral_group({0.0, std::numbers::phi, 1.0});
  g.name = "icosahedral-dual";
  return g;
}

/// Symmetry group of the regular 2n-gon in the xz plane: rotations about the
/// y axis by multiples of pi/n plus half turns about in-plane axes. Order 4n
/// up to phase.
inline GroupRep dihedral_group(int n) {
  if (n < 2) throw std::invalid_argument("dihedral_group: n must be >= 2");
  constexpr double pi = std::numbers::pi;
  return close_group({spin_half_rotation({0, 1, 0}, pi / n), spin_half_rotation({0, 0, 1}, pi)},
                     "dihedral(" + std::to_string(n) + ")");
}

/// Symmetry group of the cuboid vertex set (±s, ±c, 0), (0, ±c, ±s).
inline GroupRep cuboid_group() {
  GroupRep g = dihedral_group(2);
  g.name = "cuboid";
  return g;
}

/// Name lookup: octahedral, icosahedral, icosahedral-dual, dihedral (with n),
/// cuboid, pauli (with n = d).
inline GroupRep point_group(const std::string& name, int n = 2) {
  if (name == "octahedral") return octahedral_group();
  if (name == "icosahedral") return icosahedral_group();
  if (name == "icosahedral-dual") return dodecahedral_group();
  if (name == "dihedral") return dihedral_group(n);
  if (name == "cuboid") return cuboid_group();
  if (name == "pauli") return pauli_group(n);
  throw std::invalid_argument("unknown group '" + name + "'");
}

/// conj(U) (x) U for every element.
inline std::vector<Matrix> twirl_operators(const GroupRep& g) {
  std::vector<Matrix> out;
  out.reserve(g.order());
  for (const auto& u : g.elements) out.push_back(kron(Matrix(u.conjugate()), u));
  return out;
}

inline Matrix twirl(const Matrix& rho, const GroupRep& g) {
  const auto ops = twirl_operators(g);
  Matrix acc = Matrix::Zero(rho.rows(), rho.cols());
  for (const auto& w : ops) acc += w * rho * w.adjoint();
  return acc / static_cast<double>(ops.size());
}

/// Hilbert-Schmidt orthonormal Hermitian basis of the commutant of {conj(U) (x) U}.
struct CommutantBasis {
  int dim = 0;  // dimension of the underlying space (d^2)
  std::vector<Matrix> ops;

  std::size_t size() const { return ops.size(); }

  /// Orthogonal projector on operator space, acting on column-major vec(M).
  Matrix projector() const {
    const Eigen::Index n = static_cast<Eigen::Index>(dim) * dim;
    Matrix p = Matrix::Zero(n, n);
    for (const auto& c : ops) {
      const Eigen::Map<const Vector> v(c.data(), n);
      p += v * v.adjoint();
    }
    return p;
  }
};

/**
 * Twirls every Hermitian matrix unit and orthonormalizes what survives.
 *
 * The twirl of E_ij is (1/|G|) sum_g w_i w_j^dagger with w_i the i-th column
 * of conj(U_g) (x) U_g, so no full matrix products are needed.
 */
inline CommutantBasis commutant_basis(const GroupRep& g, double threshold = 1e-9) {
  const auto ops = twirl_operators(g);
  const Eigen::Index n = ops.front().rows();
  const double inv = 1.0 / static_cast<double>(ops.size());
  std::vector<Matrix> cols(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Matrix c(n, static_cast<Eigen::Index>(ops.size()));
    for (std::size_t k = 0; k < ops.size(); ++k) c.col(static_cast<Eigen::Index>(k)) = ops[k].col(i);
    cols[static_cast<std::size_t>(i)] = std::move(c);
  }

  CommutantBasis basis{static_cast<int>(n), {}};
  std::vector<Vector> vecs;
  auto absorb = [&](Matrix m) {
    Eigen::Map<Vector> v(m.data(), n * n);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : vecs) v -= q.dot(v) * q;
    const double len = v.norm();
    if (len < threshold) return;
    v /= len;
    m = 0.5 * (m + m.adjoint());
    vecs.emplace_back(Eigen::Map<Vector>(m.data(), n * n));
    basis.ops.push_back(std::move(m));
  };

  const cplx i_unit(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const Matrix t = inv * cols[static_cast<std::size_t>(i)] * cols[static_cast<std::size_t>(j)].adjoint();
      absorb(0.5 * (t + t.adjoint()));
      if (j != i) absorb(0.5 * i_unit * (t - t.adjoint()));
    }
  return basis;
}

inline bool commutant_equal(const CommutantBasis& a, const CommutantBasis& b, double tol = 1e-9) {
  if (a.dim != b.dim || a.size() != b.size()) return false;
  return max_abs(a.projector() - b.projector()) < tol;
}

inline bool commutant_equal(const GroupRep& g1, const GroupRep& g2, double tol = 1e-9) {
  if (g1.dim != g2.dim) return false;
  return commutant_equal(commutant_basis(g1), commutant_basis(g2), tol);
}

/// (conj U (x) U (x) U (x) conj U) |Psi> = |Psi> for all elements.
inline InvarianceReport check_strong_covariance(const Purification& psi, const GroupRep& g, double tol = 1e-10) {
  InvarianceReport rep;
  const Eigen::Index expect = static_cast<Eigen::Index>(g.dim) * g.dim * g.dim * g.dim;
  if (psi.vec.size() != expect) {
    rep.pass = false;
    rep.violations.push_back("purification is not on four factors of the group dimension");
    return rep;
  }
  for (std::size_t k = 0; k < g.order(); ++k) {
    const Matrix& u = g.elements[k];
    const Matrix uc = u.conjugate();
    const Matrix w = kron(kron(uc, u), kron(u, uc));
    const double err = (w * psi.vec - psi.vec).cwiseAbs().maxCoeff();
    if (err > tol) {
      rep.pass = false;
      rep.violations.push_back("element " + std::to_string(k) + " deviation " + std::to_string(err));
    }
  }
  return rep;
}

/// Closure and inverse-closure up to phase.
inline bool is_closed(const GroupRep& g, double tol = 1e-10) {
  for (const auto& a : g.elements) {
    if (!contains_up_to_phase(g.elements, a.adjoint(), tol)) return false;
    for (const auto& b : g.elements)
      if (!contains_up_to_phase(g.elements, a * b, tol)) return false;
  }
  return contains_up_to_phase(g.elements, Matrix::Identity(g.dim, g.dim), tol);
}

}  // namespace symqkd
