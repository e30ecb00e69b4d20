#pragma once

#include "symqkd/gpauli.hpp"
#include "symqkd/keyrate.hpp"
#include "symqkd/protocol.hpp"
#include "symqkd/states.hpp"
#include "symqkd/symmetry.hpp"

#include <Eigen/SVD>

#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace symqkd {

/// Raised when the requested error rate lies outside a family's feasible range.
struct InfeasibleError : std::domain_error {
  using std::domain_error::domain_error;
};

inline std::string range_message(const std::string& what, double q, double lo, double hi) {
  std::ostringstream os;
  os << what << ": Q = " << q << " outside feasible range [" << lo << ", " << hi << "]";
  return os.str();
}

// ---- conditional spectra and closed forms for MUB protocols ----

/// lambda^Z_y = sum_r u[y][r], lambda^beta_y = sum_r u[r][y - beta r].
inline RealVector conditional_spectrum(const BellDiagonalState& s, BasisLabel label) {
  const int d = s.d;
  RealVector lam = RealVector::Zero(d);
  for (int y = 0; y < d; ++y)
    for (int r = 0; r < d; ++r) lam(y) += label.is_z ? s.u(y, r) : s.u(r, mod(y - label.beta * r, d));
  return lam;
}

struct MubRates {
  double Q = 0.0;
  double I = 0.0;
  double chi = 0.0;
  double r = 0.0;
};

inline MubRates mub_rate_closed_form(const BellDiagonalState& s, const std::vector<BasisLabel>& labels) {
  if (labels.empty()) throw std::invalid_argument("mub_rate_closed_form: empty label set");
  const double n = static_cast<double>(labels.size());
  double avg_h = 0.0;
  double avg_l0 = 0.0;
  for (const auto& l : labels) {
    const RealVector lam = conditional_spectrum(s, l);
    avg_h += shannon_entropy(std::span<const double>(lam.data(), static_cast<std::size_t>(lam.size()))) / n;
    avg_l0 += lam(0) / n;
  }
  const double su = shannon_entropy(s.u);
  const double logd = std::log2(static_cast<double>(s.d));
  return {1.0 - avg_l0, logd - avg_h, su - avg_h, logd - su};
}

// ---- attack families ----

/// A named Bell-table entry reported as an attack parameter (a, b or c).
struct Probe {
  std::string name;
  int r = 0;
  int s = 0;
};

/**
 * Affine one-parameter set of Bell tables u(t) = base + t * dir, t in [lo, hi].
 * With n_free = 0 the direction is ignored and the only point is t = 0.
 */
struct AttackFamily {
  int d = 2;
  std::string name;
  double Q = 0.0;
  RealMatrix base;
  RealMatrix dir;
  int n_free = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<Probe> probes;

  BellDiagonalState at(double t) const {
    BellDiagonalState s{d, n_free == 0 ? base : RealMatrix(base + t * dir)};
    // Clamp round-off at active constraints so the table stays a distribution.
    for (Eigen::Index i = 0; i < s.u.size(); ++i)
      if (s.u(i) < 0.0 && s.u(i) > -1e-13) s.u(i) = 0.0;
    return s;
  }

  std::vector<double> params(double t) const {
    const BellDiagonalState s = at(t);
    std::vector<double> out;
    for (const auto& p : probes) out.push_back(s.at(p.r, p.s));
    return out;
  }
};

inline void check_q(double q, double lo, double hi, const std::string& what) {
  if (!(q >= lo - 1e-15 && q <= hi + 1e-15)) throw InfeasibleError(range_message(what, q, lo, hi));
}

/// Interval of t keeping base + t dir entrywise nonnegative.
inline std::pair<double, double> nonnegative_interval(const RealMatrix& base, const RealMatrix& dir) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    const double b = base(i);
    const double v = dir(i);
    if (std::abs(v) < 1e-14) {
      if (b < -1e-12) return {1.0, 0.0};
      continue;
    }
    const double t = -b / v;
    if (v > 0) lo = std::max(lo, t);
    else hi = std::min(hi, t);
  }
  return {lo, hi};
}

/// Two MUBs {Z, 0}: a on (0,0), b on (r,0) and (0,r), c on r,s >= 1. The free
/// parameter is c.
inline AttackFamily family_2mubs(int d, double q) {
  check_q(q, 0.0, 1.0, "family_2mubs");
  const double m = d - 1;
  AttackFamily f{d, "2mubs", q, RealMatrix::Zero(d, d), RealMatrix::Zero(d, d), 1, 0.0, 0.0,
                 {{"a", 0, 0}, {"b", 1, 0}, {"c", 1, 1}}};
  for (int r = 0; r < d; ++r)
    for (int s = 0; s < d; ++s) {
      if (r == 0 && s == 0) {
        f.base(r, s) = 1.0 - 2.0 * q;
        f.dir(r, s) = m * m;
      } else if (r == 0 || s == 0) {
        f.base(r, s) = q / m;
        f.dir(r, s) = -m;
      } else {
        f.dir(r, s) = 1.0;
      }
    }
  f.lo = std::max(0.0, (2.0 * q - 1.0) / (m * m));
  f.hi = q / (m * m);
  return f;
}

/// d+1 MUBs: a on (0,0), b everywhere else, fixed by Q.
inline AttackFamily family_d1mubs(int d, double q) {
  check_q(q, 0.0, d / (d + 1.0), "family_d1mubs");
  AttackFamily f{d, "d1mubs", q, RealMatrix::Constant(d, d, q / (d * (d - 1.0))), RealMatrix::Zero(d, d), 0, 0.0, 0.0,
                 {{"a", 0, 0}, {"b", 1, 0}}};
  f.base(0, 0) = std::max(0.0, 1.0 - (d + 1.0) * q / d);
  return f;
}

/// d MUBs {0, ..., d-1}: a on (0,0), b on r >= 1 (all s), c on (0, s >= 1).
/// The free parameter is c.
inline AttackFamily family_dmubs(int d, double q) {
  check_q(q, 0.0, 1.0, "family_dmubs");
  const double m = d - 1;
  AttackFamily f{d, "dmubs", q, RealMatrix::Zero(d, d), RealMatrix::Zero(d, d), 1, 0.0, 0.0,
                 {{"a", 0, 0}, {"b", 1, 0}, {"c", 0, 1}}};
  for (int r = 0; r < d; ++r)
    for (int s = 0; s < d; ++s) {
      if (r == 0 && s == 0) {
        f.base(r, s) = 1.0 - d * q / m;
        f.dir(r, s) = 1.0;
      } else if (r == 0) {
        f.dir(r, s) = 1.0;
      } else {
        f.base(r, s) = q / (m * m);
        f.dir(r, s) = -1.0 / m;
      }
    }
  f.lo = std::max(0.0, d * q / m - 1.0);
  f.hi = q / m;
  return f;
}

inline AttackFamily scheme_family(Scheme s, int d, double q) {
  switch (s) {
    case Scheme::TwoMubs: return family_2mubs(d, q);
    case Scheme::DPlusOneMubs: return family_d1mubs(d, q);
    case Scheme::DMubs: return family_dmubs(d, q);
  }
  throw std::invalid_argument("scheme_family: unknown scheme");
}

inline double xlog2(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

struct Optimal2Mubs {
  double a, b, c, r_min;
};

/// Optimal attack against two MUBs. The third class uses c = Q^2/(d-1)^2: with
/// (d-1)^2 entries that is the only value compatible with normalization and
/// with the rate log2 d + 2(1-Q) log2(1-Q) + 2Q log2(Q/(d-1)). At d = 2 the
/// distinction disappears.
inline Optimal2Mubs optimal_2mubs(int d, double q) {
  const double m = d - 1;
  check_q(q, 0.0, m / d, "optimal_2mubs");
  const double r = std::log2(static_cast<double>(d)) + 2.0 * xlog2(1.0 - q) + (q > 0.0 ? 2.0 * q * std::log2(q / m) : 0.0);
  return {(1.0 - q) * (1.0 - q), q * (1.0 - q) / m, q * q / (m * m), r};
}

struct OptimalD1Mubs {
  double a, b, r_min;
};

inline OptimalD1Mubs optimal_d1mubs(int d, double q) {
  check_q(q, 0.0, d / (d + 1.0), "optimal_d1mubs");
  const double w = (d + 1.0) * q / d;
  const double r = std::log2(static_cast<double>(d)) + xlog2(1.0 - w) + (q > 0.0 ? w * std::log2(q / (d * (d - 1.0))) : 0.0);
  return {1.0 - w, q / (d * (d - 1.0)), r};
}

// ---- families from a symmetry group ----

/// Q = tr(E rho) for a basis-sifted protocol with maximally mixed source.
inline Matrix error_operator(const ProtocolSpec& p) {
  const int d = p.d;
  Matrix e = Matrix::Zero(d * d, d * d);
  for (const auto& basis : p.bases)
    for (int k = 0; k < d; ++k)
      for (int kp = 0; kp < d; ++kp)
        if (k != kp) e += kron(projector(basis[k].conjugate()), projector(basis[kp]));
  return e / static_cast<double>(p.num_bases());
}

/**
 * Attack family spanned by the commutant of a symmetry group, cut down by
 * normalization and the error-rate constraint. The commutant must lie inside
 * the Bell-diagonal algebra and leave at most one free direction. The free
 * parameter is the weight on the probe c = u(1,1) when that entry moves.
 */
inline AttackFamily family_from_group(const ProtocolSpec& protocol, const GroupRep& group, double q,
                                      std::vector<Probe> probes = {{"a", 0, 0}, {"b", 1, 0}, {"c", 1, 1}}) {
  if (group.dim != protocol.d) throw std::invalid_argument("family_from_group: group and protocol dimensions differ");
  const int d = protocol.d;
  const CommutantBasis cb = commutant_basis(group);
  const Matrix e = error_operator(protocol);
  const auto n = static_cast<Eigen::Index>(cb.size());
  RealMatrix m(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(0, i) = cb.ops[static_cast<std::size_t>(i)].trace().real();
    m(1, i) = (e * cb.ops[static_cast<std::size_t>(i)]).trace().real();
  }
  Eigen::JacobiSVD<RealMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(1e-10);
  if (svd.rank() < 2) throw std::runtime_error("family_from_group: error rate is not independent of normalization");
  RealVector rhs(2);
  rhs << 1.0, q;
  const RealVector x0 = svd.solve(rhs);
  const Eigen::Index n_free = n - svd.rank();
  if (n_free > 1) throw std::runtime_error("family_from_group: more than one free parameter");

  auto to_bell = [&](const RealVector& x) {
    Matrix rho = Matrix::Zero(d * d, d * d);
    for (Eigen::Index i = 0; i < n; ++i) rho += x(i) * cb.ops[static_cast<std::size_t>(i)];
    const BellDiagonalState b = bell_overlaps(rho, d);
    if (max_abs(rho - bell_diag_to_density(b)) > 1e-9)
      throw std::runtime_error("family_from_group: commutant is not Bell-diagonal");
    return b.u;
  };

  AttackFamily f{d, protocol.name, q, to_bell(x0), RealMatrix::Zero(d, d), static_cast<int>(n_free), 0.0, 0.0,
                 std::move(probes)};
  if (n_free == 1) {
    f.dir = to_bell(svd.matrixV().col(n - 1));
    const Probe& c = f.probes.back();
    double scale = f.dir(mod(c.r, d), mod(c.s, d));
    if (std::abs(scale) < 1e-9) {
      Eigen::Index row = 0, col = 0;
      f.dir.cwiseAbs().maxCoeff(&row, &col);
      scale = f.dir(row, col);
    }
    f.dir /= scale;
    f.base -= f.base(mod(c.r, d), mod(c.s, d)) * f.dir;
    const auto [lo, hi] = nonnegative_interval(f.base, f.dir);
    if (lo > hi + 1e-12) throw InfeasibleError(range_message(f.name, q, lo, hi));
    f.lo = lo;
    f.hi = std::max(lo, hi);
  } else if (f.base.minCoeff() < -1e-12) {
    throw InfeasibleError(f.name + ": Q = " + std::to_string(q) + " gives a negative Bell weight");
  }
  return f;
}

inline GroupRep qubit_symmetry_group(QubitKind kind, int n = 2) {
  switch (kind) {
    case QubitKind::SixState:
    case QubitKind::Cube: return octahedral_group();
    case QubitKind::Icosahedron: return icosahedral_group();
    case QubitKind::Dodecahedron: return dodecahedral_group();
    case QubitKind::Bb84: return dihedral_group(2);
    case QubitKind::Ngon: return dihedral_group(n);
    case QubitKind::Cuboid: return cuboid_group();
  }
  throw std::invalid_argument("qubit_symmetry_group: unknown kind");
}

inline bool octahedral_class(QubitKind kind) {
  return kind == QubitKind::SixState || kind == QubitKind::Cube || kind == QubitKind::Icosahedron ||
         kind == QubitKind::Dodecahedron;
}

inline AttackFamily qubit_family(QubitKind kind, double q, int n = 2, double theta = std::numbers::pi / 2) {
  std::vector<Probe> probes{{"a", 0, 0}, {"b", 1, 0}};
  if (!octahedral_class(kind)) probes.push_back({"c", 1, 1});
  return family_from_group(qubit_protocol(kind, n, theta), qubit_symmetry_group(kind, n), q, std::move(probes));
}

/// Error rate as a linear function of the symmetric-attack weights. b is the
/// weight of each of the Bell states (1,0) and (0,1); c the weight of (1,1).
inline double qubit_error_functional(QubitKind kind, double b, double c, double theta = std::numbers::pi / 2) {
  if (octahedral_class(kind)) return 2.0 * b;
  if (kind == QubitKind::Cuboid) return 0.5 * (3.0 * b + c + (b - c) * std::cos(2.0 * theta));
  return b + c;
}

}  // namespace symqkd
