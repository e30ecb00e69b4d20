#pragma once

#include "symqkd/linalg.hpp"
#include "symqkd/states.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace symqkd {

struct SignalEnsemble {
  std::vector<Vector> states;
  std::vector<double> probs;

  int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }

  void validate() const {
    if (states.empty() || states.size() != probs.size())
      throw std::invalid_argument("SignalEnsemble: states and probs must be non-empty and equal length");
    double total = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (probs[i] < 0.0) throw std::invalid_argument("SignalEnsemble: negative probability");
      if (std::abs(states[i].norm() - 1.0) > 1e-12) throw std::invalid_argument("SignalEnsemble: state not normalized");
      if (states[i].size() != states.front().size()) throw std::invalid_argument("SignalEnsemble: mixed dimensions");
      total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("SignalEnsemble: probabilities do not sum to 1");
  }

  Matrix average() const {
    Matrix rho = Matrix::Zero(dim(), dim());
    for (std::size_t i = 0; i < states.size(); ++i) rho += probs[i] * projector(states[i]);
    return rho;
  }
};

/**
 * Compressed source |Phi> = sum_i sqrt(kappa_i) |i>_A |b_i>_B.
 *
 * Alice's register uses Schmidt coordinates, so its dimension equals the rank
 * of rho_A. Inside a degenerate eigenspace the basis is fixed by projecting the
 * computational basis vectors in order, which gives the computational basis
 * itself whenever rho_A is proportional to the identity.
 */
struct SourceState {
  RealVector kappa;   // descending, strictly positive
  Matrix basis_b;     // d x rank, column i is |b_i>
  Matrix rho_a;       // sum_x p(x) |phi_x><phi_x| in signal coordinates
  bool rank_deficient = false;

  int rank() const { return static_cast<int>(kappa.size()); }
  RealVector schmidt_coeffs() const { return kappa.cwiseSqrt(); }

  /// |Phi> on A (x) B with A of dimension rank and B of dimension d.
  Vector vector() const {
    const auto d = basis_b.rows();
    Vector phi = Vector::Zero(rank() * d);
    for (int i = 0; i < rank(); ++i) phi.segment(i * d, d) = std::sqrt(kappa(i)) * basis_b.col(i);
    return phi;
  }

  /// Alice's reduced state, diagonal in her own coordinates.
  Matrix alice_state() const { return kappa.cast<cplx>().asDiagonal(); }

  /// Conjugate of |phi> in Schmidt coordinates.
  Vector conjugate(const Vector& phi) const { return (basis_b.adjoint() * phi).conjugate(); }
};

namespace detail {

// Orthonormal basis of the span of `block`, built by projecting e_0, e_1, ...
// in order and keeping whatever survives Gram-Schmidt.
inline Matrix canonical_span_basis(const Matrix& block) {
  const auto d = block.rows();
  const auto k = block.cols();
  const Matrix proj = block * block.adjoint();
  Matrix out(d, k);
  Eigen::Index found = 0;
  for (Eigen::Index j = 0; j < d && found < k; ++j) {
    Vector v = proj.col(j);
    for (Eigen::Index m = 0; m < found; ++m) v -= out.col(m).dot(v) * out.col(m);
    for (Eigen::Index m = 0; m < found; ++m) v -= out.col(m).dot(v) * out.col(m);
    const double n = v.norm();
    if (n < 1e-8) continue;
    out.col(found++) = v / n;
  }
  if (found != k) throw std::runtime_error("canonical_span_basis: failed to span eigenspace");
  return out;
}

}  // namespace detail

inline SourceState build_source(const SignalEnsemble& ens) {
  ens.validate();
  SourceState src;
  src.rho_a = ens.average();
  const int d = ens.dim();
  const auto eig = jacobi_eigh(src.rho_a);

  // Walk eigenvalues from largest to smallest, grouping near-equal ones.
  std::vector<double> kappa;
  std::vector<Vector> cols;
  int i = d - 1;
  while (i >= 0) {
    const double lead = eig.values(i);
    if (lead <= kRankFloor) break;
    int j = i;
    while (j - 1 >= 0 && std::abs(eig.values(j - 1) - lead) < 1e-10) --j;
    const int mult = i - j + 1;
    const Matrix span = detail::canonical_span_basis(eig.vectors.middleCols(j, mult));
    for (int m = 0; m < mult; ++m) {
      kappa.push_back(eig.values(j + m));
      cols.push_back(span.col(m));
    }
    i = j - 1;
  }
  src.rank_deficient = static_cast<int>(kappa.size()) < d;
  src.kappa = Eigen::Map<RealVector>(kappa.data(), static_cast<Eigen::Index>(kappa.size()));
  src.basis_b = Matrix(d, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) src.basis_b.col(static_cast<Eigen::Index>(c)) = cols[c];
  return src;
}

struct Povm {
  std::vector<Matrix> elements;

  std::size_t size() const { return elements.size(); }
  int dim() const { return elements.empty() ? 0 : static_cast<int>(elements.front().rows()); }

  Matrix total() const {
    Matrix s = Matrix::Zero(dim(), dim());
    for (const auto& e : elements) s += e;
    return s;
  }

  bool rank_one(double tol = kEigenTol) const {
    for (const auto& e : elements) {
      const RealVector ev = jacobi_eigh(e).values;
      int nonzero = 0;
      for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > tol) ++nonzero;
      if (nonzero > 1) return false;
    }
    return true;
  }
};

/// A_x = p(x) rho^{-1/2} |phi_x*><phi_x*| rho^{-1/2} in Alice's Schmidt
/// coordinates. On a rank-deficient source the operators live on the support.
inline Povm alice_povm(const SignalEnsemble& ens, const SourceState& src) {
  Povm povm;
  const RealVector inv_sqrt = src.kappa.cwiseSqrt().cwiseInverse();
  for (std::size_t x = 0; x < ens.states.size(); ++x) {
    const Vector v = inv_sqrt.cast<cplx>().asDiagonal() * src.conjugate(ens.states[x]);
    povm.elements.push_back(ens.probs[x] * projector(v));
  }
  return povm;
}

struct SiftingPlan {
  std::vector<int> alice_label;  // announcement label of each Alice element
  std::vector<int> bob_label;    // announcement label of each Bob element
  std::set<int> kept;
};

struct SiftBranch {
  int label = 0;
  double p_tilde = 0.0;  // probability that both announce `label`
  double p = 0.0;        // p_tilde normalized over kept branches
  Matrix rho;
  Povm alice;
  Povm bob;
  std::vector<std::size_t> alice_index;  // original element indices
  std::vector<std::size_t> bob_index;
};

struct SiftResult {
  std::vector<SiftBranch> branches;
  double kept_weight = 0.0;
  double discarded_weight = 0.0;
  std::vector<std::string> warnings;
};

inline SiftResult sift(const Matrix& rho_ab, const Povm& povm_a, const Povm& povm_b, const SiftingPlan& plan) {
  if (plan.alice_label.size() != povm_a.size() || plan.bob_label.size() != povm_b.size())
    throw std::invalid_argument("sift: every POVM element needs exactly one label");
  const int da = povm_a.dim();
  const int db = povm_b.dim();
  if (rho_ab.rows() != da * db) throw std::invalid_argument("sift: state dimension mismatch");

  SiftResult res;
  for (int label : plan.kept) {
    SiftBranch br;
    br.label = label;
    Matrix sa = Matrix::Zero(da, da);
    Matrix sb = Matrix::Zero(db, db);
    for (std::size_t x = 0; x < povm_a.size(); ++x)
      if (plan.alice_label[x] == label) {
        sa += povm_a.elements[x];
        br.alice_index.push_back(x);
      }
    for (std::size_t y = 0; y < povm_b.size(); ++y)
      if (plan.bob_label[y] == label) {
        sb += povm_b.elements[y];
        br.bob_index.push_back(y);
      }
    const Matrix k = sqrt_psd(sa);
    const Matrix l = sqrt_psd(sb);
    const Matrix kl = kron(k, l);
    const Matrix filtered = kl * rho_ab * kl.adjoint();
    br.p_tilde = filtered.trace().real();
    if (br.p_tilde < kZeroBranch) {
      res.warnings.push_back("branch " + std::to_string(label) + " dropped: probability " + std::to_string(br.p_tilde));
      continue;
    }
    br.rho = filtered / br.p_tilde;
    br.rho = 0.5 * (br.rho + br.rho.adjoint());
    const Matrix kinv = pinv_sqrt_psd(sa);
    const Matrix linv = pinv_sqrt_psd(sb);
    for (auto x : br.alice_index) br.alice.elements.push_back(kinv * povm_a.elements[x] * kinv.adjoint());
    for (auto y : br.bob_index) br.bob.elements.push_back(linv * povm_b.elements[y] * linv.adjoint());
    res.kept_weight += br.p_tilde;
    res.branches.push_back(std::move(br));
  }
  for (auto& br : res.branches) br.p = br.p_tilde / res.kept_weight;
  res.discarded_weight = 1.0 - res.kept_weight;
  return res;
}

struct InvarianceReport {
  bool pass = true;
  std::vector<std::string> violations;
};

/// Checks that conj(U) A_x U^T permutes Alice's POVM and fixes her reduced
/// state for every group element, with A-space coordinates as in build_source.
template <class Group>
InvarianceReport check_gstar_invariance(const SignalEnsemble& ens, const Group& group, double tol = 1e-10) {
  InvarianceReport rep;
  const SourceState src = build_source(ens);
  if (src.rank_deficient || group.dim != ens.dim()) {
    rep.pass = false;
    rep.violations.push_back("source rank or group dimension mismatch");
    return rep;
  }
  const Povm povm = alice_povm(ens, src);
  const Matrix rho = src.alice_state();
  for (std::size_t g = 0; g < group.elements.size(); ++g) {
    const Matrix uc = group.elements[g].conjugate();
    const Matrix ut = group.elements[g].transpose();
    if (max_abs(uc * rho * ut - rho) > tol) {
      rep.pass = false;
      rep.violations.push_back("element " + std::to_string(g) + " moves rho_A");
    }
    for (std::size_t x = 0; x < povm.size(); ++x) {
      const Matrix img = uc * povm.elements[x] * ut;
      bool found = false;
      for (const auto& e : povm.elements)
        if (max_abs(img - e) < tol) {
          found = true;
          break;
        }
      if (!found) {
        rep.pass = false;
        rep.violations.push_back("element " + std::to_string(g) + " maps A_" + std::to_string(x) + " outside the POVM");
      }
    }
  }
  return rep;
}

}  // namespace symqkd
