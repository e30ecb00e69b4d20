#pragma once

#include "symqkd/linalg.hpp"
#include "symqkd/protocol.hpp"
#include "symqkd/source.hpp"
#include "symqkd/states.hpp"

#include <string>
#include <vector>

namespace symqkd {

struct JointDistribution {
  RealMatrix table;  // rows: Alice outcome x, cols: Bob outcome y
};

/// p(x, y) = tr{(A_x (x) B_y) rho}. Entries down to -1e-12 are clipped; below
/// -1e-10 the input is rejected.
inline JointDistribution joint_distribution(const Matrix& rho_ab, const Povm& a, const Povm& b) {
  if (rho_ab.rows() != static_cast<Eigen::Index>(a.dim()) * b.dim())
    throw std::invalid_argument("joint_distribution: dimension mismatch");
  JointDistribution jd{RealMatrix(a.size(), b.size())};
  for (std::size_t x = 0; x < a.size(); ++x) {
    const ConditionalState cs = conditional_state_effect(rho_ab, a.elements[x]);
    for (std::size_t y = 0; y < b.size(); ++y) {
      const double v = cs.zero() ? 0.0 : cs.p * (b.elements[y] * cs.state).trace().real();
      if (v < -kEigenTol) throw std::invalid_argument("joint_distribution: negative probability " + std::to_string(v));
      jd.table(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = v < -1e-12 ? 0.0 : std::max(v, 0.0);
    }
  }
  jd.table /= jd.table.sum();
  return jd;
}

inline double mutual_information(const JointDistribution& p) {
  const RealVector px = p.table.rowwise().sum();
  const RealVector py = p.table.colwise().sum().transpose();
  return shannon_entropy(std::span<const double>(px.data(), static_cast<std::size_t>(px.size()))) +
         shannon_entropy(std::span<const double>(py.data(), static_cast<std::size_t>(py.size()))) -
         shannon_entropy(p.table);
}

/// chi = S(rho_AB) - sum_x p(x) S(rho_B^x); valid when every A_x is rank one
/// and Eve holds a purification.
inline double holevo_AB(const Matrix& rho_ab, const Povm& a, double s_ab) {
  if (!a.rank_one()) throw std::invalid_argument("holevo_AB: Alice's POVM must be rank one");
  double cond = 0.0;
  for (const auto& e : a.elements) {
    const ConditionalState cs = conditional_state_effect(rho_ab, e);
    if (!cs.zero()) cond += cs.p * von_neumann_entropy(cs.state);
  }
  return s_ab - cond;
}

inline double holevo_AB(const Matrix& rho_ab, const Povm& a) {
  return holevo_AB(rho_ab, a, von_neumann_entropy(rho_ab));
}

struct BranchRate {
  int label = 0;
  double p = 0.0;
  double I = 0.0;
  double chi = 0.0;
  double r = 0.0;
  double error = 0.0;
  double fidelity = 0.0;
};

struct RateReport {
  std::vector<BranchRate> per_branch;
  double I = 0.0;
  double chi = 0.0;
  double r = 0.0;
  double Q = 0.0;
  double F_B = 0.0;
  std::vector<std::string> warnings;
};

/**
 * Effective key rate of a basis-sifted protocol computed from the full
 * density operator: source replacement, sifting, then I_u and chi_u per
 * branch. The error rate counts Bob outcomes that differ from Alice's within
 * a branch; the fidelity is averaged separately from the conditional states.
 */
inline RateReport sifted_rate(const Matrix& rho_ab, const ProtocolSpec& protocol) {
  const SignalEnsemble ens = protocol.ensemble();
  const SourceState src = build_source(ens);
  const Povm pa = alice_povm(ens, src);
  const Povm pb = protocol.bob_povm();
  const SiftResult sr = sift(rho_ab, pa, pb, protocol.sifting_plan());

  RateReport rep;
  rep.warnings = sr.warnings;
  Matrix cached_rho;
  double cached_s = 0.0;
  for (const auto& br : sr.branches) {
    BranchRate out;
    out.label = br.label;
    out.p = br.p;
    const JointDistribution jd = joint_distribution(br.rho, br.alice, br.bob);
    out.I = mutual_information(jd);
    if (cached_rho.size() == 0 || max_abs(cached_rho - br.rho) > 1e-15) {
      cached_rho = br.rho;
      cached_s = von_neumann_entropy(br.rho);
    }
    out.chi = holevo_AB(br.rho, br.alice, cached_s);
    out.r = out.I - out.chi;
    for (Eigen::Index x = 0; x < jd.table.rows(); ++x)
      for (Eigen::Index y = 0; y < jd.table.cols(); ++y)
        if (x != y) out.error += jd.table(x, y);
    const auto& basis = protocol.bases[static_cast<std::size_t>(br.label)];
    for (std::size_t x = 0; x < br.alice.size(); ++x) {
      const ConditionalState cs = conditional_state_effect(br.rho, br.alice.elements[x]);
      if (cs.zero()) continue;
      out.fidelity += cs.p * basis[x].dot(cs.state * basis[x]).real();
    }
    rep.I += out.p * out.I;
    rep.chi += out.p * out.chi;
    rep.Q += out.p * out.error;
    rep.F_B += out.p * out.fidelity;
    rep.per_branch.push_back(out);
  }
  rep.r = rep.I - rep.chi;
  return rep;
}

inline RateReport sifted_rate(const BellDiagonalState& u, const ProtocolSpec& protocol) {
  return sifted_rate(bell_diag_to_density(u), protocol);
}

}  // namespace symqkd
