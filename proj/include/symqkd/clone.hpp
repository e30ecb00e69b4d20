#pragma once

#include "symqkd/source.hpp"
#include "symqkd/states.hpp"

namespace symqkd {

struct CloneFidelities {
  double F_B = 0.0;
  double F_C = 0.0;
};

/**
 * Average fidelities of Bob's copy (factor B) and of Eve's clone (factor C)
 * with the signal Alice's outcome points to, for a purification ordered
 * A, B, C, D with four factors of dimension d.
 *
 * Taking C as Eve's clone is a convention: the purifying system is C (x) D
 * and either factor could play that role.
 */
inline CloneFidelities clone_fidelities(const Purification& psi, const SignalEnsemble& ens) {
  const int d = ens.dim();
  const Eigen::Index rest = static_cast<Eigen::Index>(d) * d * d;
  if (psi.vec.size() != rest * d) throw std::invalid_argument("clone_fidelities: expected four factors of dimension d");
  const SourceState src = build_source(ens);
  if (src.rank_deficient) throw std::invalid_argument("clone_fidelities: ensemble must span the signal space");
  const Povm povm = alice_povm(ens, src);

  // m(rest, a) = <a, rest | Psi>
  const Eigen::Map<const Matrix> m(psi.vec.data(), rest, d);
  CloneFidelities out;
  for (std::size_t x = 0; x < ens.states.size(); ++x) {
    const Matrix sigma = m * povm.elements[x].transpose() * m.adjoint();  // unnormalized state on B C D
    const Matrix rho_b = partial_trace(sigma, d, d * d, Keep::First);
    const Matrix rho_c = partial_trace(partial_trace(sigma, d, d * d, Keep::Second), d, d, Keep::First);
    const Vector& phi = ens.states[x];
    out.F_B += phi.dot(rho_b * phi).real();
    out.F_C += phi.dot(rho_c * phi).real();
  }
  return out;
}

}  // namespace symqkd
