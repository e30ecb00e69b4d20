#pragma once

#include "symqkd/families.hpp"
#include "symqkd/keyrate.hpp"
#include "symqkd/protocol.hpp"
#include "symqkd/random.hpp"
#include "symqkd/symmetry.hpp"

#include <functional>
#include <string>
#include <vector>

namespace symqkd {

/// Pass/fail tally of one named property suite.
struct SuiteResult {
  explicit SuiteResult(std::string n) : name(std::move(n)) {}

  std::string name;
  int passed = 0;
  int failed = 0;
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (ok) {
      ++passed;
    } else {
      ++failed;
      if (failures.size() < 20) failures.push_back(what);
    }
  }
  bool ok() const { return failed == 0; }
};

inline constexpr int kPropertyInstances = 200;

inline SuiteResult verify_gpauli() {
  SuiteResult s{"gpauli"};
  for (int d : {2, 3, 5, 7}) {
    const std::string tag = "d=" + std::to_string(d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) {
        const Matrix u = pauli_matrix(d, {r, c});
        s.check(max_abs(u * u.adjoint() - Matrix::Identity(d, d)) < 1e-12, tag + " unitarity");
        const Vector direct = kron(u, Matrix::Identity(d, d)) * bell_vector(d, {0, 0});
        s.check((direct - bell_vector(d, {r, c})).norm() < 1e-12, tag + " bell vector from pauli");
        for (int r2 = 0; r2 < d; ++r2)
          for (int c2 = 0; c2 < d; ++c2) {
            const double ip = std::abs((u.adjoint() * pauli_matrix(d, {r2, c2})).trace());
            s.check(std::abs(ip - (r == r2 && c == c2 ? d : 0.0)) < 1e-10, tag + " trace orthogonality");
          }
      }
    const auto labels = all_mub_labels(d);
    for (std::size_t i = 0; i < labels.size(); ++i)
      for (std::size_t j = i + 1; j < labels.size(); ++j)
        for (const auto& v : mub_basis(d, labels[i]))
          for (const auto& w : mub_basis(d, labels[j]))
            s.check(std::abs(std::norm(v.dot(w)) - 1.0 / d) < 1e-12, tag + " unbiasedness");
  }
  return s;
}

inline SuiteResult verify_rates(std::uint64_t seed) {
  SuiteResult s{"rates"};
  Rng rng(seed);
  for (int d : {2, 3, 5})
    for (auto scheme : {Scheme::TwoMubs, Scheme::DPlusOneMubs, Scheme::DMubs}) {
      const auto protocol = scheme_protocol(scheme, d);
      const auto labels = scheme_labels(scheme, d);
      const std::string tag = "d=" + std::to_string(d) + " scheme " + scheme_name(scheme);
      s.check(std::abs(sifted_rate(bell_delta(d), protocol).r - std::log2(d)) < 1e-9, tag + " noiseless rate");
      for (int t = 0; t < 10; ++t) {
        const auto u = random_bell_diagonal(d, rng);
        const auto engine = sifted_rate(u, protocol);
        const auto closed = mub_rate_closed_form(u, labels);
        s.check(std::abs(engine.r - closed.r) < 1e-9 && std::abs(engine.Q - closed.Q) < 1e-9, tag + " engine vs closed form");
      }
    }
  const auto o = optimal_2mubs(2, 0.1);
  BellDiagonalState u{2, RealMatrix(2, 2)};
  u.u << o.a, o.b, o.b, o.c;
  s.check(std::abs(sifted_rate(u, qubit_protocol(QubitKind::Bb84)).r - o.r_min) < 1e-9, "bb84 optimal attack");
  return s;
}

inline SuiteResult verify_symmetry(std::uint64_t seed) {
  SuiteResult s{"symmetry"};
  Rng rng(seed);
  const std::vector<std::pair<GroupRep, std::size_t>> dims{
      {pauli_group(3), 9}, {octahedral_group(), 2}, {dihedral_group(2), 3}};
  for (const auto& [g, want] : dims) {
    const auto n = commutant_basis(g).size();
    s.notes.push_back("commutant " + g.name + ": " + std::to_string(n));
    s.check(n == want, "commutant dimension of " + g.name);
  }
  s.check(commutant_equal(octahedral_group(), icosahedral_group()), "octahedral vs icosahedral commutant");
  s.check(commutant_equal(dihedral_group(2), dihedral_group(3)), "dihedral(2) vs dihedral(3) commutant");
  const std::vector<GroupRep> groups{pauli_group(2), octahedral_group(), dihedral_group(3)};
  for (int t = 0; t < kPropertyInstances; ++t) {
    const auto& g = groups[static_cast<std::size_t>(t) % groups.size()];
    const Matrix rho = random_density(g.dim * g.dim, rng);
    const Matrix tw = twirl(rho, g);
    bool commutes = true;
    for (const auto& w : twirl_operators(g)) commutes = commutes && max_abs(w * tw - tw * w) < 1e-10;
    s.check(max_abs(twirl(tw, g) - tw) < 1e-10 && commutes, "twirl idempotence and commutation for " + g.name);
    const int d = 2 + t % 2;
    s.check(check_strong_covariance(purify_bell_diagonal(random_bell_diagonal(d, rng)), pauli_group(d)).pass,
            "strong covariance of Bell-paired purification");
  }
  for (auto s_ : {Scheme::TwoMubs, Scheme::DPlusOneMubs})
    s.check(check_gstar_invariance(scheme_protocol(s_, 3).ensemble(), pauli_group(3)).pass, "ensemble invariance");
  s.check(check_gstar_invariance(qubit_protocol(QubitKind::SixState).ensemble(), octahedral_group()).pass,
          "six-state ensemble invariance");
  return s;
}

inline SuiteResult verify_theorems(std::uint64_t seed) {
  SuiteResult s{"theorems"};
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < kPropertyInstances; ++t) {
    const int d = 2 + t % 2;
    const Matrix tau = random_density(d, rng);
    const Matrix rho = random_state_with_marginal(tau, rng);
    const Matrix sigma = random_state_with_marginal(tau, rng);
    const Povm a = random_basis_povm(d, rng);
    const Povm b = random_basis_povm(d, rng);
    const double lam = unif(rng);
    const Matrix mix = lam * rho + (1 - lam) * sigma;
    auto info = [&](const Matrix& m) { return mutual_information(joint_distribution(m, a, b)); };
    s.check(info(mix) <= lam * info(rho) + (1 - lam) * info(sigma) + 1e-10, "weak convexity of mutual information");
    s.check(holevo_AB(mix, a) >= lam * holevo_AB(rho, a) + (1 - lam) * holevo_AB(sigma, a) - 1e-10,
            "concavity of the Holevo quantity");

    const Matrix ua = random_unitary(d, rng);
    const Matrix ub = random_unitary(d, rng);
    const Matrix w = kron(ua, ub);
    Povm ra, rb;
    for (const auto& e : a.elements) ra.elements.push_back(ua * e * ua.adjoint());
    for (const auto& e : b.elements) rb.elements.push_back(ub * e * ub.adjoint());
    const Matrix rot = w * rho * w.adjoint();
    s.check(std::abs(mutual_information(joint_distribution(rot, ra, rb)) - info(rho)) < 1e-10 &&
                std::abs(holevo_AB(rot, ra) - holevo_AB(rho, a)) < 1e-10,
            "local unitary invariance");
  }
  return s;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"gpauli", "rates", "symmetry", "theorems"};
  return names;
}

inline SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "gpauli") return verify_gpauli();
  if (name == "rates") return verify_rates(seed);
  if (name == "symmetry") return verify_symmetry(seed);
  if (name == "theorems") return verify_theorems(seed);
  throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace symqkd
