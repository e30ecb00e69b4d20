#pragma once

#include "symqkd/gpauli.hpp"
#include "symqkd/linalg.hpp"
#include "symqkd/source.hpp"

#include <array>
#include <numbers>
#include <string>
#include <vector>

namespace symqkd {

/// Ordered list of orthonormal signal bases with basis sifting. Alice sends
/// each basis vector with probability 1/(|L| d); Bob measures in a uniformly
/// random basis and only matching bases are kept.
struct ProtocolSpec {
  int d = 2;
  std::vector<OrthonormalBasis> bases;
  std::vector<std::string> labels;
  bool basis_sifting = true;
  std::string name;

  int num_bases() const { return static_cast<int>(bases.size()); }

  void validate() const {
    if (bases.size() < 2) throw std::invalid_argument("ProtocolSpec: need at least two bases");
    if (labels.size() != bases.size()) throw std::invalid_argument("ProtocolSpec: one label per basis");
    for (const auto& b : bases) {
      if (static_cast<int>(b.size()) != d) throw std::invalid_argument("ProtocolSpec: basis must have d vectors");
      for (int i = 0; i < d; ++i) {
        if (b[i].size() != d) throw std::invalid_argument("ProtocolSpec: vector dimension mismatch");
        for (int j = 0; j < d; ++j) {
          const cplx ip = b[i].dot(b[j]);
          if (std::abs(ip - (i == j ? 1.0 : 0.0)) > 1e-12)
            throw std::invalid_argument("ProtocolSpec: basis not orthonormal");
        }
      }
    }
  }

  SignalEnsemble ensemble() const {
    SignalEnsemble e;
    const double p = 1.0 / (num_bases() * d);
    for (const auto& b : bases)
      for (const auto& v : b) {
        e.states.push_back(v);
        e.probs.push_back(p);
      }
    return e;
  }

  Povm bob_povm() const {
    Povm m;
    const double w = 1.0 / num_bases();
    for (const auto& b : bases)
      for (const auto& v : b) m.elements.push_back(w * projector(v));
    return m;
  }

  SiftingPlan sifting_plan() const {
    SiftingPlan plan;
    for (int b = 0; b < num_bases(); ++b) {
      for (int k = 0; k < d; ++k) {
        plan.alice_label.push_back(b);
        plan.bob_label.push_back(b);
      }
      plan.kept.insert(b);
    }
    return plan;
  }
};

inline ProtocolSpec mub_protocol(int d, const std::vector<BasisLabel>& labels, std::string name = "mub") {
  ProtocolSpec p{d, {}, {}, true, std::move(name)};
  for (const auto& l : labels) {
    p.bases.push_back(mub_basis(d, l));
    p.labels.push_back(l.name());
  }
  p.validate();
  return p;
}

/// The three MUB protocols: {Z, 0}, {Z, 0, ..., d-1} and {0, ..., d-1}.
enum class Scheme { TwoMubs, DPlusOneMubs, DMubs };

inline std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::TwoMubs: return "2";
    case Scheme::DPlusOneMubs: return "d+1";
    case Scheme::DMubs: return "d";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "2") return Scheme::TwoMubs;
  if (s == "d+1") return Scheme::DPlusOneMubs;
  if (s == "d") return Scheme::DMubs;
  throw std::invalid_argument("unknown scheme '" + s + "' (expected 2, d or d+1)");
}

inline std::vector<BasisLabel> scheme_labels(Scheme s, int d) {
  switch (s) {
    case Scheme::TwoMubs: return {BasisLabel::z(), BasisLabel::b(0)};
    case Scheme::DPlusOneMubs: return all_mub_labels(d);
    case Scheme::DMubs: {
      std::vector<BasisLabel> out;
      for (int b = 0; b < d; ++b) out.push_back(BasisLabel::b(b));
      return out;
    }
  }
  return {};
}

inline ProtocolSpec scheme_protocol(Scheme s, int d) {
  return mub_protocol(d, scheme_labels(s, d), scheme_name(s) + "-mubs");
}

// ---- qubit protocols from Bloch vectors ----

using Bloch = std::array<double, 3>;

/// Pure qubit state with the given Bloch direction.
inline Vector bloch_state(Bloch n) {
  const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  const double theta = std::acos(std::clamp(n[2] / len, -1.0, 1.0));
  const double phi = std::atan2(n[1], n[0]);
  Vector v(2);
  v << std::cos(theta / 2), std::polar(std::sin(theta / 2), phi);
  return v;
}

inline Bloch bloch_of(const Vector& v) {
  const cplx a = v(0);
  const cplx b = v(1);
  const cplx cross = std::conj(a) * b;
  return {2.0 * cross.real(), 2.0 * cross.imag(), std::norm(a) - std::norm(b)};
}

/// Builds one basis per axis from the antipodal pair {+n, -n}.
inline ProtocolSpec protocol_from_axes(const std::vector<Bloch>& axes, std::string name) {
  ProtocolSpec p{2, {}, {}, true, std::move(name)};
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const Bloch& n = axes[i];
    p.bases.push_back({bloch_state(n), bloch_state({-n[0], -n[1], -n[2]})});
    p.labels.push_back("axis" + std::to_string(i));
  }
  p.validate();
  return p;
}

enum class QubitKind { SixState, Bb84, Cube, Icosahedron, Dodecahedron, Ngon, Cuboid };

inline QubitKind parse_qubit_kind(const std::string& s) {
  if (s == "sixstate") return QubitKind::SixState;
  if (s == "bb84") return QubitKind::Bb84;
  if (s == "cube") return QubitKind::Cube;
  if (s == "icosahedron") return QubitKind::Icosahedron;
  if (s == "dodecahedron") return QubitKind::Dodecahedron;
  if (s == "ngon") return QubitKind::Ngon;
  if (s == "cuboid") return QubitKind::Cuboid;
  throw std::invalid_argument("unknown qubit protocol '" + s + "'");
}

inline std::vector<Bloch> qubit_axes(QubitKind kind, int n = 2, double theta = std::numbers::pi / 2) {
  constexpr double g = std::numbers::phi;
  switch (kind) {
    case QubitKind::SixState: return {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}};
    case QubitKind::Bb84: n = 2; [[fallthrough]];
    case QubitKind::Ngon: {
      if (n < 2) throw std::invalid_argument("ngon: n must be >= 2");
      std::vector<Bloch> out;
      for (int x = 0; x < n; ++x) {
        const double a = std::numbers::pi * x / n;
        out.push_back({std::sin(a), 0.0, std::cos(a)});
      }
      return out;
    }
    case QubitKind::Cube: return {{1, 1, 1}, {-1, 1, 1}, {1, -1, 1}, {1, 1, -1}};
    case QubitKind::Icosahedron:
      return {{0, 1, g}, {0, -1, g}, {1, g, 0}, {-1, g, 0}, {g, 0, 1}, {-g, 0, 1}};
    case QubitKind::Dodecahedron:
      return {{1, 1, 1},      {-1, 1, 1},      {1, -1, 1},      {1, 1, -1},      {0, 1 / g, g},
              {0, -1 / g, g}, {1 / g, g, 0},   {-1 / g, g, 0},  {g, 0, 1 / g},   {-g, 0, 1 / g}};
    case QubitKind::Cuboid: {
      if (!(theta > 0.0 && theta <= std::numbers::pi / 2 + 1e-15))
        throw std::invalid_argument("cuboid: theta must lie in (0, pi/2]");
      const double s = std::sin(theta);
      const double c = std::cos(theta);
      return {{s, c, 0}, {-s, c, 0}, {0, c, s}, {0, c, -s}};
    }
  }
  return {};
}

inline std::string qubit_name(QubitKind kind, int n, double theta) {
  switch (kind) {
    case QubitKind::SixState: return "sixstate";
    case QubitKind::Bb84: return "bb84";
    case QubitKind::Cube: return "cube";
    case QubitKind::Icosahedron: return "icosahedron";
    case QubitKind::Dodecahedron: return "dodecahedron";
    case QubitKind::Ngon: return "ngon(" + std::to_string(n) + ")";
    case QubitKind::Cuboid: return "cuboid(" + std::to_string(theta) + ")";
  }
  return "?";
}

inline ProtocolSpec qubit_protocol(QubitKind kind, int n = 2, double theta = std::numbers::pi / 2) {
  return protocol_from_axes(qubit_axes(kind, n, theta), qubit_name(kind, n, theta));
}

}  // namespace symqkd
