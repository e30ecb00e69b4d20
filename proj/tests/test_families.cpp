#include "symqkd/families.hpp"
#include "symqkd/keyrate.hpp"
#include "symqkd/random.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace symqkd;

namespace {

BellDiagonalState example_table() {
  BellDiagonalState s{2, RealMatrix(2, 2)};
  s.u << 0.7, 0.1, 0.1, 0.1;
  return s;
}

std::vector<Bloch> unit_vertices(const std::vector<Bloch>& axes) {
  std::vector<Bloch> out;
  for (const auto& a : axes) {
    const double len = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
    out.push_back({a[0] / len, a[1] / len, a[2] / len});
    out.push_back({-a[0] / len, -a[1] / len, -a[2] / len});
  }
  return out;
}

double dot(const Bloch& a, const Bloch& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Eight unit vectors form a cube iff every pairwise inner product is ±1/3 or
// -1 and each vertex has exactly three neighbours at +1/3.
bool is_cube(const std::vector<Bloch>& v) {
  if (v.size() != 8) return false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    int near = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (i == j) continue;
      const double ip = dot(v[i], v[j]);
      if (std::abs(ip - 1.0 / 3) < 1e-9) ++near;
      else if (std::abs(ip + 1.0 / 3) > 1e-9 && std::abs(ip + 1.0) > 1e-9) return false;
    }
    if (near != 3) return false;
  }
  return true;
}

bool same_basis_set(const ProtocolSpec& a, const ProtocolSpec& b) {
  auto contains = [](const ProtocolSpec& p, const OrthonormalBasis& basis) {
    for (const auto& other : p.bases) {
      bool all = true;
      for (const auto& v : basis) {
        bool hit = false;
        for (const auto& w : other) hit = hit || equal_up_to_phase(v, w, 1e-12);
        all = all && hit;
      }
      if (all) return true;
    }
    return false;
  };
  for (const auto& x : a.bases)
    if (!contains(b, x)) return false;
  for (const auto& x : b.bases)
    if (!contains(a, x)) return false;
  return true;
}

}  // namespace

TEST(ConditionalSpectrum, NoiselessAndExample) {
  for (int d : {2, 3, 5})
    for (const auto& l : all_mub_labels(d)) {
      const RealVector lam = conditional_spectrum(bell_delta(d), l);
      EXPECT_DOUBLE_EQ(lam(0), 1.0);
      EXPECT_DOUBLE_EQ(lam.sum(), 1.0);
    }
  const RealVector z = conditional_spectrum(example_table(), BasisLabel::z());
  EXPECT_NEAR(z(0), 0.8, 1e-15);
  EXPECT_NEAR(z(1), 0.2, 1e-15);
}

TEST(ConditionalSpectrum, PositionedAgainstBobOutcomes) {
  // lambda_y is the probability that Bob's outcome is shifted by y from Alice's.
  Rng rng(81);
  for (int d : {3, 5}) {
    const auto s = random_bell_diagonal(d, rng);
    const Matrix rho = bell_diag_to_density(s);
    for (const auto& l : all_mub_labels(d)) {
      const auto basis = mub_basis(d, l);
      const RealVector lam = conditional_spectrum(s, l);
      for (int k = 0; k < d; ++k) {
        const auto cs = conditional_state(rho, basis[k].conjugate());
        std::vector<double> got, want;
        for (int kp = 0; kp < d; ++kp) got.push_back(basis[kp].dot(cs.state * basis[kp]).real());
        for (int y = 0; y < d; ++y) want.push_back(lam(y));
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        for (int i = 0; i < d; ++i) ASSERT_NEAR(got[i], want[i], 1e-10);
      }
    }
  }
}

TEST(ClosedForm, NoiselessAndExample) {
  for (int d : {2, 3, 5}) {
    const auto r = mub_rate_closed_form(bell_delta(d), all_mub_labels(d));
    EXPECT_NEAR(r.Q, 0.0, 1e-15);
    EXPECT_NEAR(r.I, std::log2(d), 1e-12);
    EXPECT_NEAR(r.chi, 0.0, 1e-12);
    EXPECT_NEAR(r.r, std::log2(d), 1e-12);
  }
  EXPECT_NEAR(mub_rate_closed_form(example_table(), {BasisLabel::z(), BasisLabel::b(0)}).Q, 0.2, 1e-12);
}

TEST(ClosedForm, MatchesEngineOnRandomStates) {
  Rng rng(83);
  for (int d : {2, 3})
    for (auto s : {Scheme::TwoMubs, Scheme::DPlusOneMubs, Scheme::DMubs})
      for (int t = 0; t < 5; ++t) {
        const auto u = random_bell_diagonal(d, rng);
        const auto cf = mub_rate_closed_form(u, scheme_labels(s, d));
        const auto en = sifted_rate(u, scheme_protocol(s, d));
        ASSERT_NEAR(cf.Q, en.Q, 1e-9);
        ASSERT_NEAR(cf.I, en.I, 1e-9);
        ASSERT_NEAR(cf.chi, en.chi, 1e-9);
        ASSERT_NEAR(cf.r, en.r, 1e-9);
      }
}

TEST(Families, D1MubsQutritExample) {
  const auto f = family_d1mubs(3, 0.1);
  EXPECT_EQ(f.n_free, 0);
  const auto p = f.params(0.0);
  EXPECT_NEAR(p[0], 1.0 - 4.0 / 3.0 * 0.1, 1e-15);
  EXPECT_NEAR(p[1], 0.1 / 6.0, 1e-15);
}

TEST(Families, TwoMubsAtZeroErrorIsForced) {
  for (int d : {2, 3, 7}) {
    const auto f = family_2mubs(d, 0.0);
    EXPECT_DOUBLE_EQ(f.lo, 0.0);
    EXPECT_DOUBLE_EQ(f.hi, 0.0);
    const auto p = f.params(0.0);
    EXPECT_DOUBLE_EQ(p[0], 1.0);
    EXPECT_DOUBLE_EQ(p[1], 0.0);
    EXPECT_DOUBLE_EQ(p[2], 0.0);
  }
}

TEST(Families, InfeasibleQRejected) {
  EXPECT_THROW(family_d1mubs(2, 0.7), InfeasibleError);
  EXPECT_THROW(family_2mubs(3, 1.2), InfeasibleError);
  EXPECT_THROW(family_dmubs(3, -0.1), InfeasibleError);
  EXPECT_THROW(optimal_2mubs(2, 0.6), InfeasibleError);
  EXPECT_THROW(optimal_d1mubs(3, 0.8), InfeasibleError);
}

TEST(Families, EveryFeasiblePointIsValidWithTargetQ) {
  for (int d : {2, 3, 5, 7})
    for (auto s : {Scheme::TwoMubs, Scheme::DPlusOneMubs, Scheme::DMubs})
      for (double q : {0.0, 0.03, 0.1, 0.25, 0.5}) {
        const auto f = scheme_family(s, d, q);
        for (int i = 0; i < 100; ++i) {
          const double t = f.lo + (f.hi - f.lo) * i / 99.0;
          const auto u = f.at(t);
          ASSERT_NO_THROW(u.validate()) << scheme_name(s) << " d=" << d << " q=" << q;
          ASSERT_NEAR(mub_rate_closed_form(u, scheme_labels(s, d)).Q, q, 1e-12);
        }
      }
}

TEST(Families, EngineAgreesOnFamilyErrorRate) {
  for (auto s : {Scheme::TwoMubs, Scheme::DPlusOneMubs, Scheme::DMubs}) {
    const auto f = scheme_family(s, 3, 0.12);
    EXPECT_NEAR(sifted_rate(f.at(0.5 * (f.lo + f.hi)), scheme_protocol(s, 3)).Q, 0.12, 1e-12);
  }
}

TEST(Optimal2Mubs, QubitExampleAndNoiseless) {
  const auto o = optimal_2mubs(2, 0.1);
  EXPECT_NEAR(o.a, 0.81, 1e-15);
  EXPECT_NEAR(o.b, 0.09, 1e-15);
  EXPECT_NEAR(o.c, 0.01, 1e-15);
  EXPECT_NEAR(o.r_min, 0.0620088128214376, 1e-12);
  for (int d : {2, 3, 5}) {
    const auto z = optimal_2mubs(d, 0.0);
    EXPECT_DOUBLE_EQ(z.a, 1.0);
    EXPECT_DOUBLE_EQ(z.b, 0.0);
    EXPECT_DOUBLE_EQ(z.c, 0.0);
    EXPECT_NEAR(z.r_min, std::log2(d), 1e-15);
  }
}

TEST(Optimal2Mubs, StateReproducesClosedFormRate) {
  for (int d : {3, 5, 7})
    for (double q : {0.02, 0.08, 0.15}) {
      const auto o = optimal_2mubs(d, q);
      BellDiagonalState s{d, RealMatrix(d, d)};
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) s.u(r, c) = (r == 0 && c == 0) ? o.a : (r == 0 || c == 0) ? o.b : o.c;
      ASSERT_NEAR(s.u.sum(), 1.0, 1e-14);
      EXPECT_NEAR(mub_rate_closed_form(s, scheme_labels(Scheme::TwoMubs, d)).r, o.r_min, 1e-12);
      EXPECT_NEAR(mub_rate_closed_form(s, scheme_labels(Scheme::TwoMubs, d)).Q, q, 1e-14);
    }
}

TEST(OptimalD1Mubs, SixStateAndEndpoints) {
  for (double q : {0.01, 0.05, 0.1, 0.12}) {
    const double six = 1 + 1.5 * q * std::log2(q / 2) + (1 - 1.5 * q) * std::log2(1 - 1.5 * q);
    EXPECT_NEAR(optimal_d1mubs(2, q).r_min, six, 1e-14);
  }
  EXPECT_NEAR(optimal_d1mubs(3, 0.0).r_min, 1.584962500721156, 1e-14);
  EXPECT_NEAR(optimal_d1mubs(2, 0.126193083276821).r_min, 0.0, 1e-12);
  EXPECT_NEAR(optimal_d1mubs(3, 0.1).r_min, 0.618452994168251, 1e-12);
}

TEST(QubitProtocol, CuboidLimits) {
  EXPECT_TRUE(same_basis_set(qubit_protocol(QubitKind::Cuboid, 2, std::numbers::pi / 2), qubit_protocol(QubitKind::Bb84)));
  // The listed vertices (±s, ±c, 0), (0, ±c, ±s) only form a cube when
  // tan(theta) = sqrt(2); at theta = pi/4 they are edge midpoints of a cube.
  EXPECT_FALSE(is_cube(unit_vertices(qubit_axes(QubitKind::Cuboid, 2, std::numbers::pi / 4))));
  EXPECT_TRUE(is_cube(unit_vertices(qubit_axes(QubitKind::Cuboid, 2, std::atan(std::sqrt(2.0))))));
  EXPECT_TRUE(is_cube(unit_vertices(qubit_axes(QubitKind::Cube))));
  EXPECT_THROW(qubit_axes(QubitKind::Cuboid, 2, 0.0), std::invalid_argument);
}

TEST(QubitProtocol, IcosahedronGeometry) {
  const auto v = unit_vertices(qubit_axes(QubitKind::Icosahedron));
  ASSERT_EQ(v.size(), 12u);
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double ip = std::abs(dot(v[i], v[j]));
      EXPECT_TRUE(std::abs(ip - 1.0) < 1e-12 || std::abs(ip - 1.0 / std::sqrt(5.0)) < 1e-12);
    }
  EXPECT_EQ(qubit_protocol(QubitKind::Icosahedron).num_bases(), 6);
  EXPECT_EQ(qubit_protocol(QubitKind::Dodecahedron).num_bases(), 10);
  EXPECT_EQ(qubit_protocol(QubitKind::Cube).num_bases(), 4);
  EXPECT_EQ(qubit_protocol(QubitKind::SixState).num_bases(), 3);
}

TEST(QubitErrorFunctional, ClosedFormsAndEngine) {
  EXPECT_NEAR(qubit_error_functional(QubitKind::SixState, 0.05, 0.05), 0.1, 1e-15);
  EXPECT_NEAR(qubit_error_functional(QubitKind::Bb84, 0.09, 0.01), 0.1, 1e-15);
  EXPECT_NEAR(qubit_error_functional(QubitKind::Cuboid, 0.09, 0.01, std::numbers::pi / 2), 0.1, 1e-15);
  for (double theta : {0.3, std::numbers::pi / 6, 1.1}) {
    BellDiagonalState s{2, RealMatrix(2, 2)};
    const double b = 0.04, c = 0.07;
    s.u << 1 - 2 * b - c, b, b, c;
    EXPECT_NEAR(sifted_rate(s, qubit_protocol(QubitKind::Cuboid, 2, theta)).Q,
                qubit_error_functional(QubitKind::Cuboid, b, c, theta), 1e-12);
  }
}

TEST(FamilyFromGroup, SixStateIsDepolarizing) {
  const auto f = qubit_family(QubitKind::SixState, 0.1);
  EXPECT_EQ(f.n_free, 0);
  const auto u = f.at(0.0);
  EXPECT_NEAR(u.u(0, 0), 1 - 1.5 * 0.1, 1e-12);
  for (auto [r, s] : {std::pair{0, 1}, {1, 0}, {1, 1}}) EXPECT_NEAR(u.u(r, s), 0.05, 1e-12);
}

TEST(FamilyFromGroup, Bb84FamilyMatchesTwoMubClasses) {
  const auto f = qubit_family(QubitKind::Bb84, 0.1);
  EXPECT_EQ(f.n_free, 1);
  EXPECT_NEAR(f.lo, 0.0, 1e-12);
  EXPECT_NEAR(f.hi, 0.1, 1e-12);
  const auto u = f.at(0.01);
  EXPECT_NEAR(u.u(0, 1), u.u(1, 0), 1e-12);
  EXPECT_NEAR(u.u(1, 1), 0.01, 1e-12);
  EXPECT_NEAR(sifted_rate(u, qubit_protocol(QubitKind::Bb84)).Q, 0.1, 1e-12);
}

TEST(FamilyFromGroup, CuboidFamilyHitsTargetQ) {
  const double theta = std::numbers::pi / 6;
  const auto f = qubit_family(QubitKind::Cuboid, 0.05, 2, theta);
  EXPECT_EQ(f.n_free, 1);
  for (double t : {f.lo, 0.5 * (f.lo + f.hi), f.hi}) {
    const auto u = f.at(t);
    EXPECT_NO_THROW(u.validate());
    EXPECT_NEAR(sifted_rate(u, qubit_protocol(QubitKind::Cuboid, 2, theta)).Q, 0.05, 1e-12);
    EXPECT_NEAR(qubit_error_functional(QubitKind::Cuboid, u.u(1, 0), u.u(1, 1), theta), 0.05, 1e-12);
  }
}
