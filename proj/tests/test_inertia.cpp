#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "galsurj/inertia.hpp"

using namespace galsurj;

namespace {

std::vector<FqElem> generators_of(const FqField& f) {
  std::vector<FqElem> out;
  for (std::uint32_t i = 1; i < f.size(); ++i) {
    auto x = f.from_index(i);
    if (f.mult_order(x) == f.size() - 1) out.push_back(x);
  }
  return out;
}

// Multiset is lambda * {1, r, r^2, r^3} for some lambda, r in F^x.
bool geometric_by_search(const FqField& f, std::vector<FqElem> s) {
  std::sort(s.begin(), s.end());
  for (auto& lam : s)
    for (std::uint32_t i = 1; i < f.size(); ++i) {
      auto r = f.from_index(i);
      std::vector<FqElem> t{lam, f.mul(lam, r), f.mul(lam, f.mul(r, r)), f.mul(lam, f.pow(r, 3))};
      std::sort(t.begin(), t.end());
      if (t == s) return true;
    }
  return false;
}

// Least N <= l^2 computed with actual field elements of F_{l^L}, L <= 4.
std::optional<u64> min_exponent_in_field(u64 l, const InertiaPattern& p) {
  int L = 1;
  for (auto& c : p.entries) L = std::lcm(L, c.dimension());
  auto F = make_field(static_cast<std::uint32_t>(l), L);
  auto theta = F.primitive_element();
  const u64 M = F.size() - 1;
  std::vector<FqElem> vals;
  for (auto& c : p.entries) {
    if (c.kind == CharKind::Trivial) vals.push_back(F.one());
    if (c.kind == CharKind::Cyclotomic) vals.push_back(F.pow(theta, M / (l - 1)));
    if (c.kind == CharKind::Fundamental) {
      const int n = c.dimension();
      u64 s = 0;
      for (int i = 0; i < n; ++i) s += c.exponents[i] * ipow(l, i);
      vals.push_back(F.pow(theta, M / (ipow(l, n) - 1) * s));
    }
  }
  for (u64 N = 1; N <= l * l; ++N) {
    bool ok = true;
    for (auto& a : vals)
      for (auto& b : vals)
        for (int t = 0; t < 2 && ok; ++t)
          if (!(F.pow(a, (t ? l : 1) * N) == F.pow(b, N))) ok = false;
    if (ok) return N;
  }
  return std::nullopt;
}

// Number of multisets of factor types with total dimension 2g, by a
// coin-change count over types.
u64 pattern_count(int g) {
  const int D = 2 * g;
  std::vector<u64> ways(D + 1, 0);
  ways[0] = 1;
  auto add_type = [&](int dim) {
    for (int s = dim; s <= D; ++s) ways[s] += ways[s - dim];
  };
  add_type(1);
  add_type(1);
  for (int n = 2; n <= D; ++n)
    for (u64 k = 0; k < (u64{1} << n) - 2; ++k) add_type(n);
  return ways[D];
}

}  // namespace

TEST(SurfacePatterns, ThreeFamilies) {
  auto ps = enumerate_surface_patterns(11);
  ASSERT_EQ(ps.size(), 3u);
  for (auto& p : ps) {
    auto c = p.counts();
    EXPECT_EQ(c.m0 + c.m1 + 2 * c.m2, 4);
    EXPECT_EQ(c.m1 + c.m2, 2);
    EXPECT_EQ(p.dimension(), 4);
  }
  EXPECT_EQ(ps[0].counts().m0, 2);
  EXPECT_EQ(to_string(ps[0]), "{1, 1, chi, chi}");
  EXPECT_EQ(to_string(ps[2]), "{phi2[10], phi2[10]}");
  EXPECT_THROW(enumerate_surface_patterns(7), std::invalid_argument);
  EXPECT_THROW(enumerate_surface_patterns(15), std::invalid_argument);
}

TEST(RealizePattern, Examples) {
  auto F = make_field(11, 2);
  auto g = F.primitive_element();
  ASSERT_EQ(F.mult_order(g), 120u);
  auto ps = enumerate_surface_patterns(11);
  auto ev = realize_pattern(F, ps[0], g);
  auto N = F.from_int(F.norm(g));
  EXPECT_EQ(ev, (std::vector<FqElem>{F.one(), F.one(), N, N}));
  EXPECT_EQ(F.mult_order(N), 10u);
  ev = realize_pattern(F, ps[2], g);
  auto g11 = F.pow(g, 11);
  EXPECT_EQ(ev, (std::vector<FqElem>{g, g11, g, g11}));
  InertiaPattern trivial{11, {trivial_char(), trivial_char(), trivial_char(), trivial_char()}};
  EXPECT_EQ(realize_pattern(F, trivial, g), std::vector<FqElem>(4, F.one()));
  EXPECT_THROW(realize_pattern(F, ps[0], F.mul(g, g)), std::invalid_argument);
}

TEST(RealizePattern, LevelTwoMultisetIsFrobeniusStable) {
  auto F = make_field(13, 2);
  auto p = enumerate_surface_patterns(13)[2];
  for (auto& g : generators_of(F)) {
    auto ev = realize_pattern(F, p, g);
    std::vector<FqElem> fr;
    for (auto& x : ev) fr.push_back(F.frobenius(x));
    std::sort(ev.begin(), ev.end());
    std::sort(fr.begin(), fr.end());
    EXPECT_EQ(ev, fr);
  }
}

TEST(Ordering, Examples) {
  auto F = make_field(11, 2);
  auto r = eigenvalue_system_admits_ordering(F, std::vector<FqElem>(4, F.one()));
  EXPECT_TRUE(r.orderable);
  EXPECT_EQ(r.permutation, (std::array<int, 4>{0, 1, 2, 3}));
  r = eigenvalue_system_admits_ordering(F, {F.from_int(2), F.from_int(2), F.one(), F.one()});
  EXPECT_FALSE(r.orderable);
  EXPECT_EQ(r.failed_orderings, 24);
}

TEST(Ordering, CubicShapeAlwaysOrderable) {
  std::mt19937_64 rng(1);
  for (std::uint32_t l : {11u, 13u}) {
    auto F = make_field(l, 2);
    for (std::uint32_t i = 1; i < F.size(); ++i)
      for (std::uint32_t j = 1; j < F.size(); ++j) {
        auto a = F.from_index(i), d = F.from_index(j);
        std::vector<FqElem> s{F.pow(a, 3), F.mul(F.mul(a, a), d), F.mul(a, F.mul(d, d)), F.pow(d, 3)};
        std::shuffle(s.begin(), s.end(), rng);
        auto r = eigenvalue_system_admits_ordering(F, s);
        ASSERT_TRUE(r.orderable);
        auto& p = r.permutation;
        EXPECT_TRUE(cubic_relations_hold(F, s[p[0]], s[p[1]], s[p[2]], s[p[3]]));
      }
  }
}

TEST(Ordering, AgreesWithGeometricSearchOnRandomSystems) {
  std::mt19937_64 rng(2);
  auto F = make_field(7, 2);
  for (int it = 0; it < 300; ++it) {
    std::vector<FqElem> s;
    for (int k = 0; k < 4; ++k) s.push_back(F.from_index(1 + rng() % (F.size() - 1)));
    if (it % 3 == 0) {
      // plant a geometric progression
      auto lam = s[0], r = s[1];
      s = {lam, F.mul(lam, r), F.mul(lam, F.mul(r, r)), F.mul(lam, F.pow(r, 3))};
      std::shuffle(s.begin(), s.end(), rng);
    }
    EXPECT_EQ(eigenvalue_system_admits_ordering(F, s).orderable, geometric_by_search(F, s));
  }
}

TEST(NoTwistedCubic, VerifiedWithCheckedWitnesses) {
  for (u64 l : {11u, 13u}) {
    auto rep = verify_no_twisted_cubic(l);
    EXPECT_TRUE(rep.verified);
    ASSERT_EQ(rep.witnesses.size(), 3u);
    auto F = make_field(static_cast<std::uint32_t>(l), 2);
    for (auto& w : rep.witnesses) {
      ASSERT_TRUE(w.found);
      EXPECT_EQ(w.failed_orderings, 24);
      EXPECT_EQ(F.mult_order(w.generator), l * l - 1);
      EXPECT_EQ(realize_pattern(F, w.pattern, w.generator), w.eigenvalues);
      EXPECT_FALSE(geometric_by_search(F, w.eigenvalues));
    }
  }
  EXPECT_THROW(verify_no_twisted_cubic(7), std::invalid_argument);
}

TEST(NoTwistedCubic, AllPrimesUpTo97) {
  for (u64 l = 11; l <= 97; ++l) {
    if (!is_prime_u64(l)) continue;
    EXPECT_TRUE(verify_no_twisted_cubic(l).verified) << l;
  }
}

TEST(MinimalExponent, Examples) {
  InertiaPattern all_trivial{11, {trivial_char(), trivial_char(), trivial_char(), trivial_char()}};
  EXPECT_TRUE(minimal_projective_exponent(11, 2, all_trivial).contradiction);
  InertiaPattern all_cyc{11, {cyclotomic_char(), cyclotomic_char(), cyclotomic_char(), cyclotomic_char()}};
  EXPECT_TRUE(minimal_projective_exponent(11, 2, all_cyc).contradiction);

  InertiaPattern mixed{11, {trivial_char(), cyclotomic_char(), trivial_char(), cyclotomic_char()}};
  auto r = minimal_projective_exponent(11, 2, mixed);
  EXPECT_FALSE(r.contradiction);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.value, 10u);

  InertiaPattern lvl2{11, {level2_char(1), trivial_char(), cyclotomic_char()}};
  r = minimal_projective_exponent(11, 2, lvl2);
  EXPECT_FALSE(r.contradiction);
  EXPECT_GE(r.value, 11u);
  EXPECT_EQ(std::optional<u64>(r.value), min_exponent_in_field(11, lvl2));

  EXPECT_THROW(minimal_projective_exponent(11, 2, InertiaPattern{11, {trivial_char()}}), std::invalid_argument);
  EXPECT_THROW(minimal_projective_exponent(5, 4, all_trivial), std::invalid_argument);
  InertiaPattern bad{11, {InertiaChar{CharKind::Fundamental, {1, 1}}, trivial_char(), cyclotomic_char()}};
  EXPECT_THROW(minimal_projective_exponent(11, 2, bad), std::invalid_argument);
  EXPECT_THROW(fundamental_char({0, 0, 0}), std::invalid_argument);
}

TEST(MinimalExponent, AgreesWithFieldArithmetic) {
  for (u64 l : {5u, 7u, 11u}) {
    for (int g : {1, 2}) {
      if (l < static_cast<u64>(g) + 2) continue;
      for (auto& p : enumerate_admissible_patterns(l, g)) {
        auto r = minimal_projective_exponent(l, g, p);
        if (r.contradiction) {
          EXPECT_NE((p.determinant_exponent() - g) % static_cast<int>(l - 1), 0);
          continue;
        }
        auto oracle = min_exponent_in_field(l, p);
        if (oracle) {
          EXPECT_TRUE(r.exact);
          EXPECT_EQ(r.value, *oracle) << to_string(p);
        } else {
          EXPECT_FALSE(r.exact);
          EXPECT_EQ(r.value, l * l + 1);
        }
      }
    }
  }
}

TEST(MinimalExponent, MatchesClosedFormLcm) {
  for (u64 l : {7u, 13u, 47u}) {
    for (int g = 1; g <= 4; ++g) {
      if (l < static_cast<u64>(g) + 2) continue;
      for (auto& p : enumerate_admissible_patterns(l, g)) {
        auto r = minimal_projective_exponent(l, g, p);
        if (r.contradiction) continue;
        auto ce = character_exponents(p);
        // lcm over pairs of the order of (l^t d_i - d_j) in Z/M
        u128 lcm = 1;
        bool big = false;
        for (auto di : ce.exponents)
          for (auto dj : ce.exponents)
            for (int t = 0; t < 2; ++t) {
              u128 v = ((t ? di * l : di) % ce.modulus + ce.modulus - dj) % ce.modulus;
              u128 ord = ce.modulus / detail::gcd_u128(ce.modulus, v);
              lcm = lcm / detail::gcd_u128(lcm, ord) * ord;
              if (lcm > l * l) big = true;
            }
        if (big) {
          EXPECT_FALSE(r.exact) << to_string(p);
        } else {
          EXPECT_TRUE(r.exact);
          EXPECT_EQ(static_cast<u128>(r.value), lcm) << to_string(p);
        }
      }
    }
  }
}

TEST(LowerBound, PatternEnumerationCount) {
  for (int g = 1; g <= 4; ++g) {
    auto ps = enumerate_admissible_patterns(11, g);
    EXPECT_EQ(ps.size(), pattern_count(g)) << g;
    for (auto& p : ps) EXPECT_EQ(p.dimension(), 2 * g);
  }
}

TEST(LowerBound, Examples) {
  auto r = verify_lower_bound(11, 2);
  EXPECT_TRUE(r.verified);
  EXPECT_EQ(r.smallest_n, 10u);
  EXPECT_GT(r.contradictions, 0u);
  EXPECT_TRUE(verify_lower_bound(13, 1).verified);
  EXPECT_THROW(verify_lower_bound(5, 4), std::invalid_argument);
  EXPECT_THROW(verify_lower_bound(53, 2), std::invalid_argument);
}
