#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <functional>
#include <random>
#include <set>

#include "galsurj/bounds.hpp"

using namespace galsurj;
using boost::multiprecision::cpp_int;

namespace {

cpp_int to_cpp(const mpz_class& z) { return cpp_int(z.get_str()); }

cpp_int cpp_pow(u64 base, unsigned e) { return boost::multiprecision::pow(cpp_int(base), e); }

u64 cpp_bits(const cpp_int& x) { return x == 0 ? 0 : static_cast<u64>(boost::multiprecision::msb(x)) + 1; }

ExactExpr rat(long n, long d = 1) { return rational_const(mpq_class(n, d)); }

ExactExpr rat_z(const mpz_class& z) { return rational_const(mpq_class(z)); }

// ln(value) enclosures never certify a <= b to be false.
bool certified_less(const ExactExpr& a, const ExactExpr& b, mpfr_prec_t prec = 256) {
  auto ea = log_enclosure(a, prec), eb = log_enclosure(b, prec);
  return mpfr_less_p(ea.hi.get(), eb.lo.get());
}

}  // namespace

TEST(Alpha, Examples) {
  EXPECT_EQ(alpha(1), 1024u);
  EXPECT_EQ(alpha(2), 8192u);
  EXPECT_EQ(alpha(4), 65536u);
  EXPECT_THROW(alpha(0), std::invalid_argument);
}

TEST(EndomorphismFieldDegree, MatchesBigIntegerOracle) {
  EXPECT_EQ(endomorphism_field_degree_bound(1), 162);
  EXPECT_EQ(endomorphism_field_degree_bound(2), 209952);
  EXPECT_EQ(endomorphism_field_degree_bound(3), 774840978);
  for (unsigned g = 1; g <= 12; ++g)
    EXPECT_EQ(to_cpp(endomorphism_field_degree_bound(g)), 2 * cpp_pow(9 * g, 2 * g)) << g;
}

TEST(BoundB, SmallestCaseIsFourteenToThe65536) {
  auto e = bound_b(1, 1, 1);
  auto v = exact_value(e);
  ASSERT_TRUE(v.has_value());
  ASSERT_EQ(v->get_den(), 1);
  const cpp_int oracle = cpp_pow(14, 65536);
  EXPECT_EQ(to_cpp(v->get_num()), oracle);
  const u64 bits = cpp_bits(oracle);
  EXPECT_EQ(mpz_sizeinbase(v->get_num_mpz_t(), 2), bits);
  auto bb = bit_length_bounds(e);
  EXPECT_LE(bb.lower, bits);
  EXPECT_GE(bb.upper, bits);
  EXPECT_LE(bb.upper - bb.lower, 1u);
  EXPECT_EQ(to_string(e), "b(1,1,1)");
  EXPECT_EQ(to_string(e, false), "(14^64 * 1 * max(1, ln(1), 1)^2)^1024");
}

TEST(BoundB, ZeroHeightClampsToOne) {
  auto a = bound_b(1, 1, 0), b = bound_b(1, 1, 1);
  EXPECT_TRUE(same_structure(simplify(a), simplify(b)));
  EXPECT_EQ(exact_value(a), exact_value(b));
  // a negative height is also clamped
  EXPECT_EQ(exact_value(bound_b(1, 1, mpq_class(-7, 3))), exact_value(b));
}

TEST(BoundB, LogBelowOneIsPrunedForDegreeTwo) {
  auto s = simplify(bound_b(2, 2, 1));
  auto expect = power_of(product_of({power_of(rat(28), 256), rat(2), power_of(rat(1), 2)}), 8192);
  EXPECT_TRUE(same_structure(s, expect)) << to_string(s, false);
  // Compare the exact value against a modular oracle: the number has ~10^7 bits.
  auto v = exact_value(bound_b(2, 2, 1));
  ASSERT_TRUE(v.has_value());
  const cpp_int base = cpp_pow(28, 256) * 2;
  for (u64 m : {1000000007ull, 998244353ull, 2305843009213693951ull}) {
    mpz_class r;
    mpz_class mz(std::to_string(m));
    mpz_mod(r.get_mpz_t(), v->get_num_mpz_t(), mz.get_mpz_t());
    EXPECT_EQ(to_cpp(r), boost::multiprecision::powm(base, 8192, cpp_int(m))) << m;
  }
  auto bb = bit_length_bounds(bound_b(2, 2, 1));
  const u64 bits = mpz_sizeinbase(v->get_num_mpz_t(), 2);
  EXPECT_LE(bb.lower, bits);
  EXPECT_GE(bb.upper, bits);
}

TEST(BoundB, LogSurvivesWhenItDominates) {
  // ln 20 ~ 2.996 > 1 and > h = 2
  auto e = bound_b(20, 1, 2);
  EXPECT_FALSE(exact_value(e).has_value());
  auto s = simplify(e);
  const auto& mx = s->children[0]->children[2]->children[0];
  EXPECT_EQ(mx->kind, ExprKind::NaturalLog);
  // h = 3 beats ln 20 and the max becomes exact again
  EXPECT_TRUE(exact_value(bound_b(20, 1, 3)).has_value());
}

TEST(ExactValue, RationalPowers) {
  EXPECT_EQ(exact_value(power_of(rat(81, 16), mpq_class(3, 4))), mpq_class(27, 8));
  EXPECT_EQ(exact_value(power_of(rat(4), mpq_class(-1, 2))), mpq_class(1, 2));
  EXPECT_FALSE(exact_value(power_of(rat(2), mpq_class(1, 2))).has_value());
  EXPECT_FALSE(exact_value(natural_log(2)).has_value());
  EXPECT_EQ(exact_value(natural_log(1)), mpq_class(0));
  EXPECT_EQ(exact_value(max_of({rat(-5), rat(3, 2)})), mpq_class(3, 2));
  // bit cap
  EXPECT_FALSE(exact_value(power_of(rat(3), 1 << 20), 1000).has_value());
  EXPECT_TRUE(exact_value(power_of(rat(3), 100), 1000).has_value());
}

TEST(LogEnclosure, ContainsExactValuesOnRandomTrees) {
  std::mt19937_64 rng(17);
  std::function<ExactExpr(int)> gen = [&](int depth) -> ExactExpr {
    const int k = depth == 0 ? static_cast<int>(rng() % 2) : static_cast<int>(rng() % 5);
    switch (k) {
      case 0:
        return rat(1 + rng() % 50, 1 + rng() % 7);
      case 1:
        return natural_log(1 + rng() % 40);
      case 2:
        return max_of({gen(depth - 1), gen(depth - 1), rat(-static_cast<long>(rng() % 5))});
      case 3:
        return product_of({gen(depth - 1), gen(depth - 1)});
      default:
        return power_of(gen(depth - 1), mpq_class(static_cast<long>(rng() % 7) - 2, 1 + rng() % 3));
    }
  };
  int exact_checked = 0;
  for (int it = 0; it < 400; ++it) {
    auto e = gen(3);
    LogEnclosure prev = log_enclosure(e, 53);
    for (mpfr_prec_t p : {106, 212, 424}) {
      auto cur = log_enclosure(e, p);
      EXPECT_TRUE(prev.contains(cur)) << to_string(e);
      prev = cur;
    }
    if (auto v = exact_value(e, 4096)) {
      if (*v <= 0) continue;
      ++exact_checked;
      // exact value must lie in the value enclosure: compare exp(lo) <= v <= exp(hi)
      Mpfr lv(424);
      mpfr_set_q(lv.get(), v->get_mpq_t(), MPFR_RNDN);
      mpfr_log(lv.get(), lv.get(), MPFR_RNDN);
      EXPECT_TRUE(mpfr_lessequal_p(prev.lo.get(), lv.get()) && mpfr_lessequal_p(lv.get(), prev.hi.get()))
          << to_string(e);
    }
  }
  EXPECT_GT(exact_checked, 50);
}

TEST(LogEnclosure, NestedOnBoundGrid) {
  for (u64 d = 1; d <= 4; ++d)
    for (u64 g = 1; g <= 4; ++g)
      for (long h : {0, 1, 10, 100}) {
        auto e = bound_b(d, g, h);
        auto a = log_enclosure(e, 64), b = log_enclosure(e, 128), c = log_enclosure(e, 256);
        EXPECT_TRUE(a.contains(b));
        EXPECT_TRUE(b.contains(c));
      }
}

TEST(LogEnclosure, RejectsNegativeOutsideMax) {
  EXPECT_THROW(log_enclosure(rat(-1), 64), std::domain_error);
  EXPECT_THROW(log_enclosure(product_of({rat(2), rat(-1)}), 64), std::domain_error);
  EXPECT_THROW(log_enclosure(max_of({rat(-1), rat(-2)}), 64), std::domain_error);
  EXPECT_THROW(natural_log(mpq_class(1, 2)), std::invalid_argument);
}

TEST(BoundB, MonotoneInEachParameter) {
  const std::vector<long> hs = {0, 1, 10, 100};
  for (u64 d = 1; d <= 4; ++d)
    for (u64 g = 1; g <= 4; ++g)
      for (std::size_t hi = 0; hi < hs.size(); ++hi) {
        auto e = bound_b(d, g, hs[hi]);
        if (d < 4) {
          EXPECT_TRUE(certified_less(e, bound_b(d + 1, g, hs[hi])));
        }
        if (g < 4) {
          EXPECT_TRUE(certified_less(e, bound_b(d, g + 1, hs[hi])));
        }
        if (hi + 1 < hs.size()) {
          auto next = bound_b(d, g, hs[hi + 1]);
          EXPECT_FALSE(certified_less(next, e));
          if (hs[hi] >= 1) {
            EXPECT_TRUE(certified_less(e, next));
          }
        }
      }
}

TEST(ComparePrime, Examples) {
  auto r = compare_prime(2, bound_b(1, 1, 1));
  EXPECT_EQ(r.cmp, Comparison::PrimeBelow);
  r = compare_prime(3, rat(3));
  EXPECT_EQ(r.cmp, Comparison::Indeterminate);
  EXPECT_EQ(r.reason, "equal");
  EXPECT_EQ(compare_prime(5, rat(7, 2)).cmp, Comparison::PrimeAbove);
  EXPECT_THROW(compare_prime(4, rat(1)), std::invalid_argument);
}

TEST(ComparePrime, AgreesWithBigIntegerOracleNearPowers) {
  // e = (m)^(1/2) with m near p^2: the root is irrational so the interval path decides.
  std::mt19937_64 rng(3);
  int checked = 0;
  while (checked < 60) {
    u64 p = (rng() >> 4) | 1;
    if (!is_prime_u64(p)) continue;
    const cpp_int p2 = cpp_int(p) * p;
    const long delta = static_cast<long>(rng() % 9) - 4;
    if (delta == 0) continue;
    const cpp_int m = p2 + delta;
    auto e = power_of(rat_z(mpz_class(m.str())), mpq_class(1, 2));
    auto r = compare_prime(p, e, 1024);
    ASSERT_NE(r.cmp, Comparison::Indeterminate);
    EXPECT_EQ(r.reason, "interval");
    EXPECT_EQ(r.cmp == Comparison::PrimeAbove, p2 > m);
    ++checked;
  }
}

TEST(ComparePrime, CloseCallNeedsMorePrecision) {
  const u64 p = 2305843009213693951ull;  // 2^61 - 1
  mpz_class m = mpz_class(std::to_string(p));
  m = m * m + 1;
  auto e = power_of(rat_z(m), mpq_class(1, 2));
  auto low = compare_prime(p, e, 64);
  EXPECT_EQ(low.cmp, Comparison::Indeterminate);
  EXPECT_EQ(low.reason, "precision cap");
  auto high = compare_prime(p, e, 512);
  EXPECT_EQ(high.cmp, Comparison::PrimeBelow);
  EXPECT_GT(high.precision, 64);
}

TEST(ComparePrime, Antisymmetric) {
  std::vector<u64> primes = {2, 3, 5, 7, 11, 101, 65537, 1000000007, 2305843009213693951ull};
  for (u64 p : primes)
    for (u64 q : primes) {
      auto a = compare_prime(p, rat_z(mpz_class(std::to_string(q))));
      auto b = compare_prime(q, rat_z(mpz_class(std::to_string(p))));
      if (p == q) {
        EXPECT_EQ(a.cmp, Comparison::Indeterminate);
        EXPECT_EQ(a.reason, "equal");
      } else {
        EXPECT_EQ(a.cmp == Comparison::PrimeAbove, b.cmp == Comparison::PrimeBelow);
        EXPECT_EQ(a.cmp == Comparison::PrimeAbove, p > q);
      }
    }
}

TEST(ComparePrime, ConsistentWithBitLengthOracle) {
  // the primes on either side of 14^k, k = 1..16
  std::vector<u64> primes;
  for (unsigned k = 1; k <= 16; ++k) {
    const u64 v = ipow(14, k);
    u64 a = v - 1, b = v + 1;
    while (!is_prime_u64(a)) --a;
    while (!is_prime_u64(b)) ++b;
    primes.push_back(a);
    primes.push_back(b);
  }
  for (unsigned k = 1; k <= 16; ++k) {
    const cpp_int v = cpp_pow(14, k);
    auto e = power_of(rat(14), k);
    for (u64 p : primes) {
      auto r = compare_prime(p, e);
      const cpp_int pc(p);
      EXPECT_EQ(r.cmp, pc > v ? Comparison::PrimeAbove : Comparison::PrimeBelow) << p << " vs 14^" << k;
    }
  }
  for (u64 p : primes) {
    EXPECT_EQ(compare_prime(p, bound_b(1, 1, 1)).cmp, Comparison::PrimeBelow);
    // exact path disabled: intervals must agree
    auto r = compare_prime(p, bound_b(1, 1, 1), 4096, 0);
    EXPECT_EQ(r.cmp, Comparison::PrimeBelow);
    EXPECT_EQ(r.reason, "interval");
  }
}

TEST(Threshold, Structure) {
  VarietyDescriptor t;
  t.degree_K = 1;
  t.faltings_height = 1;
  EXPECT_TRUE(same_structure(threshold_for(t), power_of(bound_b(2, 4, 2), mpq_class(1, 4))));
  EXPECT_EQ(to_string(threshold_for(t)), "b(2,4,2)^(1/4)");

  VarietyDescriptor rm = t;
  rm.endo_type = EndoKind::RealMultSurface;
  rm.disc_E = 5;
  EXPECT_TRUE(same_structure(threshold_for(rm), power_of(bound_b(2, 4, 2), mpq_class(1, 2))));

  VarietyDescriptor qm = t;
  qm.endo_type = EndoKind::QuaternionMult;
  qm.delta = 6;
  EXPECT_TRUE(same_structure(threshold_for(qm), power_of(bound_b(2, 4, 2), mpq_class(1, 2))));

  VarietyDescriptor gl = t;
  gl.endo_type = EndoKind::GL2Type;
  gl.field_degree = 2;
  gl.disc_E = 5;
  auto th = threshold_for(gl);
  ASSERT_EQ(th->kind, ExprKind::Max);
  EXPECT_TRUE(same_structure(th->children[0], power_of(bound_b(1, 2, 1), 2)));
  EXPECT_TRUE(same_structure(th->children[1], power_of(bound_b(2, 4, 2), mpq_class(1, 2))));
  EXPECT_TRUE(certified_less(th->children[0], th->children[1]));
}

TEST(Threshold, TrivialEndoBelowRealMultiplication) {
  for (u64 d : {1, 2, 3})
    for (long h : {-3, 0, 1, 10}) {
      VarietyDescriptor t;
      t.degree_K = d;
      t.faltings_height = h;
      VarietyDescriptor rm = t;
      rm.endo_type = EndoKind::RealMultSurface;
      rm.disc_E = 8;
      EXPECT_TRUE(certified_less(threshold_for(t), threshold_for(rm)));
    }
}

TEST(Threshold, AuxiliaryBoundsAreDominated) {
  VarietyDescriptor rm;
  rm.endo_type = EndoKind::RealMultSurface;
  rm.disc_E = 5;
  rm.faltings_height = 1;
  auto gp = good_prime_bound(rm);
  EXPECT_TRUE(same_structure(gp, power_of(bound_b(1, 2, 1), 2)));
  EXPECT_EQ(gp->value, rm.dim);
  EXPECT_TRUE(certified_less(gp, threshold_for(rm)));

  for (u64 d : {1, 2, 3})
    for (long h : {1, 10}) {
      VarietyDescriptor qm;
      qm.endo_type = EndoKind::QuaternionMult;
      qm.delta = 6;
      qm.degree_K = d;
      qm.faltings_height = h;
      auto qb = quaternion_index_bound(qm);
      EXPECT_EQ(qb->value, 4);
      EXPECT_TRUE(same_structure(qb, power_of(bound_b(d, 2, h), 4)));
      EXPECT_TRUE(certified_less(qb, threshold_for(qm)));
    }
  EXPECT_THROW(good_prime_bound(VarietyDescriptor{}), std::invalid_argument);
}

TEST(Descriptor, ValidationRejectsInconsistentData) {
  VarietyDescriptor d;
  d.dim = 3;
  EXPECT_THROW(validate(d), std::invalid_argument);
  d = {};
  d.endo_type = EndoKind::GL2Type;
  d.field_degree = 3;
  d.disc_E = 5;
  EXPECT_THROW(validate(d), std::invalid_argument);
  d.dim = 3;
  EXPECT_NO_THROW(validate(d));
  d = {};
  d.endo_type = EndoKind::QuaternionMult;
  EXPECT_THROW(validate(d), std::invalid_argument);
  d = {};
  d.ramified_primes_K = {4};
  EXPECT_THROW(validate(d), std::invalid_argument);
}

TEST(CheckPrime, SideConditions) {
  VarietyDescriptor t;
  t.faltings_height = 1;
  t.ramified_primes_K = {11};
  auto v = check_prime_admissible(t, 11);
  EXPECT_FALSE(v.admissible);
  ASSERT_GE(v.failed_conditions.size(), 2u);
  EXPECT_EQ(v.failed_conditions[0].tag, FailedCondition::BelowThreshold);
  EXPECT_EQ(v.failed_conditions[1].tag, FailedCondition::RamifiedInK);
  EXPECT_EQ(v.expected_image.kind, "GSp4");

  VarietyDescriptor qm;
  qm.endo_type = EndoKind::QuaternionMult;
  qm.delta = 6;
  qm.faltings_height = 1;
  v = check_prime_admissible(qm, 3);
  bool divides = false;
  for (auto& r : v.failed_conditions) divides |= r.tag == FailedCondition::DividesDelta;
  EXPECT_TRUE(divides);

  t.ramified_primes_K.clear();
  v = check_prime_admissible(t, 11);
  ASSERT_EQ(v.failed_conditions.size(), 1u);
  EXPECT_EQ(v.failed_conditions[0].tag, FailedCondition::BelowThreshold);
  EXPECT_EQ(v.comparison.cmp, Comparison::PrimeBelow);
  EXPECT_GT(v.threshold_bits.lower, 1000000u);
}

TEST(CheckPrime, SemistabilityAndEndomorphismConditions) {
  VarietyDescriptor t;
  t.non_semistable_primes = {13};
  t.disc_K = mpz_class(-39);
  auto v = check_prime_admissible(t, 13);
  std::set<FailedCondition> tags;
  for (auto& r : v.failed_conditions) tags.insert(r.tag);
  EXPECT_TRUE(tags.count(FailedCondition::NotSemistable));
  EXPECT_TRUE(tags.count(FailedCondition::RamifiedInK));

  VarietyDescriptor rm;
  rm.endo_type = EndoKind::RealMultSurface;
  rm.disc_E = 5;
  rm.endos_over_K = false;
  rm.non_semistable_primes = {5};
  v = check_prime_admissible(rm, 5);
  tags.clear();
  for (auto& r : v.failed_conditions) tags.insert(r.tag);
  EXPECT_TRUE(tags.count(FailedCondition::RamifiedInE));
  EXPECT_TRUE(tags.count(FailedCondition::EndosNotOverK));
  EXPECT_FALSE(tags.count(FailedCondition::NotSemistable));
}

TEST(CheckPrime, ExpectedImageSplitting) {
  VarietyDescriptor rm;
  rm.endo_type = EndoKind::RealMultSurface;
  rm.disc_E = 5;
  // 5 is a square mod 11 (4^2) and not mod 13
  EXPECT_EQ(check_prime_admissible(rm, 11).expected_image.kind, "H_split");
  EXPECT_EQ(check_prime_admissible(rm, 13).expected_image.kind, "H_inert");
  VarietyDescriptor qm;
  qm.endo_type = EndoKind::QuaternionMult;
  qm.delta = 6;
  EXPECT_EQ(check_prime_admissible(qm, 7).expected_image.kind, "QM");
}

TEST(CheckPrime, AdmissibleOnlyAboveThreshold) {
  // every threshold is far beyond 64-bit primes
  VarietyDescriptor t;
  auto v = check_prime_admissible(t, 2305843009213693951ull);
  EXPECT_FALSE(v.admissible);
  EXPECT_EQ(v.comparison.cmp, Comparison::PrimeBelow);
  EXPECT_EQ(v.admissible, v.failed_conditions.empty() && v.comparison.cmp == Comparison::PrimeAbove);
}
