#pragma once

/**
 * @file inertia.hpp
 * @brief Tame-inertia bookkeeping for the l-torsion of an abelian variety
 *        with semistable reduction at an unramified place.
 *
 * A tame inertia element is modelled only by the values the characters
 * take on it. Every character is a power of one fundamental character of
 * level L, and a maximal-order element sends that character to a generator
 * of F_{l^L}^x. So a character becomes an exponent d modulo M = l^L - 1:
 *   trivial      -> 0
 *   cyclotomic   -> M / (l - 1)
 *   level n, e   -> (M / (l^n - 1)) * sum_i e_i l^i
 * Equalities between character values at that element are congruences
 * modulo M.
 */

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "galsurj/arith.hpp"
#include "galsurj/finitefield.hpp"

namespace galsurj {

enum class CharKind { Trivial, Cyclotomic, Fundamental };

/// One Jordan-Holder factor of the tame inertia action: a trivial or
/// cyclotomic line, or an irreducible piece of dimension n on which inertia
/// acts through phi^(sum e_i l^i) for a fundamental character phi of level n.
struct InertiaChar {
  CharKind kind = CharKind::Trivial;
  std::vector<int> exponents;  // Fundamental only, length n >= 2

  int dimension() const { return kind == CharKind::Fundamental ? static_cast<int>(exponents.size()) : 1; }
  bool operator==(const InertiaChar&) const = default;
  auto operator<=>(const InertiaChar&) const = default;
};

inline InertiaChar trivial_char() { return {CharKind::Trivial, {}}; }
inline InertiaChar cyclotomic_char() { return {CharKind::Cyclotomic, {}}; }
inline InertiaChar fundamental_char(std::vector<int> e) {
  if (e.size() < 2) throw std::invalid_argument("fundamental character needs level >= 2");
  for (int x : e)
    if (x != 0 && x != 1) throw std::invalid_argument("exponents must be 0 or 1");
  if (std::all_of(e.begin(), e.end(), [&](int x) { return x == e[0]; }))
    throw std::invalid_argument("constant exponent vector: the character has a smaller level");
  return {CharKind::Fundamental, std::move(e)};
}
// The two conjugate level-2 characters: index 1 is phi, index 2 is phi^l.
inline InertiaChar level2_char(int conjugate_index) {
  if (conjugate_index == 1) return fundamental_char({1, 0});
  if (conjugate_index == 2) return fundamental_char({0, 1});
  throw std::invalid_argument("level-2 conjugate index must be 1 or 2");
}

inline std::string to_string(const InertiaChar& c) {
  switch (c.kind) {
    case CharKind::Trivial:
      return "1";
    case CharKind::Cyclotomic:
      return "chi";
    case CharKind::Fundamental: {
      std::string s = "phi" + std::to_string(c.exponents.size()) + "[";
      for (int x : c.exponents) s += static_cast<char>('0' + x);
      return s + "]";
    }
  }
  return "";
}

struct SurfaceCounts {
  int m0 = 0, m1 = 0, m2 = 0;  // trivial, cyclotomic, level-2 factors
};

struct InertiaPattern {
  u64 l = 0;
  std::vector<InertiaChar> entries;

  int dimension() const {
    int d = 0;
    for (auto& c : entries) d += c.dimension();
    return d;
  }
  int max_level() const {
    int m = 1;
    for (auto& c : entries) m = std::max(m, c.dimension());
    return m;
  }
  SurfaceCounts counts() const {
    SurfaceCounts s;
    for (auto& c : entries) {
      if (c.kind == CharKind::Trivial) ++s.m0;
      if (c.kind == CharKind::Cyclotomic) ++s.m1;
      if (c.kind == CharKind::Fundamental) {
        if (c.dimension() != 2) throw std::invalid_argument("surface counts only cover levels 1 and 2");
        ++s.m2;
      }
    }
    return s;
  }
  // Exponent of chi in the determinant: each level-n factor contributes the
  // norm of its character, chi^(sum e_i).
  int determinant_exponent() const {
    int s = 0;
    for (auto& c : entries) {
      if (c.kind == CharKind::Cyclotomic) ++s;
      if (c.kind == CharKind::Fundamental) s += std::accumulate(c.exponents.begin(), c.exponents.end(), 0);
    }
    return s;
  }
};

inline std::string to_string(const InertiaPattern& p) {
  std::string s = "{";
  for (std::size_t i = 0; i < p.entries.size(); ++i) {
    if (i) s += ", ";
    s += to_string(p.entries[i]);
  }
  return s + "}";
}

/// The three eigenvalue shapes on l-torsion of a surface, ordered m0 = 2, 1, 0.
inline std::vector<InertiaPattern> enumerate_surface_patterns(u64 l) {
  if (!is_prime_u64(l)) throw std::invalid_argument("l must be prime");
  if (l <= 7) throw std::invalid_argument("surface patterns need l > 7");
  std::vector<InertiaPattern> out;
  for (int m0 = 2; m0 >= 0; --m0) {
    // m0 + m1 + 2 m2 = 4 and m1 + m2 = 2
    const int m2 = 2 - m0, m1 = 2 - m2;
    InertiaPattern p{l, {}};
    for (int i = 0; i < m0; ++i) p.entries.push_back(trivial_char());
    for (int i = 0; i < m1; ++i) p.entries.push_back(cyclotomic_char());
    for (int i = 0; i < m2; ++i) p.entries.push_back(level2_char(1));
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Eigenvalue systems over F_{l^2}

/// Eigenvalues of a tame element whose level-2 fundamental character value
/// is `gen`. Each level-2 factor contributes its character and its
/// Frobenius conjugate.
inline std::vector<FqElem> realize_pattern(const FqField& f2, const InertiaPattern& p, const FqElem& gen) {
  if (f2.degree() != 2 || f2.characteristic() != p.l) throw std::invalid_argument("realize_pattern needs F_{l^2}");
  const u64 l = p.l;
  if (f2.is_zero(gen) || f2.mult_order(gen) != l * l - 1)
    throw std::invalid_argument("generator choice must have order l^2 - 1");
  std::vector<FqElem> out;
  for (auto& c : p.entries) {
    switch (c.kind) {
      case CharKind::Trivial:
        out.push_back(f2.one());
        break;
      case CharKind::Cyclotomic:
        out.push_back(f2.from_int(f2.norm(gen)));
        break;
      case CharKind::Fundamental: {
        if (c.dimension() != 2) throw std::invalid_argument("only levels 1 and 2 are realized in F_{l^2}");
        auto psi = f2.pow(gen, c.exponents[0] + c.exponents[1] * l);
        out.push_back(psi);
        out.push_back(f2.frobenius(psi));
        break;
      }
    }
  }
  return out;
}

struct OrderingResult {
  bool orderable = false;
  std::array<int, 4> permutation{};  // lambda_{k+1} = S[permutation[k]]
  int failed_orderings = 0;          // out of 24
};

inline bool cubic_relations_hold(const FqField& f, const FqElem& a, const FqElem& b, const FqElem& c,
                                 const FqElem& d) {
  return f.mul(a, d) == f.mul(b, c) && f.mul(b, d) == f.mul(c, c) && f.mul(a, c) == f.mul(b, b);
}

/// Tries all 24 numberings of the four eigenvalues against the relations
/// satisfied by {a^3, a^2 d, a d^2, d^3}.
inline OrderingResult eigenvalue_system_admits_ordering(const FqField& f, const std::vector<FqElem>& s) {
  if (s.size() != 4) throw std::invalid_argument("eigenvalue system must have four entries");
  OrderingResult r;
  std::array<int, 4> perm{0, 1, 2, 3};
  do {
    if (cubic_relations_hold(f, s[perm[0]], s[perm[1]], s[perm[2]], s[perm[3]])) {
      if (!r.orderable) {
        r.orderable = true;
        r.permutation = perm;
      }
    } else {
      ++r.failed_orderings;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return r;
}

struct PatternWitness {
  InertiaPattern pattern;
  bool found = false;
  std::uint32_t generator_index = 0;  // FqField::index of the generator used
  FqElem generator;
  std::vector<FqElem> eigenvalues;
  int failed_orderings = 0;
  std::uint32_t generators_tried = 0;
};

struct TwistedCubicReport {
  u64 l = 0;
  bool verified = false;
  std::vector<PatternWitness> witnesses;
};

/// For each surface pattern, the first generator of F_{l^2}^x (by index)
/// whose eigenvalue system admits no numbering compatible with a twisted
/// cubic.
inline TwistedCubicReport verify_no_twisted_cubic(u64 l) {
  auto patterns = enumerate_surface_patterns(l);
  auto f2 = make_field(static_cast<std::uint32_t>(l), 2);
  const u64 order = l * l - 1;
  auto factors = factor_small(order);
  std::vector<FqElem> generators;
  for (std::uint32_t i = 1; i < f2.size(); ++i) {
    auto x = f2.from_index(i);
    bool prim = true;
    for (auto& pf : factors)
      if (f2.pow(x, order / pf.first) == f2.one()) {
        prim = false;
        break;
      }
    if (prim) generators.push_back(x);
  }
  TwistedCubicReport rep{l, true, {}};
  for (auto& p : patterns) {
    PatternWitness w;
    w.pattern = p;
    for (auto& g : generators) {
      ++w.generators_tried;
      auto ev = realize_pattern(f2, p, g);
      auto r = eigenvalue_system_admits_ordering(f2, ev);
      if (!r.orderable) {
        w.found = true;
        w.generator = g;
        w.generator_index = f2.index(g);
        w.eigenvalues = ev;
        w.failed_orderings = r.failed_orderings;
        break;
      }
    }
    rep.verified = rep.verified && w.found;
    rep.witnesses.push_back(std::move(w));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Projective exponent of a tame element

namespace detail {

inline u128 gcd_u128(u128 a, u128 b) {
  while (b) {
    u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline u128 pow_u128(u64 b, int e) {
  u128 r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > ~u128{0} / b) throw std::overflow_error("l^L does not fit in 128 bits");
    r *= b;
  }
  return r;
}

}  // namespace detail

/// Character exponents at a maximal-order tame element, modulo `modulus`.
struct CharacterExponents {
  u128 modulus = 0;  // l^L - 1
  int level = 1;     // L
  std::vector<u128> exponents;
};

inline CharacterExponents character_exponents(const InertiaPattern& p) {
  int L = 1;
  for (auto& c : p.entries) L = std::lcm(L, c.dimension());
  CharacterExponents ce;
  ce.level = L;
  ce.modulus = detail::pow_u128(p.l, L) - 1;
  for (auto& c : p.entries) {
    switch (c.kind) {
      case CharKind::Trivial:
        ce.exponents.push_back(0);
        break;
      case CharKind::Cyclotomic:
        ce.exponents.push_back(ce.modulus / (p.l - 1));
        break;
      case CharKind::Fundamental: {
        const int n = c.dimension();
        u128 s = 0, li = 1;
        for (int i = 0; i < n; ++i) {
          if (c.exponents[i]) s += li;
          li *= p.l;
        }
        ce.exponents.push_back(ce.modulus / (detail::pow_u128(p.l, n) - 1) * s);
        break;
      }
    }
  }
  return ce;
}

struct MinNResult {
  bool contradiction = false;
  u64 value = 0;     // least N found, or l^2 + 1 as a lower bound
  bool exact = false;  // false when no N <= l^2 works
};

inline void check_pattern_admissible(u64 l, int g, const InertiaPattern& p) {
  if (!is_prime_u64(l)) throw std::invalid_argument("l must be prime");
  if (g < 1) throw std::invalid_argument("g must be positive");
  if (l < static_cast<u64>(g) + 2) throw std::invalid_argument("need l >= g + 2");
  if (p.l != l) throw std::invalid_argument("pattern prime differs from l");
  if (p.dimension() != 2 * g) throw std::invalid_argument("pattern dimension must be 2g");
  for (auto& c : p.entries) {
    if (c.dimension() > 2 * g) throw std::invalid_argument("character level exceeds 2g");
    if (c.kind == CharKind::Fundamental) (void)fundamental_char(c.exponents);
  }
}

/// Least N with psi_i(x)^(l^t N) = psi_j(x)^N for all factors i, j and
/// t in {0, 1}, at a maximal-order tame element x. Patterns whose
/// determinant is not chi^g cannot occur and give Contradiction.
///
/// Note the t = 1, i = j conditions give psi_i^(l N) = psi_i^N, which
/// makes every larger t follow from t in {0, 1}.
inline MinNResult minimal_projective_exponent(u64 l, int g, const InertiaPattern& p) {
  check_pattern_admissible(l, g, p);
  MinNResult r;
  const long det = p.determinant_exponent();
  if (((det - g) % static_cast<long>(l - 1) + static_cast<long>(l - 1)) % static_cast<long>(l - 1) != 0) {
    r.contradiction = true;
    return r;
  }
  auto ce = character_exponents(p);
  const u128 M = ce.modulus;
  std::vector<u128> diffs;
  for (u128 di : ce.exponents)
    for (u128 dj : ce.exponents)
      for (int t = 0; t < 2; ++t) {
        u128 a = t ? (di * l) % M : di;
        u128 v = (a + M - dj) % M;
        if (v) diffs.push_back(v);
      }
  std::sort(diffs.begin(), diffs.end());
  diffs.erase(std::unique(diffs.begin(), diffs.end()), diffs.end());
  const u64 limit = l * l;
  for (u64 n = 1; n <= limit; ++n) {
    bool ok = true;
    for (u128 v : diffs)
      if ((v * n) % M != 0) {
        ok = false;
        break;
      }
    if (ok) {
      r.value = n;
      r.exact = true;
      return r;
    }
  }
  r.value = limit + 1;
  return r;
}

/// Every multiset of Jordan-Holder factors of total dimension 2g, with
/// fundamental levels up to 2g and exponent vectors in {0,1}^n that are
/// not constant.
inline std::vector<InertiaPattern> enumerate_admissible_patterns(u64 l, int g) {
  std::vector<InertiaChar> types = {trivial_char(), cyclotomic_char()};
  for (int n = 2; n <= 2 * g; ++n)
    for (u64 mask = 1; mask + 1 < (u64{1} << n); ++mask) {
      std::vector<int> e(n);
      for (int i = 0; i < n; ++i) e[i] = (mask >> i) & 1;
      types.push_back(fundamental_char(e));
    }
  std::vector<InertiaPattern> out;
  std::vector<InertiaChar> cur;
  auto rec = [&](auto&& self, std::size_t from, int remaining) -> void {
    if (remaining == 0) {
      out.push_back(InertiaPattern{l, cur});
      return;
    }
    for (std::size_t i = from; i < types.size(); ++i) {
      if (types[i].dimension() > remaining) continue;
      cur.push_back(types[i]);
      self(self, i, remaining - types[i].dimension());
      cur.pop_back();
    }
  };
  rec(rec, 0, 2 * g);
  return out;
}

struct LowerBoundReport {
  u64 l = 0;
  int g = 0;
  bool verified = false;
  std::size_t patterns = 0, contradictions = 0, inexact = 0;
  u64 smallest_n = 0;  // least MinN over non-contradictory patterns
  std::optional<InertiaPattern> failing;
};

/// Checks that every admissible pattern forces a projective image of
/// order at least l - 1 or is impossible.
inline LowerBoundReport verify_lower_bound(u64 l, int g) {
  if (g < 1 || g > 4) throw std::invalid_argument("g must be in 1..4");
  if (!is_prime_u64(l)) throw std::invalid_argument("l must be prime");
  if (l < static_cast<u64>(g) + 2 || l > 47) throw std::invalid_argument("need g + 2 <= l <= 47");
  LowerBoundReport rep;
  rep.l = l;
  rep.g = g;
  rep.verified = true;
  rep.smallest_n = ~u64{0};
  for (auto& p : enumerate_admissible_patterns(l, g)) {
    ++rep.patterns;
    auto r = minimal_projective_exponent(l, g, p);
    if (r.contradiction) {
      ++rep.contradictions;
      continue;
    }
    if (!r.exact) ++rep.inexact;
    rep.smallest_n = std::min(rep.smallest_n, r.value);
    if (r.value < l - 1 && rep.verified) {
      rep.verified = false;
      rep.failing = p;
    }
  }
  return rep;
}

}  // namespace galsurj
