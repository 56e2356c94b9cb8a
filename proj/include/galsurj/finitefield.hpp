#pragma once

/**
 * @file finitefield.hpp
 * @brief Prime fields F_l and small extensions F_{l^n}, n <= 4.
 *
 * Both field classes are "context" objects: elements are plain values and
 * every operation goes through the field, e.g. `F.mul(a, b)`. Matrix and
 * group code is templated on the field type and only uses the common
 * interface (zero, one, add, sub, neg, mul, inv, from_int, index, ...).
 *
 * Extension elements are dense coefficient vectors, least-degree-first.
 */

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "galsurj/arith.hpp"

namespace galsurj {

class PrimeField {
 public:
  using element = std::uint32_t;

  explicit PrimeField(u64 p) : p_(static_cast<std::uint32_t>(p)) {
    if (!is_prime_u64(p)) throw std::invalid_argument("characteristic " + std::to_string(p) + " is not prime");
    if (p >= (1ULL << 31)) throw std::invalid_argument("characteristic too large for word arithmetic");
  }

  std::uint32_t characteristic() const { return p_; }
  int degree() const { return 1; }
  u64 size() const { return p_; }

  element zero() const { return 0; }
  element one() const { return 1; }
  element from_int(std::int64_t v) const {
    std::int64_t r = v % static_cast<std::int64_t>(p_);
    return static_cast<element>(r < 0 ? r + p_ : r);
  }
  bool is_zero(element a) const { return a == 0; }
  bool eq(element a, element b) const { return a == b; }
  element add(element a, element b) const {
    std::uint32_t s = a + b;
    return s >= p_ ? s - p_ : s;
  }
  element sub(element a, element b) const { return a >= b ? a - b : a + p_ - b; }
  element neg(element a) const { return a ? p_ - a : 0; }
  element mul(element a, element b) const {
    return static_cast<element>(static_cast<u64>(a) * b % p_);
  }
  element pow(element a, u64 e) const { return static_cast<element>(powmod(a, e, p_)); }
  element inv(element a) const {
    if (a == 0) throw std::domain_error("inverse of zero");
    return pow(a, p_ - 2);
  }
  element div(element a, element b) const { return mul(a, inv(b)); }

  std::uint32_t index(element a) const { return a; }
  element from_index(std::uint32_t i) const { return i; }

  bool in_prime_field(element) const { return true; }
  element frobenius(element a) const { return a; }

  bool is_square(element a) const { return a == 0 || p_ == 2 || pow(a, (p_ - 1) / 2) == 1; }

  bool operator==(const PrimeField& o) const { return p_ == o.p_; }

 private:
  std::uint32_t p_;
};

struct FqElem {
  std::array<std::uint32_t, 4> c{};
  bool operator==(const FqElem&) const = default;
  auto operator<=>(const FqElem&) const = default;
};

namespace detail {

using Poly = std::vector<std::uint32_t>;  // least-degree-first over F_p

inline void trim(Poly& f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
}

inline Poly poly_mod(Poly a, const Poly& m, std::uint32_t p) {
  trim(a);
  const std::size_t dm = m.size() - 1;
  const std::uint32_t lead_inv = static_cast<std::uint32_t>(powmod(m.back(), p - 2, p));
  while (a.size() > dm) {
    u64 c = static_cast<u64>(a.back()) * lead_inv % p;
    std::size_t shift = a.size() - 1 - dm;
    for (std::size_t i = 0; i <= dm; ++i) {
      a[shift + i] = static_cast<std::uint32_t>((a[shift + i] + (p - c) * m[i]) % p);
    }
    trim(a);
  }
  return a;
}

inline Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& m, std::uint32_t p) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      r[i + j] = static_cast<std::uint32_t>((r[i + j] + static_cast<u64>(a[i]) * b[j]) % p);
  return poly_mod(std::move(r), m, p);
}

inline Poly poly_powmod(Poly base, u64 e, const Poly& m, std::uint32_t p) {
  Poly r{1};
  base = poly_mod(std::move(base), m, p);
  while (e) {
    if (e & 1) r = poly_mulmod(r, base, m, p);
    base = poly_mulmod(base, base, m, p);
    e >>= 1;
  }
  return r;
}

inline Poly poly_gcd(Poly a, Poly b, std::uint32_t p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = poly_mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

// gcd(x^{p^k} - x, f) = 1 for 1 <= k < n and x^{p^n} = x mod f.
inline bool is_irreducible(const Poly& f, std::uint32_t p) {
  const int n = static_cast<int>(f.size()) - 1;
  if (n < 1) return false;
  if (n == 1) return true;
  Poly xk{0, 1};
  for (int k = 1; k <= n; ++k) {
    xk = poly_powmod(xk, p, f, p);
    Poly d = xk;
    if (d.size() < 2) d.resize(2, 0);
    d[1] = (d[1] + p - 1) % p;
    trim(d);
    if (k < n) {
      Poly g = poly_gcd(f, d, p);
      if (g.size() != 1) return false;
    } else if (!d.empty()) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

class FqField {
 public:
  using element = FqElem;

  // Field with the given monic modulus (coefficients least-degree-first,
  // length n + 1, last entry 1). Irreducibility is checked.
  FqField(u64 l, std::vector<std::uint32_t> modulus) : base_(l) {
    const int n = static_cast<int>(modulus.size()) - 1;
    if (n < 1 || n > 4) throw std::invalid_argument("extension degree must be between 1 and 4");
    if (modulus.back() != 1) throw std::invalid_argument("modulus must be monic");
    for (auto c : modulus)
      if (c >= l) throw std::invalid_argument("modulus coefficient out of range");
    if (!detail::is_irreducible(modulus, static_cast<std::uint32_t>(l)))
      throw std::invalid_argument("modulus is reducible");
    l_ = static_cast<std::uint32_t>(l);
    n_ = n;
    for (int i = 0; i <= n; ++i) mod_[i] = modulus[i];
    q_ = ipow(l, static_cast<unsigned>(n));
    if (q_ > (1ULL << 31)) throw std::invalid_argument("field too large");
  }

  std::uint32_t characteristic() const { return l_; }
  int degree() const { return n_; }
  u64 size() const { return q_; }
  std::vector<std::uint32_t> modulus() const { return {mod_.begin(), mod_.begin() + n_ + 1}; }
  const PrimeField& prime_field() const { return base_; }

  element zero() const { return {}; }
  element one() const {
    element e;
    e.c[0] = 1;
    return e;
  }
  element from_int(std::int64_t v) const {
    element e;
    e.c[0] = base_.from_int(v);
    return e;
  }
  element from_coeffs(const std::vector<std::int64_t>& cs) const {
    if (static_cast<int>(cs.size()) > n_) throw std::invalid_argument("too many coefficients for field degree");
    element e;
    for (std::size_t i = 0; i < cs.size(); ++i) e.c[i] = base_.from_int(cs[i]);
    return e;
  }
  // The class of x, a root of the modulus.
  element gen() const {
    if (n_ == 1) return from_int(static_cast<std::int64_t>(l_) - static_cast<std::int64_t>(mod_[0]));
    element e;
    e.c[1] = 1;
    return e;
  }

  bool is_zero(const element& a) const { return a == element{}; }
  bool eq(const element& a, const element& b) const { return a == b; }

  element add(const element& a, const element& b) const {
    element r;
    for (int i = 0; i < n_; ++i) r.c[i] = base_.add(a.c[i], b.c[i]);
    return r;
  }
  element sub(const element& a, const element& b) const {
    element r;
    for (int i = 0; i < n_; ++i) r.c[i] = base_.sub(a.c[i], b.c[i]);
    return r;
  }
  element neg(const element& a) const {
    element r;
    for (int i = 0; i < n_; ++i) r.c[i] = base_.neg(a.c[i]);
    return r;
  }
  element mul(const element& a, const element& b) const {
    if (n_ == 1) {
      element r;
      r.c[0] = base_.mul(a.c[0], b.c[0]);
      return r;
    }
    if (n_ == 2) {
      // x^2 = -(m0 + m1 x)
      const u64 l = l_;
      const u64 t2 = static_cast<u64>(a.c[1]) * b.c[1] % l;
      const u64 t0 = static_cast<u64>(a.c[0]) * b.c[0] + (l - t2) * mod_[0];
      const u64 t1 = static_cast<u64>(a.c[0]) * b.c[1] + static_cast<u64>(a.c[1]) * b.c[0] + (l - t2) * mod_[1];
      element r;
      r.c[0] = static_cast<std::uint32_t>(t0 % l);
      r.c[1] = static_cast<std::uint32_t>(t1 % l);
      return r;
    }
    std::array<u64, 7> t{};
    for (int i = 0; i < n_; ++i) {
      if (!a.c[i]) continue;
      for (int j = 0; j < n_; ++j) t[i + j] += static_cast<u64>(a.c[i]) * b.c[j];
    }
    for (auto& x : t) x %= l_;
    for (int k = 2 * n_ - 2; k >= n_; --k) {
      u64 c = t[k];
      if (!c) continue;
      t[k] = 0;
      for (int i = 0; i < n_; ++i) t[k - n_ + i] = (t[k - n_ + i] + (l_ - c) * mod_[i]) % l_;
    }
    element r;
    for (int i = 0; i < n_; ++i) r.c[i] = static_cast<std::uint32_t>(t[i]);
    return r;
  }
  element pow(element a, u64 e) const {
    element r = one();
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }
  element inv(const element& a) const {
    if (is_zero(a)) throw std::domain_error("inverse of zero");
    return pow(a, q_ - 2);
  }
  element div(const element& a, const element& b) const { return mul(a, inv(b)); }

  element frobenius(const element& a) const { return pow(a, l_); }
  element frobenius(const element& a, int k) const {
    element r = a;
    for (int i = 0; i < ((k % n_) + n_) % n_; ++i) r = frobenius(r);
    return r;
  }
  bool in_prime_field(const element& a) const {
    for (int i = 1; i < n_; ++i)
      if (a.c[i]) return false;
    return true;
  }

  // prod_{k<n} frob^k(x), returned as an element of the prime field.
  std::uint32_t norm(const element& a) const {
    element r = one();
    element f = a;
    for (int k = 0; k < n_; ++k) {
      r = mul(r, f);
      f = frobenius(f);
    }
    return r.c[0];
  }

  u64 mult_order(const element& a) const {
    if (is_zero(a)) throw std::domain_error("multiplicative order of zero");
    u64 ord = q_ - 1;
    for (auto [p, e] : factor_small(q_ - 1)) {
      for (int i = 0; i < e; ++i) {
        if (pow(a, ord / p) == one())
          ord /= p;
        else
          break;
      }
    }
    return ord;
  }

  // Smallest element (by index) of order q - 1.
  element primitive_element() const {
    for (u64 i = 1; i < q_; ++i) {
      element e = from_index(static_cast<std::uint32_t>(i));
      if (mult_order(e) == q_ - 1) return e;
    }
    throw std::logic_error("no primitive element");
  }

  std::uint32_t index(const element& a) const {
    std::uint32_t r = 0;
    for (int i = n_ - 1; i >= 0; --i) r = r * l_ + a.c[i];
    return r;
  }
  element from_index(std::uint32_t idx) const {
    element e;
    for (int i = 0; i < n_; ++i) {
      e.c[i] = idx % l_;
      idx /= l_;
    }
    return e;
  }

  bool operator==(const FqField& o) const { return l_ == o.l_ && n_ == o.n_ && mod_ == o.mod_; }

 private:
  PrimeField base_;
  std::uint32_t l_ = 0;
  int n_ = 0;
  std::array<std::uint32_t, 5> mod_{};
  u64 q_ = 0;
};

inline std::uint32_t least_nonresidue(std::uint32_t l) {
  for (std::uint32_t a = 2; a < l; ++a)
    if (powmod(a, (l - 1) / 2, l) == l - 1) return a;
  throw std::invalid_argument("no quadratic non-residue");
}

// Deterministic modulus: x for n = 1; x^2 - a with a the least non-residue
// for n = 2 (odd l); otherwise the first monic irreducible when the
// coefficient vector (c_0, ..., c_{n-1}) is read lexicographically.
inline FqField make_field(u64 l, int n) {
  if (!is_prime_u64(l)) throw std::invalid_argument("characteristic " + std::to_string(l) + " is not prime");
  if (n < 1 || n > 4) throw std::invalid_argument("extension degree must be between 1 and 4");
  const auto p = static_cast<std::uint32_t>(l);
  if (n == 1) return FqField(l, {0, 1});
  if (n == 2 && p != 2) return FqField(l, {p - least_nonresidue(p), 0, 1});
  const u64 count = ipow(l, static_cast<unsigned>(n));
  for (u64 code = 0; code < count; ++code) {
    detail::Poly f(n + 1, 0);
    u64 c = code;
    for (int i = n - 1; i >= 0; --i) {
      f[i] = static_cast<std::uint32_t>(c % l);
      c /= l;
    }
    f[n] = 1;
    if (detail::is_irreducible(f, p)) return FqField(l, f);
  }
  throw std::logic_error("no irreducible polynomial found");
}

// Embedding of a subfield: the image of small.gen() is a root of the
// modulus of `small` inside `big`.
class FieldEmbedding {
 public:
  FieldEmbedding(const FqField& small, const FqField& big) : small_(small), big_(big) {
    if (small.characteristic() != big.characteristic() || big.degree() % small.degree() != 0)
      throw std::invalid_argument("no embedding between these fields");
    const auto m = small.modulus();
    for (u64 i = 0; i < big.size(); ++i) {
      const auto x = big.from_index(static_cast<std::uint32_t>(i));
      FqElem v = big.zero();
      for (int k = static_cast<int>(m.size()) - 1; k >= 0; --k) v = big.add(big.mul(v, x), big.from_int(m[k]));
      if (big.is_zero(v)) {
        root_ = x;
        return;
      }
    }
    throw std::logic_error("modulus has no root in the extension");
  }
  FqElem operator()(const FqElem& a) const {
    FqElem r = big_.zero();
    for (int k = small_.degree() - 1; k >= 0; --k) r = big_.add(big_.mul(r, root_), big_.from_int(a.c[k]));
    return r;
  }
  const FqElem& root() const { return root_; }

 private:
  FqField small_, big_;
  FqElem root_;
};

}  // namespace galsurj
