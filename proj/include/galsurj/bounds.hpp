#pragma once

/**
 * @file bounds.hpp
 * @brief Exact expression trees for the isogeny-type bound b(d, g, h) and
 *        the surjectivity thresholds built from it, with certified
 *        comparison against primes.
 *
 * Values are compared through their natural logarithms: every node has a
 * monotone log-domain formula, so an MPFR evaluation with directed rounding
 * yields an enclosure of ln(value). Exact rational evaluation is available
 * while the numbers stay under a bit cap.
 */

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "galsurj/arith.hpp"

namespace galsurj {

enum class ExprKind { RationalConst, NaturalLog, Max, Product, Power };

struct ExprNode;
using ExactExpr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind;
  mpq_class value;  // constant, log argument or power exponent
  std::vector<ExactExpr> children;
  std::string label;  // display name, e.g. "b(2,4,2)"; ignored by comparisons
};

inline constexpr std::size_t kDefaultExactBitCap = std::size_t{1} << 26;
inline constexpr long kDefaultPrecisionCap = 4096;

inline ExactExpr rational_const(const mpq_class& v) {
  mpq_class c = v;
  c.canonicalize();
  return std::make_shared<const ExprNode>(ExprNode{ExprKind::RationalConst, c, {}, {}});
}

inline ExactExpr natural_log(const mpq_class& arg) {
  if (arg < 1) throw std::invalid_argument("natural_log: argument must be >= 1");
  return std::make_shared<const ExprNode>(ExprNode{ExprKind::NaturalLog, arg, {}, {}});
}

inline ExactExpr max_of(std::vector<ExactExpr> children) {
  if (children.empty()) throw std::invalid_argument("max_of: no children");
  return std::make_shared<const ExprNode>(ExprNode{ExprKind::Max, 0, std::move(children), {}});
}

inline ExactExpr product_of(std::vector<ExactExpr> children) {
  if (children.empty()) throw std::invalid_argument("product_of: no children");
  return std::make_shared<const ExprNode>(ExprNode{ExprKind::Product, 0, std::move(children), {}});
}

inline ExactExpr power_of(ExactExpr base, const mpq_class& exponent) {
  mpq_class r = exponent;
  r.canonicalize();
  return std::make_shared<const ExprNode>(ExprNode{ExprKind::Power, r, {std::move(base)}, {}});
}

inline ExactExpr with_label(const ExactExpr& e, std::string label) {
  auto n = std::make_shared<ExprNode>(*e);
  n->label = std::move(label);
  return n;
}

// Structural equality, labels ignored.
inline bool same_structure(const ExactExpr& a, const ExactExpr& b) {
  if (a->kind != b->kind || a->value != b->value || a->children.size() != b->children.size()) return false;
  for (std::size_t i = 0; i < a->children.size(); ++i)
    if (!same_structure(a->children[i], b->children[i])) return false;
  return true;
}

inline std::string rational_string(const mpq_class& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline std::string to_string(const ExactExpr& e, bool use_labels = true) {
  if (use_labels && !e->label.empty()) return e->label;
  switch (e->kind) {
    case ExprKind::RationalConst:
      return rational_string(e->value);
    case ExprKind::NaturalLog:
      return "ln(" + rational_string(e->value) + ")";
    case ExprKind::Max:
    case ExprKind::Product: {
      std::string s = e->kind == ExprKind::Max ? "max(" : "(";
      const char* sep = e->kind == ExprKind::Max ? ", " : " * ";
      for (std::size_t i = 0; i < e->children.size(); ++i) {
        if (i) s += sep;
        s += to_string(e->children[i], use_labels);
      }
      return s + ")";
    }
    case ExprKind::Power: {
      auto base = to_string(e->children[0], use_labels);
      if (e->children[0]->kind == ExprKind::RationalConst && e->children[0]->value.get_den() != 1) base = "(" + base + ")";
      return base + "^" + (e->value.get_den() == 1 ? rational_string(e->value) : "(" + rational_string(e->value) + ")");
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// MPFR enclosures of ln(value)

class Mpfr {
 public:
  explicit Mpfr(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  Mpfr(const Mpfr& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Mpfr& operator=(const Mpfr& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  ~Mpfr() { mpfr_clear(v_); }
  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

 private:
  mpfr_t v_;
};

// [lo, hi] contains ln(value); -inf encodes the value 0.
struct LogEnclosure {
  Mpfr lo, hi;
  explicit LogEnclosure(mpfr_prec_t prec) : lo(prec), hi(prec) {}
  bool contains(const LogEnclosure& inner) const {
    return mpfr_lessequal_p(lo.get(), inner.lo.get()) && mpfr_lessequal_p(inner.hi.get(), hi.get());
  }
};

namespace detail {

inline void log_of_rational(mpfr_ptr out, const mpq_class& q, mpfr_rnd_t rnd) {
  mpfr_set_q(out, q.get_mpq_t(), rnd);
  mpfr_log(out, out, rnd);
}

// `under_max` lets a nonpositive constant through as -inf: it can never be
// the maximum once a positive sibling exists, which the Max case checks.
inline LogEnclosure log_enclosure_impl(const ExactExpr& e, mpfr_prec_t prec, bool under_max) {
  LogEnclosure r(prec);
  switch (e->kind) {
    case ExprKind::RationalConst: {
      if (e->value > 0) {
        log_of_rational(r.lo.get(), e->value, MPFR_RNDD);
        log_of_rational(r.hi.get(), e->value, MPFR_RNDU);
      } else if (e->value == 0 || under_max) {
        mpfr_set_inf(r.lo.get(), -1);
        mpfr_set_inf(r.hi.get(), -1);
      } else {
        throw std::domain_error("negative constant outside a max");
      }
      return r;
    }
    case ExprKind::NaturalLog: {
      // ln(ln a): both logs are increasing, so round each step the same way
      log_of_rational(r.lo.get(), e->value, MPFR_RNDD);
      mpfr_log(r.lo.get(), r.lo.get(), MPFR_RNDD);
      log_of_rational(r.hi.get(), e->value, MPFR_RNDU);
      mpfr_log(r.hi.get(), r.hi.get(), MPFR_RNDU);
      return r;
    }
    case ExprKind::Max: {
      mpfr_set_inf(r.lo.get(), -1);
      mpfr_set_inf(r.hi.get(), -1);
      bool negative = false, positive = false;
      for (auto& c : e->children) {
        if (c->kind == ExprKind::RationalConst) {
          negative |= c->value < 0;
          positive |= c->value > 0;
        } else {
          positive = true;  // every other node kind is nonnegative
        }
        auto ce = log_enclosure_impl(c, prec, true);
        mpfr_max(r.lo.get(), r.lo.get(), ce.lo.get(), MPFR_RNDD);
        mpfr_max(r.hi.get(), r.hi.get(), ce.hi.get(), MPFR_RNDU);
      }
      if (negative && !positive && !under_max) throw std::domain_error("max of nonpositive constants is not positive");
      return r;
    }
    case ExprKind::Product: {
      mpfr_set_zero(r.lo.get(), 1);
      mpfr_set_zero(r.hi.get(), 1);
      for (auto& c : e->children) {
        auto ce = log_enclosure_impl(c, prec, false);
        mpfr_add(r.lo.get(), r.lo.get(), ce.lo.get(), MPFR_RNDD);
        mpfr_add(r.hi.get(), r.hi.get(), ce.hi.get(), MPFR_RNDU);
      }
      return r;
    }
    case ExprKind::Power: {
      auto b = log_enclosure_impl(e->children[0], prec, false);
      const int s = sgn(e->value);
      if (s == 0) {
        mpfr_set_zero(r.lo.get(), 1);
        mpfr_set_zero(r.hi.get(), 1);
      } else if (s > 0) {
        mpfr_mul_q(r.lo.get(), b.lo.get(), e->value.get_mpq_t(), MPFR_RNDD);
        mpfr_mul_q(r.hi.get(), b.hi.get(), e->value.get_mpq_t(), MPFR_RNDU);
      } else {
        if (mpfr_inf_p(b.lo.get())) throw std::domain_error("negative power of zero");
        mpfr_mul_q(r.lo.get(), b.hi.get(), e->value.get_mpq_t(), MPFR_RNDD);
        mpfr_mul_q(r.hi.get(), b.lo.get(), e->value.get_mpq_t(), MPFR_RNDU);
      }
      return r;
    }
  }
  throw std::logic_error("unknown expression kind");
}

inline std::size_t bit_size(const mpq_class& q) {
  return mpz_sizeinbase(q.get_num_mpz_t(), 2) + mpz_sizeinbase(q.get_den_mpz_t(), 2);
}

}  // namespace detail

/// Enclosure of ln(value(e)) at the given MPFR precision. Precision 2p
/// always gives a sub-enclosure of precision p.
inline LogEnclosure log_enclosure(const ExactExpr& e, mpfr_prec_t prec) {
  return detail::log_enclosure_impl(e, prec, false);
}

// Indices of the children of a Max node that cannot be excluded as the
// maximum at the given precision.
inline std::vector<std::size_t> max_survivors(const ExactExpr& e, mpfr_prec_t prec) {
  std::vector<LogEnclosure> encl;
  for (auto& c : e->children) encl.push_back(detail::log_enclosure_impl(c, prec, true));
  Mpfr best(prec);
  mpfr_set_inf(best.get(), -1);
  for (auto& x : encl) mpfr_max(best.get(), best.get(), x.lo.get(), MPFR_RNDD);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < encl.size(); ++i) {
    // a child at -inf (zero or negative) only survives if everything is
    if (mpfr_less_p(encl[i].hi.get(), best.get())) continue;
    if (mpfr_inf_p(encl[i].hi.get()) && !mpfr_inf_p(best.get())) continue;
    out.push_back(i);
  }
  return out;
}

/// Exact rational value, or nullopt when a logarithm survives, a root is
/// irrational, or an intermediate would exceed `bit_cap` bits.
inline std::optional<mpq_class> exact_value(const ExactExpr& e, std::size_t bit_cap = kDefaultExactBitCap) {
  switch (e->kind) {
    case ExprKind::RationalConst:
      return e->value;
    case ExprKind::NaturalLog:
      if (e->value == 1) return mpq_class(0);
      return std::nullopt;
    case ExprKind::Max: {
      std::optional<mpq_class> best;
      for (std::size_t i : max_survivors(e, 256)) {
        auto v = exact_value(e->children[i], bit_cap);
        if (!v) return std::nullopt;
        if (!best || *v > *best) best = v;
      }
      return best;
    }
    case ExprKind::Product: {
      mpq_class acc = 1;
      for (auto& c : e->children) {
        auto v = exact_value(c, bit_cap);
        if (!v) return std::nullopt;
        if (detail::bit_size(acc) + detail::bit_size(*v) > bit_cap) return std::nullopt;
        acc *= *v;
      }
      return acc;
    }
    case ExprKind::Power: {
      auto b = exact_value(e->children[0], bit_cap);
      if (!b) return std::nullopt;
      mpz_class num = e->value.get_num(), den = e->value.get_den();
      if (*b < 0) return std::nullopt;
      if (*b == 0) {
        if (num < 0) throw std::domain_error("negative power of zero");
        return num == 0 ? mpq_class(1) : mpq_class(0);
      }
      if (!den.fits_ulong_p()) return std::nullopt;
      const unsigned long k = den.get_ui();
      mpz_class rn, rd;
      if (!mpz_root(rn.get_mpz_t(), b->get_num_mpz_t(), k)) return std::nullopt;
      if (!mpz_root(rd.get_mpz_t(), b->get_den_mpz_t(), k)) return std::nullopt;
      mpz_class a = abs(num);
      if (!a.fits_ulong_p()) return std::nullopt;
      const unsigned long n = a.get_ui();
      const std::size_t bits = mpz_sizeinbase(rn.get_mpz_t(), 2) + mpz_sizeinbase(rd.get_mpz_t(), 2);
      if (n != 0 && bits > bit_cap / n + 1) return std::nullopt;
      mpz_class pn, pd;
      mpz_pow_ui(pn.get_mpz_t(), rn.get_mpz_t(), n);
      mpz_pow_ui(pd.get_mpz_t(), rd.get_mpz_t(), n);
      mpq_class r(pn, pd);
      r.canonicalize();
      if (detail::bit_size(r) > bit_cap) return std::nullopt;
      if (num < 0) r = 1 / r;
      return r;
    }
  }
  return std::nullopt;
}

/// Removes Max children that are certified never to be the maximum, and
/// collapses a Max with one survivor. Labels are kept.
inline ExactExpr simplify(const ExactExpr& e) {
  if (e->kind == ExprKind::RationalConst || e->kind == ExprKind::NaturalLog) return e;
  auto n = std::make_shared<ExprNode>(*e);
  for (auto& c : n->children) c = simplify(c);
  if (n->kind != ExprKind::Max) return n;
  std::vector<ExactExpr> kept;
  std::optional<mpq_class> best_const;
  for (std::size_t i : max_survivors(n, 256)) {
    auto& c = n->children[i];
    if (c->kind == ExprKind::RationalConst) {
      if (!best_const || c->value > *best_const) best_const = c->value;
    } else {
      kept.push_back(c);
    }
  }
  if (best_const) kept.insert(kept.begin(), rational_const(*best_const));
  if (kept.size() == 1) {
    if (n->label.empty()) return kept[0];
    return with_label(kept[0], n->label);
  }
  n->children = kept;
  return n;
}

// ---------------------------------------------------------------------------
// Certified comparison against a prime

enum class Comparison { PrimeAbove, PrimeBelow, Indeterminate };

inline const char* comparison_name(Comparison c) {
  switch (c) {
    case Comparison::PrimeAbove:
      return "PrimeAbove";
    case Comparison::PrimeBelow:
      return "PrimeBelow";
    case Comparison::Indeterminate:
      return "Indeterminate";
  }
  return "";
}

struct CompareResult {
  Comparison cmp;
  std::string reason;  // "exact", "interval", "equal" or "precision cap"
  long precision = 0;  // MPFR bits used by the deciding step, 0 for exact
};

/// Decides p > value(e) or p < value(e). Exact arithmetic is tried first
/// (this is the only way equality is recognized); otherwise precision
/// doubles from 64 bits up to `precision_cap`.
inline CompareResult compare_prime(u64 p, const ExactExpr& e, long precision_cap = kDefaultPrecisionCap,
                                   std::size_t exact_bit_cap = kDefaultExactBitCap) {
  if (!is_prime_u64(p)) throw std::invalid_argument("compare_prime: " + std::to_string(p) + " is not prime");
  if (precision_cap < 64) throw std::invalid_argument("compare_prime: precision cap below 64 bits");
  const mpz_class pz(std::to_string(p));
  if (auto v = exact_value(e, exact_bit_cap)) {
    if (pz > *v) return {Comparison::PrimeAbove, "exact", 0};
    if (pz < *v) return {Comparison::PrimeBelow, "exact", 0};
    return {Comparison::Indeterminate, "equal", 0};
  }
  long prec = 64;
  for (;;) {
    auto ve = log_enclosure(e, prec);
    Mpfr plo(prec), phi(prec);
    mpfr_set_z(plo.get(), pz.get_mpz_t(), MPFR_RNDD);
    mpfr_log(plo.get(), plo.get(), MPFR_RNDD);
    mpfr_set_z(phi.get(), pz.get_mpz_t(), MPFR_RNDU);
    mpfr_log(phi.get(), phi.get(), MPFR_RNDU);
    if (mpfr_greater_p(plo.get(), ve.hi.get())) return {Comparison::PrimeAbove, "interval", prec};
    if (mpfr_less_p(phi.get(), ve.lo.get())) return {Comparison::PrimeBelow, "interval", prec};
    if (prec >= precision_cap) return {Comparison::Indeterminate, "precision cap", prec};
    prec = std::min(prec * 2, precision_cap);
  }
}

// Bounds on the bit length of floor(value(e)); 0 when the value is below 1.
struct BitBounds {
  u64 lower = 0, upper = 0;
};

inline BitBounds bit_length_bounds(const ExactExpr& e, mpfr_prec_t prec = 256) {
  auto ve = log_enclosure(e, prec);
  Mpfr ln2_lo(prec), ln2_hi(prec), t(prec);
  mpfr_const_log2(ln2_lo.get(), MPFR_RNDD);
  mpfr_const_log2(ln2_hi.get(), MPFR_RNDU);
  auto floor_plus_one = [&](mpfr_srcptr x) {
    mpz_class z;
    mpfr_get_z(z.get_mpz_t(), x, MPFR_RNDD);
    z += 1;
    if (!z.fits_ulong_p()) throw std::overflow_error("bit length does not fit in 64 bits");
    return static_cast<u64>(z.get_ui());
  };
  BitBounds b;
  if (!mpfr_inf_p(ve.lo.get()) && mpfr_sgn(ve.lo.get()) >= 0) {
    mpfr_div(t.get(), ve.lo.get(), ln2_hi.get(), MPFR_RNDD);
    b.lower = floor_plus_one(t.get());
  }
  if (!mpfr_inf_p(ve.hi.get()) && mpfr_sgn(ve.hi.get()) >= 0) {
    mpfr_div(t.get(), ve.hi.get(), ln2_lo.get(), MPFR_RNDU);
    b.upper = floor_plus_one(t.get());
  }
  return b;
}

// ---------------------------------------------------------------------------
// The bound function and thresholds

inline u64 alpha(u64 g) {
  if (g == 0) throw std::invalid_argument("alpha: g must be positive");
  return 1024 * g * g * g;
}

/// ((14g)^(64 g^2) * d * max(h, ln d, 1)^2)^alpha(g), unevaluated.
inline ExactExpr bound_b(u64 d, u64 g, const mpq_class& h) {
  if (d == 0 || g == 0) throw std::invalid_argument("bound_b: d and g must be positive");
  auto inner = product_of({power_of(rational_const(mpq_class(mpz_class(std::to_string(14 * g)))), 64 * g * g),
                           rational_const(mpq_class(mpz_class(std::to_string(d)))),
                           power_of(max_of({rational_const(h), natural_log(mpz_class(std::to_string(d))),
                                            rational_const(1)}),
                                    2)});
  auto e = power_of(inner, mpq_class(mpz_class(std::to_string(alpha(g)))));
  return with_label(e, "b(" + std::to_string(d) + "," + std::to_string(g) + "," + rational_string(h) + ")");
}

inline mpz_class endomorphism_field_degree_bound(u64 g) {
  if (g == 0) throw std::invalid_argument("g must be positive");
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 9 * g, 2 * g);
  return 2 * r;
}

enum class EndoKind { TrivialEndo, GL2Type, RealMultSurface, QuaternionMult };

inline const char* endo_name(EndoKind k) {
  switch (k) {
    case EndoKind::TrivialEndo:
      return "TrivialEndo";
    case EndoKind::GL2Type:
      return "GL2Type";
    case EndoKind::RealMultSurface:
      return "RealMultSurface";
    case EndoKind::QuaternionMult:
      return "QuaternionMult";
  }
  return "";
}

struct VarietyDescriptor {
  u64 degree_K = 1;
  mpq_class faltings_height = 0;
  u64 dim = 2;
  EndoKind endo_type = EndoKind::TrivialEndo;
  u64 field_degree = 0;        // GL2Type
  mpz_class disc_E = 0;        // GL2Type, RealMultSurface
  u64 delta = 0;               // QuaternionMult
  std::vector<u64> ramified_primes_K;
  std::optional<mpz_class> disc_K;
  std::vector<u64> non_semistable_primes;
  bool endos_over_K = true;
};

inline void validate(const VarietyDescriptor& d) {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (d.degree_K == 0) fail("degree_K must be positive");
  if (d.dim == 0) fail("dim must be positive");
  switch (d.endo_type) {
    case EndoKind::TrivialEndo:
      if (d.dim != 2) fail("TrivialEndo thresholds are stated for surfaces: dim must be 2");
      break;
    case EndoKind::GL2Type:
      if (d.field_degree != d.dim) fail("GL2Type requires field_degree = dim");
      if (d.disc_E == 0) fail("disc_E must be nonzero");
      break;
    case EndoKind::RealMultSurface:
      if (d.dim != 2) fail("RealMultSurface requires dim = 2");
      if (d.disc_E == 0) fail("disc_E must be nonzero");
      break;
    case EndoKind::QuaternionMult:
      if (d.dim != 2) fail("QuaternionMult requires dim = 2");
      if (d.delta == 0) fail("delta must be positive");
      break;
  }
  if (d.disc_K && *d.disc_K == 0) fail("disc_K must be nonzero");
  for (u64 p : d.ramified_primes_K)
    if (!is_prime_u64(p)) fail("ramified_primes_K contains a non-prime " + std::to_string(p));
  for (u64 p : d.non_semistable_primes)
    if (!is_prime_u64(p)) fail("non_semistable_primes contains a non-prime " + std::to_string(p));
}

inline ExactExpr threshold_for(const VarietyDescriptor& desc) {
  validate(desc);
  const u64 d = desc.degree_K, g = desc.dim;
  const mpq_class h = desc.faltings_height;
  switch (desc.endo_type) {
    case EndoKind::TrivialEndo:
      return power_of(bound_b(2 * d, 4, 2 * h), mpq_class(1, 4));
    case EndoKind::GL2Type:
      return max_of({power_of(bound_b(d, g, h), mpq_class(mpz_class(std::to_string(g)))),
                     power_of(bound_b(2 * d, 2 * g, 2 * h), mpq_class(1, 2))});
    case EndoKind::RealMultSurface:
    case EndoKind::QuaternionMult:
      return power_of(bound_b(2 * d, 4, 2 * h), mpq_class(1, 2));
  }
  throw std::logic_error("unknown endomorphism type");
}

/// Primes strictly above this do not divide the index of End(A) in the
/// maximal order of E.
inline ExactExpr good_prime_bound(const VarietyDescriptor& desc) {
  validate(desc);
  if (desc.endo_type != EndoKind::GL2Type && desc.endo_type != EndoKind::RealMultSurface)
    throw std::invalid_argument("good_prime_bound needs a GL2Type or RealMultSurface descriptor");
  return power_of(bound_b(desc.degree_K, desc.dim, desc.faltings_height),
                  mpq_class(mpz_class(std::to_string(desc.dim))));
}

inline ExactExpr quaternion_index_bound(const VarietyDescriptor& desc) {
  validate(desc);
  if (desc.endo_type != EndoKind::QuaternionMult)
    throw std::invalid_argument("quaternion_index_bound needs a QuaternionMult descriptor");
  return power_of(bound_b(desc.degree_K, 2, desc.faltings_height), 4);
}

enum class FailedCondition { BelowThreshold, RamifiedInK, RamifiedInE, NotSemistable, DividesDelta, EndosNotOverK };

inline const char* condition_name(FailedCondition c) {
  switch (c) {
    case FailedCondition::BelowThreshold:
      return "BelowThreshold";
    case FailedCondition::RamifiedInK:
      return "RamifiedInK";
    case FailedCondition::RamifiedInE:
      return "RamifiedInE";
    case FailedCondition::NotSemistable:
      return "NotSemistable";
    case FailedCondition::DividesDelta:
      return "DividesDelta";
    case FailedCondition::EndosNotOverK:
      return "EndosNotOverK";
  }
  return "";
}

struct FailedReason {
  FailedCondition tag;
  std::string detail;
};

struct ExpectedImage {
  std::string kind;  // GSp4, H_split, H_inert, H_unknown_splitting, QM
  std::string description;
};

struct AdmissibilityVerdict {
  u64 prime = 0;
  bool admissible = false;
  ExactExpr threshold;
  CompareResult comparison;
  BitBounds threshold_bits;
  std::vector<FailedReason> failed_conditions;
  ExpectedImage expected_image;
};

// Legendre symbol (a / p) for odd prime p.
inline int legendre(const mpz_class& a, u64 p) {
  return mpz_legendre(a.get_mpz_t(), mpz_class(std::to_string(p)).get_mpz_t());
}

inline ExpectedImage expected_image(const VarietyDescriptor& desc, u64 l) {
  switch (desc.endo_type) {
    case EndoKind::TrivialEndo:
      return {"GSp4", "GSp4(Z_l)"};
    case EndoKind::QuaternionMult:
      return {"QM", "(R (x) Z_l)^x"};
    case EndoKind::GL2Type:
    case EndoKind::RealMultSurface: {
      const std::string general = "{x in GL2(O_E (x) Z_l) : det x in Z_l^x}";
      if (desc.dim == 2 && l != 2) {
        const int s = legendre(desc.disc_E, l);
        if (s == 1) return {"H_split", "{(h1, h2) in GL2(Z_l)^2 : det h1 = det h2}"};
        if (s == -1) return {"H_inert", "{h in GL2(Z_{l^2}) : det h in Z_l^x}"};
      }
      return {"H_unknown_splitting", general};
    }
  }
  return {};
}

/// Hypotheses the user must still check for a prime, in the order they
/// are tested by check_prime_admissible.
inline std::vector<std::pair<FailedCondition, std::string>> side_conditions(const VarietyDescriptor& desc) {
  std::vector<std::pair<FailedCondition, std::string>> out;
  out.push_back({FailedCondition::RamifiedInK, "l unramified in K"});
  switch (desc.endo_type) {
    case EndoKind::TrivialEndo:
      out.push_back({FailedCondition::NotSemistable, "A has semistable reduction at some place of K above l"});
      break;
    case EndoKind::GL2Type:
    case EndoKind::RealMultSurface:
      out.push_back({FailedCondition::RamifiedInE, "l unramified in E"});
      out.push_back({FailedCondition::EndosNotOverK, "all endomorphisms defined over K"});
      break;
    case EndoKind::QuaternionMult:
      out.push_back({FailedCondition::DividesDelta, "l does not divide " + std::to_string(desc.delta)});
      out.push_back({FailedCondition::EndosNotOverK, "all endomorphisms defined over K"});
      break;
  }
  return out;
}

inline AdmissibilityVerdict check_prime_admissible(const VarietyDescriptor& desc, u64 l,
                                                   long precision_cap = kDefaultPrecisionCap) {
  validate(desc);
  if (!is_prime_u64(l)) throw std::invalid_argument(std::to_string(l) + " is not prime");
  AdmissibilityVerdict v;
  v.prime = l;
  v.threshold = threshold_for(desc);
  v.comparison = compare_prime(l, v.threshold, precision_cap);
  v.threshold_bits = bit_length_bounds(v.threshold);
  const mpz_class lz(std::to_string(l));
  for (auto& [tag, text] : side_conditions(desc)) {
    bool failed = false;
    switch (tag) {
      case FailedCondition::RamifiedInK:
        failed = std::find(desc.ramified_primes_K.begin(), desc.ramified_primes_K.end(), l) !=
                     desc.ramified_primes_K.end() ||
                 (desc.disc_K && mpz_divisible_p(desc.disc_K->get_mpz_t(), lz.get_mpz_t()));
        break;
      case FailedCondition::NotSemistable:
        failed = std::find(desc.non_semistable_primes.begin(), desc.non_semistable_primes.end(), l) !=
                 desc.non_semistable_primes.end();
        break;
      case FailedCondition::RamifiedInE:
        failed = mpz_divisible_p(desc.disc_E.get_mpz_t(), lz.get_mpz_t());
        break;
      case FailedCondition::DividesDelta:
        failed = desc.delta % l == 0;
        break;
      case FailedCondition::EndosNotOverK:
        failed = !desc.endos_over_K;
        break;
      case FailedCondition::BelowThreshold:
        break;
    }
    if (failed) v.failed_conditions.push_back({tag, text});
  }
  if (v.comparison.cmp != Comparison::PrimeAbove) {
    std::string detail = v.comparison.cmp == Comparison::PrimeBelow ? "below" : "indeterminate";
    if (v.comparison.reason == "equal") detail = "indeterminate: equal";
    v.failed_conditions.insert(v.failed_conditions.begin(), {FailedCondition::BelowThreshold, detail});
  }
  v.admissible = v.failed_conditions.empty();
  v.expected_image = expected_image(desc, l);
  return v;
}

}  // namespace galsurj
