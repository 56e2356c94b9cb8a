#pragma once

/**
 * @file symplectic.hpp
 * @brief Symplectic forms on F_l^4, similitudes, the symmetric-cube map
 *        GL2 -> GSp4, group enumeration, commutants and invariant subspaces.
 */

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "galsurj/finitefield.hpp"
#include "galsurj/linalg.hpp"

namespace galsurj {

using Mat4 = Mat<std::uint32_t, 4>;
using Mat2 = Mat<std::uint32_t, 2>;
using Vec4 = std::array<std::uint32_t, 4>;

struct SympForm {
  Mat4 gram;
};

// antidiag(1, 1, -1, -1): e0 pairs with e3, e1 with e2.
inline SympForm standard_form(const PrimeField& f) {
  if (f.characteristic() == 2) throw std::invalid_argument("symplectic form needs l >= 3");
  Mat4 j{};
  j(0, 3) = 1;
  j(1, 2) = 1;
  j(2, 1) = f.neg(1);
  j(3, 0) = f.neg(1);
  return {j};
}

// antidiag(1, -3, 3, -1): the form preserved by the symmetric cube in the
// basis (x^3, x^2 y, x y^2, y^3).
inline SympForm cubic_form(const PrimeField& f) {
  if (f.characteristic() <= 3) throw std::invalid_argument("cubic form needs l > 3");
  Mat4 j{};
  j(0, 3) = 1;
  j(1, 2) = f.from_int(-3);
  j(2, 1) = 3;
  j(3, 0) = f.neg(1);
  return {j};
}

// The nu with M^T J M = nu J, if any.
inline std::optional<std::uint32_t> multiplier(const PrimeField& f, const Mat4& m, const SympForm& form) {
  Mat4 g = mat_mul(f, mat_mul(f, mat_transpose(m), form.gram), m);
  int pi = -1, pj = -1;
  for (int i = 0; i < 4 && pi < 0; ++i)
    for (int j = 0; j < 4; ++j)
      if (form.gram(i, j)) {
        pi = i;
        pj = j;
        break;
      }
  const std::uint32_t nu = f.div(g(pi, pj), form.gram(pi, pj));
  if (nu == 0) return std::nullopt;
  if (mat_scale(f, nu, form.gram) != g) return std::nullopt;
  return nu;
}

struct GSpElement {
  Mat4 m;
  std::uint32_t nu;
};

inline GSpElement make_gsp(const PrimeField& f, const Mat4& m, const SympForm& form) {
  auto nu = multiplier(f, m, form);
  if (!nu) throw std::invalid_argument("matrix is not a similitude for the form");
  return {m, *nu};
}

// Row i lists the coefficients of (a x + b y)^{3-i} (c x + d y)^i in the
// basis (x^3, x^2 y, x y^2, y^3). This is a homomorphism GL2 -> GL4.
inline Mat4 symmetric_cube(const PrimeField& f, const Mat2& g) {
  if (f.characteristic() <= 3) throw std::invalid_argument("symmetric cube embedding needs l > 3");
  Mat4 out{};
  for (int i = 0; i < 4; ++i) {
    // coefficients in y-degree of (a x + b y)^{3-i} (c x + d y)^i
    std::array<std::uint32_t, 4> poly{1, 0, 0, 0};
    int deg = 0;
    auto times = [&](std::uint32_t u, std::uint32_t v) {
      std::array<std::uint32_t, 4> r{};
      for (int k = 0; k <= deg; ++k) {
        r[k] = f.add(r[k], f.mul(poly[k], u));
        r[k + 1] = f.add(r[k + 1], f.mul(poly[k], v));
      }
      poly = r;
      ++deg;
    };
    for (int k = 0; k < 3 - i; ++k) times(g(0, 0), g(0, 1));
    for (int k = 0; k < i; ++k) times(g(1, 0), g(1, 1));
    for (int j = 0; j < 4; ++j) out(i, j) = poly[j];
  }
  return out;
}

inline GSpElement twisted_cubic_embed(const PrimeField& f, const Mat2& g) {
  if (mat_det(f, g) == 0) throw std::invalid_argument("matrix is not invertible");
  return make_gsp(f, symmetric_cube(f, g), cubic_form(f));
}

// P with P^T J_cubic P = J_standard; M -> P^{-1} M P moves similitudes of
// the cubic form to similitudes of the standard form.
inline Mat4 cubic_to_standard(const PrimeField& f) {
  Mat4 p = mat_identity<PrimeField, 4>(f);
  p(2, 2) = f.neg(f.inv(3));
  return p;
}

inline Mat4 conjugate(const PrimeField& f, const Mat4& m, const Mat4& p) {
  return mat_mul(f, mat_mul(f, mat_inv(f, p), m), p);
}

inline std::uint32_t form_value(const PrimeField& f, const SympForm& form, const Vec4& x, const Vec4& y) {
  return [&] {
    std::uint32_t s = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) s = f.add(s, f.mul(x[i], f.mul(form.gram(i, j), y[j])));
    return s;
  }();
}

// P (columns = new basis) with P^T G P = standard form, for any
// nondegenerate alternating Gram matrix G.
inline Mat4 symplectic_basis(const PrimeField& f, const Mat4& gram) {
  const SympForm g{gram};
  std::vector<Vec4> pool;
  for (int i = 0; i < 4; ++i) {
    Vec4 e{};
    e[i] = 1;
    pool.push_back(e);
  }
  std::array<Vec4, 4> basis{};
  // two hyperbolic pairs: (basis[0], basis[3]) and (basis[1], basis[2])
  const int slots[2][2] = {{0, 3}, {1, 2}};
  for (auto& s : slots) {
    Vec4 u{}, w{};
    bool found = false;
    for (std::size_t a = 0; a < pool.size() && !found; ++a)
      for (std::size_t b = 0; b < pool.size() && !found; ++b) {
        auto val = form_value(f, g, pool[a], pool[b]);
        if (val) {
          u = pool[a];
          w = pool[b];
          const auto inv = f.inv(val);
          for (auto& x : w) x = f.mul(x, inv);
          found = true;
        }
      }
    if (!found) throw std::invalid_argument("form is degenerate");
    basis[s[0]] = u;
    basis[s[1]] = w;
    // project the pool onto the orthogonal complement of span(u, w)
    for (auto& v : pool) {
      const auto bvw = form_value(f, g, v, w);  // coefficient of u
      const auto buv = form_value(f, g, u, v);  // coefficient of w
      for (int i = 0; i < 4; ++i) v[i] = f.sub(v[i], f.add(f.mul(bvw, u[i]), f.mul(buv, w[i])));
    }
  }
  Mat4 p{};
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) p(r, c) = basis[c][r];
  return p;
}

// x -> x + c B(x, v) v, a symplectic transvection.
inline Mat4 transvection(const PrimeField& f, const SympForm& form, const Vec4& v, std::uint32_t c) {
  Mat4 t = mat_identity<PrimeField, 4>(f);
  Vec4 jv{};  // row functional x -> B(x, v) = sum_i x_i (J v)_i
  for (int i = 0; i < 4; ++i) {
    std::uint32_t s = 0;
    for (int k = 0; k < 4; ++k) s = f.add(s, f.mul(form.gram(i, k), v[k]));
    jv[i] = s;
  }
  for (int r = 0; r < 4; ++r)
    for (int col = 0; col < 4; ++col) t(r, col) = f.add(t(r, col), f.mul(c, f.mul(v[r], jv[col])));
  return t;
}

// Chevalley generators of Sp4(F_l) for the standard form: short root
// elements e1 -> e1 + e0 (and back) and the long root transvections at e1, e2.
inline std::vector<Mat4> sp4_generators(const PrimeField& f) {
  const auto form = standard_form(f);
  Mat4 s = mat_identity<PrimeField, 4>(f);
  s(0, 1) = 1;
  s(2, 3) = f.neg(1);
  Mat4 st = mat_identity<PrimeField, 4>(f);
  st(1, 0) = 1;
  st(3, 2) = f.neg(1);
  return {s, st, transvection(f, form, {0, 1, 0, 0}, 1), transvection(f, form, {0, 0, 1, 0}, 1)};
}

inline std::uint32_t primitive_root(const PrimeField& f) {
  const std::uint32_t l = f.characteristic();
  for (std::uint32_t g = 1; g < l; ++g) {
    bool ok = true;
    for (auto [p, e] : factor_small(l - 1))
      if (f.pow(g, (l - 1) / p) == 1) ok = false;
    if (ok) return g;
  }
  return 1;
}

// diag(1, 1, c, c) has multiplier c.
inline Mat4 similitude_diag(const PrimeField& f, std::uint32_t c) {
  Mat4 d = mat_identity<PrimeField, 4>(f);
  d(2, 2) = c;
  d(3, 3) = c;
  return d;
}

inline std::vector<Mat4> gsp4_generators(const PrimeField& f) {
  auto g = sp4_generators(f);
  g.push_back(similitude_diag(f, primitive_root(f)));
  return g;
}

// A random word in the GSp4 generators; used to conjugate test groups.
template <class Rng>
Mat4 random_similitude(const PrimeField& f, Rng& rng, int length = 40) {
  const auto gens = gsp4_generators(f);
  Mat4 m = mat_identity<PrimeField, 4>(f);
  for (int i = 0; i < length; ++i) m = mat_mul(f, m, mat_pow(f, gens[rng() % gens.size()], rng() % f.characteristic()));
  return m;
}

template <class F>
std::vector<MatF<F, 2>> sl2_generators(const F& f) {
  MatF<F, 2> t{{f.one(), f.one(), f.zero(), f.one()}};
  MatF<F, 2> w{{f.zero(), f.neg(f.one()), f.one(), f.zero()}};
  return {t, w};
}

// ---------------------------------------------------------------------------
// Type (4) element test.

struct Type4Result {
  bool consistent = false;
  std::uint32_t t = 0, n = 0;
};

// Does charpoly(M) equal the char poly of sym^3 of some 2x2 matrix with
// trace t and determinant n? With roots a, d of X^2 - tX + n the four
// eigenvalues split as {a^3, d^3} (sum t^3 - 3nt, product n^3) and
// {n a, n d} (sum n t, product n^3).
inline bool type4_matches(const PrimeField& f, const std::array<std::uint32_t, 5>& cp, std::uint32_t t,
                          std::uint32_t n) {
  const auto n3 = f.pow(n, 3);
  if (cp[0] != f.mul(n3, n3)) return false;
  const auto s1 = f.sub(f.pow(t, 3), f.mul(3 % f.characteristic(), f.mul(n, t)));
  const auto s2 = f.mul(n, t);
  const auto sum = f.add(s1, s2);
  return cp[3] == f.neg(sum) && cp[2] == f.add(f.add(n3, n3), f.mul(s1, s2)) && cp[1] == f.neg(f.mul(n3, sum));
}

inline Type4Result type4_membership_test(const PrimeField& f, const Mat4& m) {
  const auto cp = charpoly(f, m);
  const std::uint32_t l = f.characteristic();
  for (std::uint32_t t = 0; t < l; ++t)
    for (std::uint32_t n = 1; n < l; ++n)
      if (type4_matches(f, cp, t, n)) return {true, t, n};
  return {};
}

// ---------------------------------------------------------------------------
// Breadth-first closure.

struct BfsResult {
  bool exceeded = false;
  u64 order = 0;                 // exact order when !exceeded
  std::vector<Key128> elements;  // discovery order, filled when requested
};

// Ops provides identity(), mul(a, b), key(a) (already canonical) and
// decode(key). Elements are reached as right products of generators.
template <class Ops>
BfsResult bfs_closure(const Ops& ops, const std::vector<typename Ops::element>& gens, u64 cap, bool keep = false) {
  BfsResult res;
  KeySet seen;
  std::vector<Key128> order;
  const Key128 id = ops.key(ops.identity());
  seen.insert(id);
  order.push_back(id);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto x = ops.decode(order[i]);
    for (const auto& g : gens) {
      const Key128 k = ops.key(ops.mul(x, g));
      if (seen.insert(k)) {
        order.push_back(k);
        if (order.size() > cap) {
          res.exceeded = true;
          res.order = order.size();
          return res;
        }
      }
    }
  }
  res.order = order.size();
  if (keep) res.elements = std::move(order);
  return res;
}

template <class F, int N>
struct MatrixOps {
  using element = MatF<F, N>;
  const F& f;
  bool projective = false;

  element identity() const { return mat_identity<F, N>(f); }
  element mul(const element& a, const element& b) const { return mat_mul(f, a, b); }
  Key128 key(const element& a) const {
    KeyPacker kp;
    pack_matrix<F, N>(f, projective ? projective_canonical<F, N>(f, a) : a, kp);
    return kp.key();
  }
  element decode(const Key128& k) const {
    KeyReader kr(k);
    return unpack_matrix<F, N>(f, kr);
  }
};

// Order of <gens> (or of its image mod scalars when projective), up to cap.
template <class F, int N>
BfsResult group_bfs(const F& f, const std::vector<MatF<F, N>>& gens, u64 cap, bool projective, bool keep = false) {
  MatrixOps<F, N> ops{f, projective};
  return bfs_closure(ops, gens, cap, keep);
}

// ---------------------------------------------------------------------------
// Commutant.

template <class F, int N>
std::vector<MatF<F, N>> centralizer_algebra(const F& f, const std::vector<MatF<F, N>>& gens) {
  std::vector<Row<F>> rows;
  for (const auto& m : gens) {
    // (X M - M X)_{ab} = sum_k x_{ak} M_{kb} - M_{ak} x_{kb}
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) {
        Row<F> r(N * N, f.zero());
        for (int k = 0; k < N; ++k) {
          r[a * N + k] = f.add(r[a * N + k], m(k, b));
          r[k * N + b] = f.sub(r[k * N + b], m(a, k));
        }
        rows.push_back(std::move(r));
      }
  }
  std::vector<MatF<F, N>> out;
  for (auto& v : nullspace(f, rows, N * N)) {
    MatF<F, N> x;
    for (int i = 0; i < N * N; ++i) x.a[i] = v[i];
    out.push_back(x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Invariant subspaces of subgroups of GL4(F_l).

// Subspace stored by the rows of its reduced echelon basis.
struct Subspace {
  std::vector<Vec4> basis;
  bool operator==(const Subspace&) const = default;
  auto operator<=>(const Subspace&) const = default;
  int dim() const { return static_cast<int>(basis.size()); }
};

inline Subspace make_subspace(const PrimeField& f, const std::vector<Vec4>& vecs) {
  std::vector<Row<PrimeField>> rows;
  for (auto& v : vecs) rows.emplace_back(v.begin(), v.end());
  rref(f, rows);
  Subspace s;
  for (auto& r : rows) s.basis.push_back({r[0], r[1], r[2], r[3]});
  return s;
}

inline bool in_span(const PrimeField& f, const Subspace& s, const Vec4& v) {
  std::vector<Row<PrimeField>> rows;
  for (auto& b : s.basis) rows.emplace_back(b.begin(), b.end());
  rows.emplace_back(v.begin(), v.end());
  return rank_of(f, rows) == s.dim();
}

inline bool is_invariant(const PrimeField& f, const Subspace& s, const std::vector<Mat4>& gens) {
  for (const auto& g : gens)
    for (const auto& b : s.basis)
      if (!in_span(f, s, mat_apply(f, g, b))) return false;
  return true;
}

inline Subspace direct_sum(const PrimeField& f, const Subspace& a, const Subspace& b) {
  std::vector<Vec4> all = a.basis;
  all.insert(all.end(), b.basis.begin(), b.basis.end());
  return make_subspace(f, all);
}

inline Subspace image(const PrimeField& f, const Mat4& g, const Subspace& s) {
  std::vector<Vec4> v;
  for (auto& b : s.basis) v.push_back(mat_apply(f, g, b));
  return make_subspace(f, v);
}

enum class SubspaceMode { Exhaustive, Spin, Probabilistic };

struct SubspaceSearch {
  std::vector<Subspace> subspaces;  // sorted, distinct
  bool exhaustive = true;
  u64 trials = 0;
};

constexpr std::uint32_t kExhaustiveSubspaceCap = 97;

namespace detail {

// Projective points of F_l^4: first nonzero coordinate equal to 1.
template <class Fn>
void for_each_line(std::uint32_t l, Fn&& fn) {
  for (int lead = 0; lead < 4; ++lead) {
    const int free = 3 - lead;
    u64 count = ipow(l, static_cast<unsigned>(free));
    for (u64 code = 0; code < count; ++code) {
      Vec4 v{};
      v[lead] = 1;
      u64 c = code;
      for (int k = lead + 1; k < 4; ++k) {
        v[k] = static_cast<std::uint32_t>(c % l);
        c /= l;
      }
      fn(v);
    }
  }
}

// Span of the orbit of v under the generators, stopping once dim > max_dim.
inline Subspace spin(const PrimeField& f, const Vec4& v, const std::vector<Mat4>& gens, int max_dim) {
  Subspace s = make_subspace(f, {v});
  std::vector<Vec4> queue{v};
  for (std::size_t i = 0; i < queue.size(); ++i) {
    for (const auto& g : gens) {
      Vec4 w = mat_apply(f, g, queue[i]);
      if (in_span(f, s, w)) continue;
      std::vector<Vec4> all = s.basis;
      all.push_back(w);
      s = make_subspace(f, all);
      if (s.dim() > max_dim) return s;
      queue.push_back(w);
    }
  }
  return s;
}

inline std::vector<std::uint32_t> eigenvalues_in_field(const PrimeField& f, const Mat4& m) {
  const auto cp = charpoly(f, m);
  std::vector<std::uint32_t> out;
  for (std::uint32_t x = 0; x < f.characteristic(); ++x) {
    std::uint32_t v = 0;
    for (int k = 4; k >= 0; --k) v = f.add(f.mul(v, x), cp[k]);
    if (v == 0) out.push_back(x);
  }
  return out;
}

inline std::vector<Vec4> kernel_basis(const PrimeField& f, const std::vector<Row<PrimeField>>& rows) {
  std::vector<Vec4> out;
  for (auto& r : nullspace(f, rows, 4)) out.push_back({r[0], r[1], r[2], r[3]});
  return out;
}

// All 2-dimensional subspaces of span(basis), basis independent.
inline void two_spaces_within(const PrimeField& f, const std::vector<Vec4>& basis, std::set<Subspace>& out) {
  const int k = static_cast<int>(basis.size());
  if (k < 2) return;
  const std::uint32_t l = f.characteristic();
  // enumerate 2 x k echelon coefficient matrices
  for (int p1 = 0; p1 < k; ++p1)
    for (int p2 = p1 + 1; p2 < k; ++p2) {
      std::vector<std::pair<int, int>> slots;  // (row, col) free entries
      for (int c = p1 + 1; c < k; ++c)
        if (c != p2) slots.emplace_back(0, c);
      for (int c = p2 + 1; c < k; ++c) slots.emplace_back(1, c);
      const u64 count = ipow(l, static_cast<unsigned>(slots.size()));
      for (u64 code = 0; code < count; ++code) {
        std::vector<std::vector<std::uint32_t>> coef(2, std::vector<std::uint32_t>(k, 0));
        coef[0][p1] = 1;
        coef[1][p2] = 1;
        u64 c = code;
        for (auto [r, col] : slots) {
          coef[r][col] = static_cast<std::uint32_t>(c % l);
          c /= l;
        }
        std::vector<Vec4> vecs(2, Vec4{});
        for (int r = 0; r < 2; ++r)
          for (int j = 0; j < k; ++j)
            for (int i = 0; i < 4; ++i) vecs[r][i] = f.add(vecs[r][i], f.mul(coef[r][j], basis[j][i]));
        out.insert(make_subspace(f, vecs));
      }
    }
}

inline std::vector<Vec4> intersect(const PrimeField& f, const std::vector<Vec4>& a, const std::vector<Vec4>& b) {
  // x = sum s_i a_i = sum t_j b_j
  if (a.empty() || b.empty()) return {};
  const int na = static_cast<int>(a.size()), nb = static_cast<int>(b.size());
  std::vector<Row<PrimeField>> rows;
  for (int i = 0; i < 4; ++i) {
    Row<PrimeField> r(na + nb, 0);
    for (int s = 0; s < na; ++s) r[s] = a[s][i];
    for (int t = 0; t < nb; ++t) r[na + t] = f.neg(b[t][i]);
    rows.push_back(r);
  }
  std::vector<Vec4> out;
  for (auto& sol : nullspace(f, rows, na + nb)) {
    Vec4 v{};
    for (int s = 0; s < na; ++s)
      for (int i = 0; i < 4; ++i) v[i] = f.add(v[i], f.mul(sol[s], a[s][i]));
    out.push_back(v);
  }
  return make_subspace(f, out).basis;
}

inline void joint_eigenspaces(const PrimeField& f, const std::vector<Mat4>& gens, std::size_t idx,
                              const std::vector<Vec4>& current, std::vector<std::vector<Vec4>>& out) {
  if (current.size() < 2) return;
  if (idx == gens.size()) {
    out.push_back(current);
    return;
  }
  for (auto lam : eigenvalues_in_field(f, gens[idx])) {
    std::vector<Row<PrimeField>> rows;
    for (int i = 0; i < 4; ++i) {
      Row<PrimeField> r(4);
      for (int j = 0; j < 4; ++j) r[j] = i == j ? f.sub(gens[idx](i, j), lam) : gens[idx](i, j);
      rows.push_back(r);
    }
    joint_eigenspaces(f, gens, idx + 1, intersect(f, current, kernel_basis(f, rows)), out);
  }
}

inline std::vector<Mat4> transposes(const std::vector<Mat4>& gens) {
  std::vector<Mat4> t;
  for (auto& g : gens) t.push_back(mat_transpose(g));
  return t;
}

}  // namespace detail

inline std::vector<Subspace> invariant_lines(const PrimeField& f, const std::vector<Mat4>& gens) {
  std::vector<Subspace> out;
  detail::for_each_line(f.characteristic(), [&](const Vec4& v) {
    for (const auto& g : gens) {
      Vec4 w = mat_apply(f, g, v);
      // w parallel to v: v has a leading 1, so w = w[lead] v
      int lead = 0;
      while (v[lead] == 0) ++lead;
      for (int i = 0; i < 4; ++i)
        if (w[i] != f.mul(w[lead], v[i])) return;
    }
    out.push_back(make_subspace(f, {v}));
  });
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Subspace> invariant_two_spaces(const PrimeField& f, const std::vector<Mat4>& gens,
                                                  SubspaceMode mode) {
  std::set<Subspace> found;
  if (mode == SubspaceMode::Exhaustive) {
    std::vector<Vec4> std_basis;
    for (int i = 0; i < 4; ++i) {
      Vec4 e{};
      e[i] = 1;
      std_basis.push_back(e);
    }
    std::set<Subspace> all;
    detail::two_spaces_within(f, std_basis, all);
    for (auto& s : all)
      if (is_invariant(f, s, gens)) found.insert(s);
  } else {
    // An invariant plane either is the span of the orbit of one of its
    // vectors, or every vector in it is a common eigenvector, in which case
    // it sits inside a joint eigenspace.
    detail::for_each_line(f.characteristic(), [&](const Vec4& v) {
      Subspace s = detail::spin(f, v, gens, 2);
      if (s.dim() == 2) found.insert(s);
    });
    std::vector<Vec4> full;
    for (int i = 0; i < 4; ++i) {
      Vec4 e{};
      e[i] = 1;
      full.push_back(e);
    }
    std::vector<std::vector<Vec4>> spaces;
    detail::joint_eigenspaces(f, gens, 0, full, spaces);
    for (auto& sp : spaces) detail::two_spaces_within(f, sp, found);
  }
  return {found.begin(), found.end()};
}

// Annihilators of the invariant lines of the transposed group.
inline std::vector<Subspace> invariant_hyperplanes(const PrimeField& f, const std::vector<Mat4>& gens) {
  std::vector<Subspace> out;
  for (auto& line : invariant_lines(f, detail::transposes(gens))) {
    std::vector<Row<PrimeField>> rows{{line.basis[0].begin(), line.basis[0].end()}};
    out.push_back(make_subspace(f, detail::kernel_basis(f, rows)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline SubspaceSearch invariant_subspaces(const PrimeField& f, const std::vector<Mat4>& gens, int dim,
                                          SubspaceMode mode = SubspaceMode::Spin, u64 trials = 4096,
                                          u64 seed = 0) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("subspace dimension must be 1, 2 or 3");
  SubspaceSearch res;
  if (mode != SubspaceMode::Probabilistic && f.characteristic() > kExhaustiveSubspaceCap)
    throw std::invalid_argument("exhaustive subspace search is limited to l <= 97; use the probabilistic mode");
  if (mode == SubspaceMode::Probabilistic) {
    // Spin random vectors; proper spans found are invariant, but absence
    // proves nothing.
    std::mt19937_64 rng(seed);
    std::set<Subspace> found;
    const auto& gset = gens;
    std::vector<Mat4> tr = detail::transposes(gens);
    for (u64 t = 0; t < trials; ++t) {
      Vec4 v{};
      for (auto& x : v) x = static_cast<std::uint32_t>(rng() % f.characteristic());
      if (v == Vec4{}) continue;
      if (dim == 3) {
        Subspace s = detail::spin(f, v, tr, 1);
        if (s.dim() == 1) {
          std::vector<Row<PrimeField>> rows{{s.basis[0].begin(), s.basis[0].end()}};
          found.insert(make_subspace(f, detail::kernel_basis(f, rows)));
        }
      } else {
        Subspace s = detail::spin(f, v, gset, dim);
        if (s.dim() == dim) found.insert(s);
      }
    }
    res.subspaces.assign(found.begin(), found.end());
    res.exhaustive = false;
    res.trials = trials;
    return res;
  }
  if (dim == 1)
    res.subspaces = invariant_lines(f, gens);
  else if (dim == 2)
    res.subspaces = invariant_two_spaces(f, gens, mode);
  else
    res.subspaces = invariant_hyperplanes(f, gens);
  return res;
}

}  // namespace galsurj
