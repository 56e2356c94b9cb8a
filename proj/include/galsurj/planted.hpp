#pragma once

/**
 * @file planted.hpp
 * @brief Generating sets of known subgroups, used as fixtures by the tests,
 *        the acceptance binary and the shipped CLI examples.
 */

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <stdexcept>
#include <vector>

#include "galsurj/finitefield.hpp"
#include "galsurj/linalg.hpp"
#include "galsurj/symplectic.hpp"

namespace galsurj {

// z = x + y w in F_{l^2} = F_l[w]/(w^2 - a) acting on the basis (1, w).
inline Mat2 mult_by(const FqField& f2, const FqElem& z) {
  const std::uint32_t a = f2.prime_field().neg(f2.modulus()[0]);
  const auto& fp = f2.prime_field();
  return Mat2{{z.c[0], fp.mul(a, z.c[1]), z.c[1], z.c[0]}};
}

// GL2(F_{l^2}) -> GL4(F_l) in the basis (e1, w e1, e2, w e2).
inline Mat4 restrict_scalars(const FqField& f2, const MatF<FqField, 2>& m) {
  if (f2.degree() != 2) throw std::invalid_argument("restriction of scalars expects a quadratic field");
  Mat4 out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Mat2 b = mult_by(f2, m(i, j));
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) out(2 * i + r, 2 * j + c) = b(r, c);
    }
  return out;
}

// Stabilizer of the isotropic plane span(e0, e1) in GSp4.
inline std::vector<Mat4> siegel_parabolic_generators(const PrimeField& f) {
  const auto form = standard_form(f);
  const auto g = primitive_root(f);
  auto sp = sp4_generators(f);
  Mat4 d = mat_identity<PrimeField, 4>(f);
  d(0, 0) = g;
  d(3, 3) = f.inv(g);
  return {sp[0], sp[1], transvection(f, form, {1, 0, 0, 0}, 1), transvection(f, form, {0, 1, 0, 0}, 1),
          transvection(f, form, {1, 1, 0, 0}, 1), d, similitude_diag(f, g)};
}


// m acting on coordinates (i, j), identity elsewhere.
inline Mat4 embed_block(const PrimeField& f, const Mat2& m, int i, int j) {
  Mat4 out = mat_identity<PrimeField, 4>(f);
  const int idx[2] = {i, j};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) out(idx[r], idx[c]) = m(r, c);
  return out;
}

// Stabilizer of the unordered pair span(e0, e3), span(e1, e2): Sp2 on each
// block, a similitude scaling both blocks, and the block swap.
inline std::vector<Mat4> imprimitive_generators(const PrimeField& f) {
  const auto g = primitive_root(f);
  const auto sl = sl2_generators(f);
  Mat4 d = mat_identity<PrimeField, 4>(f);
  d(0, 0) = g;
  d(1, 1) = g;
  Mat4 swap{};
  swap(1, 0) = 1;
  swap(0, 1) = 1;
  swap(2, 3) = 1;
  swap(3, 2) = 1;
  return {embed_block(f, sl[0], 0, 3), embed_block(f, sl[1], 0, 3), embed_block(f, sl[0], 1, 2),
          embed_block(f, sl[1], 1, 2), d, swap};
}

// Generators of SL2(F_q): upper unipotents at 1, t, ..., t^{n-1} for the
// field generator t, and the Weyl element.
inline std::vector<MatF<FqField, 2>> sl2_field_generators(const FqField& f) {
  std::vector<MatF<FqField, 2>> out;
  FqElem t = f.one();
  for (int k = 0; k < f.degree(); ++k) {
    out.push_back(MatF<FqField, 2>{{f.one(), t, f.zero(), f.one()}});
    t = f.mul(t, f.gen());
  }
  out.push_back(MatF<FqField, 2>{{f.zero(), f.neg(f.one()), f.one(), f.zero()}});
  return out;
}

// Gram matrix of (u, v) -> Tr det(u, v) on F_{l^2}^2 in the basis
// (e1, w e1, e2, w e2).
inline Mat4 trace_det_gram(const FqField& f2) {
  const std::array<std::array<FqElem, 2>, 4> basis = {{{f2.one(), f2.zero()},
                                                       {f2.gen(), f2.zero()},
                                                       {f2.zero(), f2.one()},
                                                       {f2.zero(), f2.gen()}}};
  const auto& fp = f2.prime_field();
  Mat4 g{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const auto d = f2.sub(f2.mul(basis[i][0], basis[j][1]), f2.mul(basis[i][1], basis[j][0]));
      g(i, j) = fp.add(d.c[0], f2.frobenius(d).c[0]);
    }
  return g;
}

// Semilinear similitudes of F_{l^2}^2: GL2(F_{l^2}) elements with
// determinant in F_l, plus the Frobenius, restricted to F_l and moved to
// the standard form.
inline std::vector<Mat4> field_extension_generators(const PrimeField& f) {
  const FqField f2 = make_field(f.characteristic(), 2);
  const auto w = f2.gen();
  std::vector<MatF<FqField, 2>> lin = sl2_field_generators(f2);
  const auto g = f2.from_int(primitive_root(f));
  lin.push_back(MatF<FqField, 2>{{g, f2.zero(), f2.zero(), f2.one()}});
  lin.push_back(MatF<FqField, 2>{{w, f2.zero(), f2.zero(), w}});
  std::vector<Mat4> out;
  for (const auto& m : lin) out.push_back(restrict_scalars(f2, m));
  Mat4 frob = mat_identity<PrimeField, 4>(f);
  frob(1, 1) = f.neg(1);
  frob(3, 3) = f.neg(1);
  out.push_back(frob);
  const Mat4 p = symplectic_basis(f, trace_det_gram(f2));
  for (auto& m : out) m = conjugate(f, m, p);
  return out;
}

// Symmetric cube of GL2(F_l), in the standard form.
inline std::vector<Mat4> twisted_cubic_generators(const PrimeField& f) {
  const auto g = primitive_root(f);
  auto gl = sl2_generators(f);
  gl.push_back(Mat2{{g, 0, 0, 1}});
  const Mat4 p = cubic_to_standard(f);
  std::vector<Mat4> out;
  for (const auto& m : gl) out.push_back(conjugate(f, symmetric_cube(f, m), p));
  return out;
}

namespace detail {

inline Mat4 kron(const PrimeField& f, const Mat2& x, const Mat2& y) {
  Mat4 out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int m = 0; m < 2; ++m) out(2 * i + k, 2 * j + m) = f.mul(x(i, j), y(k, m));
  return out;
}

// Generators of Q8 (x) D8 = 2^{1+4}_-, preserving kron(J2, I2).
inline std::vector<Mat4> extraspecial_generators(const PrimeField& f) {
  const std::uint32_t l = f.characteristic();
  std::uint32_t a = 0, b = 0;
  bool found = false;
  for (std::uint32_t x = 0; x < l && !found; ++x)
    for (std::uint32_t y = 0; y < l && !found; ++y)
      if (f.add(f.mul(x, x), f.mul(y, y)) == f.neg(1)) {
        a = x;
        b = y;
        found = true;
      }
  const Mat2 id{{1, 0, 0, 1}};
  const Mat2 qi{{a, b, b, f.neg(a)}};
  const Mat2 qj{{0, 1, f.neg(1), 0}};
  const Mat2 d1{{1, 0, 0, f.neg(1)}};
  const Mat2 d2{{0, 1, 1, 0}};
  return {kron(f, qi, id), kron(f, qj, id), kron(f, id, d1), kron(f, id, d2)};
}

}  // namespace detail

// Normalizer of 2^{1+4}_- in GSp4(F_l); its image in PGSp4 has order 1920.
// Every automorphism of the extraspecial group fixing the centre is
// realised by conjugation, so the normalizer is found by matching the
// squares and commutators of the generators and solving x n = n y.
inline std::vector<Mat4> extraspecial_normalizer_generators(const PrimeField& f) {
  const auto x = detail::extraspecial_generators(f);
  MatrixOps<PrimeField, 4> ops{f, false};
  auto bfs = bfs_closure(ops, x, 64, true);
  std::vector<Mat4> elems;
  for (auto& k : bfs.elements) elems.push_back(ops.decode(k));
  auto commute = [&](const Mat4& p, const Mat4& q) { return mat_mul(f, p, q) == mat_mul(f, q, p); };
  std::array<Mat4, 4> sq;
  for (int i = 0; i < 4; ++i) sq[i] = mat_mul(f, x[i], x[i]);

  std::vector<Mat4> normalizer;
  std::array<Mat4, 4> y;
  auto solve = [&] {
    std::vector<Row<PrimeField>> rows;
    for (int i = 0; i < 4; ++i)
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
          // (y_i n - n x_i)_{rc}
          Row<PrimeField> row(16, 0);
          for (int k = 0; k < 4; ++k) {
            row[k * 4 + c] = f.add(row[k * 4 + c], y[i](r, k));
            row[r * 4 + k] = f.sub(row[r * 4 + k], x[i](k, c));
          }
          rows.push_back(std::move(row));
        }
    auto ns = nullspace(f, rows, 16);
    if (ns.size() != 1) return;
    Mat4 n;
    for (int i = 0; i < 16; ++i) n.a[i] = ns[0][i];
    if (mat_det(f, n) != 0) normalizer.push_back(projective_canonical<PrimeField, 4>(f, n));
  };
  auto extend = [&](auto&& self, int i) -> void {
    if (i == 4) {
      solve();
      return;
    }
    for (const auto& e : elems) {
      if (mat_mul(f, e, e) != sq[i]) continue;
      bool ok = true;
      for (int j = 0; j < i && ok; ++j) ok = commute(e, y[j]) == commute(x[i], x[j]);
      if (!ok) continue;
      y[i] = e;
      self(self, i + 1);
    }
  };
  extend(extend, 0);

  // Two elements generating the whole normalizer modulo scalars, picked
  // in a fixed pseudo-random order.
  std::vector<std::size_t> idx(normalizer.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(1920);
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[uniform_below(rng, i)]);
  const u64 target = group_bfs(f, normalizer, 4000, true).order;
  std::vector<Mat4> gens;
  for (std::size_t a = 0; a + 1 < idx.size() && gens.empty(); ++a) {
    const std::vector<Mat4> cand{normalizer[idx[a]], normalizer[idx[a + 1]]};
    if (group_bfs(f, cand, 4000, true).order == target) gens = cand;
  }
  if (gens.empty()) throw std::logic_error("no two-element generating set found");

  Mat4 gram{};
  const Mat2 j2{{0, 1, f.neg(1), 0}};
  gram = detail::kron(f, j2, Mat2{{1, 0, 0, 1}});
  const Mat4 p = symplectic_basis(f, gram);
  for (auto& m : gens) m = conjugate(f, m, p);
  return gens;
}

// ---------------------------------------------------------------------------
// Subgroups of GL2(F_q).

using M2 = MatF<FqField, 2>;

struct DicksonFamily {
  std::string name;
  FqField field;
  std::vector<M2> gens;
};

inline M2 m2(const FqField& f, std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  return M2{{f.from_int(a), f.from_int(b), f.from_int(c), f.from_int(d)}};
}

inline DicksonFamily dickson_cyclic(const FqField& f) {
  const auto z = f.primitive_element();
  return {"cyclic", f, {M2{{z, f.zero(), f.zero(), f.mul(z, z)}}}};
}

inline DicksonFamily dickson_borel(const FqField& f) {
  const auto z = f.primitive_element();
  return {"borel",
          f,
          {m2(f, 1, 1, 0, 1), M2{{z, f.zero(), f.zero(), f.one()}}, M2{{f.one(), f.zero(), f.zero(), z}}}};
}

inline DicksonFamily dickson_sl2(const FqField& f) { return {"sl2", f, sl2_field_generators(f)}; }

// SL2 of the prime field inside GL2(F_q), with the scalar z.
inline DicksonFamily dickson_sl2_prime(const FqField& f) {
  auto g = sl2_generators(f);
  const auto z = f.primitive_element();
  g.push_back(M2{{z, f.zero(), f.zero(), z}});
  return {"sl2_prime_subfield", f, g};
}

inline DicksonFamily dickson_gl2(const FqField& f) {
  auto g = sl2_field_generators(f);
  g.push_back(M2{{f.primitive_element(), f.zero(), f.zero(), f.one()}});
  return {"gl2", f, g};
}

inline DicksonFamily dickson_split_cartan_normalizer(const FqField& f) {
  const auto z = f.primitive_element();
  return {"split_cartan_normalizer", f, {M2{{z, f.zero(), f.zero(), f.inv(z)}}, m2(f, 0, 1, -1, 0)}};
}

inline DicksonFamily dickson_diagonal_index2(const FqField& f) {
  const auto z = f.primitive_element();
  return {"diagonal_index2",
          f,
          {M2{{z, f.zero(), f.zero(), f.one()}}, M2{{f.one(), f.zero(), f.zero(), z}}, m2(f, 0, 1, 1, 0)}};
}

// Multiplication by a generator of F_{q^2} on the basis (1, w), and the
// Frobenius, for a prime field F_l.
inline DicksonFamily dickson_nonsplit_cartan_normalizer(const FqField& f) {
  if (f.degree() != 1) throw std::invalid_argument("nonsplit Cartan family is built over a prime field");
  const FqField f2 = make_field(f.characteristic(), 2);
  const Mat2 m = mult_by(f2, f2.primitive_element());
  return {"nonsplit_cartan_normalizer", f, {m2(f, m(0, 0), m(0, 1), m(1, 0), m(1, 1)), m2(f, 1, 0, 0, -1)}};
}

// SL2(F_3) = 2.A4: the quaternion units i, j and (-1 + i + j + k) / 2.
inline DicksonFamily dickson_binary_tetrahedral(const FqField& f) {
  const std::uint32_t l = f.characteristic();
  std::int64_t a = 0, b = 0;
  for (std::int64_t x = 0; x < l; ++x)
    for (std::int64_t y = 0; y < l; ++y)
      if ((x * x + y * y + 1) % l == 0 && a == 0 && b == 0) {
        a = x;
        b = y;
      }
  const M2 qi = m2(f, a, b, b, -a);
  const M2 qj = m2(f, 0, 1, -1, 0);
  const M2 qk = mat_mul(f, qi, qj);
  M2 w = mat_sub(f, mat_add(f, mat_add(f, qi, qj), qk), mat_identity<FqField, 2>(f));
  w = mat_scale(f, f.inv(f.from_int(2)), w);
  return {"binary_tetrahedral", f, {qi, qj, w}};
}

// ---------------------------------------------------------------------------
// Graphs b' = chi(b) sigma(f b f^{-1}) inside GL2(F_q) x GL2(F_q).

struct PlantedGraph {
  std::string name;
  FqField field;
  std::vector<std::pair<M2, M2>> gens;
  M2 f;
  int sigma = 0;  // power of the absolute Frobenius
  std::vector<int> chi;
};

inline M2 frobenius_matrix(const FqField& fld, const M2& m, int k) {
  M2 r;
  for (int i = 0; i < 4; ++i) r.a[i] = fld.frobenius(m.a[i], k);
  return r;
}

inline PlantedGraph make_graph(std::string name, const FqField& fld, const std::vector<M2>& bs, const M2& f, int sigma,
                               const std::vector<int>& chi) {
  PlantedGraph g{std::move(name), fld, {}, projective_canonical<FqField, 2>(fld, f), sigma, chi};
  const M2 finv = mat_inv(fld, f);
  for (std::size_t i = 0; i < bs.size(); ++i) {
    M2 img = frobenius_matrix(fld, mat_mul(fld, mat_mul(fld, f, bs[i]), finv), sigma);
    if (chi[i] < 0) img = mat_scale(fld, fld.neg(fld.one()), img);
    g.gens.push_back({bs[i], img});
  }
  return g;
}

inline PlantedGraph graph_conjugation(const FqField& fld) {
  auto bs = sl2_field_generators(fld);
  return make_graph("conjugation", fld, bs, m2(fld, 1, 2, 3, 5), 0, std::vector<int>(bs.size(), 1));
}

// The sign is the quadratic character of the determinant.
inline PlantedGraph graph_with_sign(const FqField& fld) {
  auto bs = sl2_field_generators(fld);
  std::vector<int> chi(bs.size(), 1);
  bs.push_back(M2{{fld.primitive_element(), fld.zero(), fld.zero(), fld.one()}});
  chi.push_back(-1);
  return make_graph("quadratic_twist", fld, bs, m2(fld, 2, 1, 1, 1), 0, chi);
}

inline PlantedGraph graph_frobenius(const FqField& fld) {
  if (fld.degree() < 2) throw std::invalid_argument("Frobenius graph needs a proper extension");
  auto bs = sl2_field_generators(fld);
  const M2 f{{fld.one(), fld.gen(), fld.zero(), fld.one()}};
  return make_graph("frobenius", fld, bs, mat_mul(fld, f, m2(fld, 1, 0, 1, 1)), 1, std::vector<int>(bs.size(), 1));
}

}  // namespace galsurj
