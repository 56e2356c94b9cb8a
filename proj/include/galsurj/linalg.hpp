#pragma once

// Small dense matrices over the field types of finitefield.hpp, plus
// Gaussian elimination on dynamic row lists.

#include <algorithm>
#include <array>
#include <type_traits>
#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "galsurj/finitefield.hpp"

namespace galsurj {

template <class E, int N>
struct Mat {
  std::array<E, N * N> a{};
  E& operator()(int i, int j) { return a[i * N + j]; }
  const E& operator()(int i, int j) const { return a[i * N + j]; }
  bool operator==(const Mat&) const = default;
};

template <class F>
using Elem = typename F::element;

template <class F, int N>
using MatF = Mat<Elem<F>, N>;

template <class F, int N>
MatF<F, N> mat_identity(const F& f) {
  MatF<F, N> m;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) m(i, j) = i == j ? f.one() : f.zero();
  return m;
}

template <class F, int N>
MatF<F, N> mat_scalar(const F& f, const Elem<F>& c) {
  MatF<F, N> m;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) m(i, j) = i == j ? c : f.zero();
  return m;
}

template <class F, int N>
MatF<F, N> mat_from_ints(const F& f, const std::array<std::int64_t, N * N>& v) {
  MatF<F, N> m;
  for (int i = 0; i < N * N; ++i) m.a[i] = f.from_int(v[i]);
  return m;
}

template <class F, int N>
MatF<F, N> mat_mul(const F& f, const MatF<F, N>& x, const MatF<F, N>& y) {
  MatF<F, N> r;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      Elem<F> s = f.zero();
      for (int k = 0; k < N; ++k) s = f.add(s, f.mul(x(i, k), y(k, j)));
      r(i, j) = s;
    }
  return r;
}

// Prime-field fast path: accumulate in 64 bits, reduce once.
template <int N>
Mat<std::uint32_t, N> mat_mul(const PrimeField& f, const Mat<std::uint32_t, N>& x, const Mat<std::uint32_t, N>& y) {
  Mat<std::uint32_t, N> r;
  const u64 p = f.characteristic();
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      u64 s = 0;
      for (int k = 0; k < N; ++k) s += static_cast<u64>(x(i, k)) * y(k, j);
      r(i, j) = static_cast<std::uint32_t>(s % p);
    }
  return r;
}

template <class F, int N>
MatF<F, N> mat_add(const F& f, const MatF<F, N>& x, const MatF<F, N>& y) {
  MatF<F, N> r;
  for (int i = 0; i < N * N; ++i) r.a[i] = f.add(x.a[i], y.a[i]);
  return r;
}

template <class F, int N>
MatF<F, N> mat_sub(const F& f, const MatF<F, N>& x, const MatF<F, N>& y) {
  MatF<F, N> r;
  for (int i = 0; i < N * N; ++i) r.a[i] = f.sub(x.a[i], y.a[i]);
  return r;
}

template <class F, int N>
MatF<F, N> mat_scale(const F& f, const Elem<F>& c, const MatF<F, N>& x) {
  MatF<F, N> r;
  for (int i = 0; i < N * N; ++i) r.a[i] = f.mul(c, x.a[i]);
  return r;
}

template <class E, int N>
Mat<E, N> mat_transpose(const Mat<E, N>& x) {
  Mat<E, N> r;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) r(i, j) = x(j, i);
  return r;
}

template <class F, int N>
MatF<F, N> mat_map(const F& f, const MatF<F, N>& x, Elem<F> (F::*op)(const Elem<F>&) const) {
  MatF<F, N> r;
  for (int i = 0; i < N * N; ++i) r.a[i] = (f.*op)(x.a[i]);
  return r;
}

template <class F, int N>
std::array<Elem<F>, N> mat_apply(const F& f, const MatF<F, N>& m, const std::type_identity_t<std::array<Elem<F>, N>>& v) {
  std::array<Elem<F>, N> r;
  for (int i = 0; i < N; ++i) {
    Elem<F> s = f.zero();
    for (int k = 0; k < N; ++k) s = f.add(s, f.mul(m(i, k), v[k]));
    r[i] = s;
  }
  return r;
}

template <class F, int N>
Elem<F> mat_trace(const F& f, const MatF<F, N>& m) {
  Elem<F> s = f.zero();
  for (int i = 0; i < N; ++i) s = f.add(s, m(i, i));
  return s;
}

template <class F, int N>
Elem<F> mat_det(const F& f, MatF<F, N> m) {
  Elem<F> det = f.one();
  for (int c = 0; c < N; ++c) {
    int piv = -1;
    for (int r = c; r < N; ++r)
      if (!f.is_zero(m(r, c))) {
        piv = r;
        break;
      }
    if (piv < 0) return f.zero();
    if (piv != c) {
      for (int j = 0; j < N; ++j) std::swap(m(c, j), m(piv, j));
      det = f.neg(det);
    }
    det = f.mul(det, m(c, c));
    Elem<F> inv = f.inv(m(c, c));
    for (int r = c + 1; r < N; ++r) {
      if (f.is_zero(m(r, c))) continue;
      Elem<F> k = f.mul(m(r, c), inv);
      for (int j = c; j < N; ++j) m(r, j) = f.sub(m(r, j), f.mul(k, m(c, j)));
    }
  }
  return det;
}

template <class F, int N>
std::optional<MatF<F, N>> mat_inverse(const F& f, MatF<F, N> m) {
  MatF<F, N> inv = mat_identity<F, N>(f);
  for (int c = 0; c < N; ++c) {
    int piv = -1;
    for (int r = c; r < N; ++r)
      if (!f.is_zero(m(r, c))) {
        piv = r;
        break;
      }
    if (piv < 0) return std::nullopt;
    for (int j = 0; j < N; ++j) {
      std::swap(m(c, j), m(piv, j));
      std::swap(inv(c, j), inv(piv, j));
    }
    Elem<F> s = f.inv(m(c, c));
    for (int j = 0; j < N; ++j) {
      m(c, j) = f.mul(s, m(c, j));
      inv(c, j) = f.mul(s, inv(c, j));
    }
    for (int r = 0; r < N; ++r) {
      if (r == c || f.is_zero(m(r, c))) continue;
      Elem<F> k = m(r, c);
      for (int j = 0; j < N; ++j) {
        m(r, j) = f.sub(m(r, j), f.mul(k, m(c, j)));
        inv(r, j) = f.sub(inv(r, j), f.mul(k, inv(c, j)));
      }
    }
  }
  return inv;
}

template <class F, int N>
MatF<F, N> mat_inv(const F& f, const MatF<F, N>& m) {
  auto r = mat_inverse<F, N>(f, m);
  if (!r) throw std::domain_error("matrix is singular");
  return *r;
}

template <class F, int N>
MatF<F, N> mat_pow(const F& f, MatF<F, N> m, u64 e) {
  MatF<F, N> r = mat_identity<F, N>(f);
  while (e) {
    if (e & 1) r = mat_mul(f, r, m);
    m = mat_mul(f, m, m);
    e >>= 1;
  }
  return r;
}

template <class F, int N>
bool mat_is_scalar(const F& f, const MatF<F, N>& m) {
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i != j && !f.is_zero(m(i, j))) return false;
      if (i == j && !f.eq(m(i, i), m(0, 0))) return false;
    }
  return true;
}

// Characteristic polynomial det(X I - M), coefficients least-degree-first,
// length N + 1. Hessenberg reduction followed by the standard recurrence;
// uses only field operations, so it works in every characteristic.
template <class F, int N>
std::array<Elem<F>, N + 1> charpoly(const F& f, MatF<F, N> h) {
  for (int m = 1; m < N - 1; ++m) {
    int piv = -1;
    for (int i = m; i < N; ++i)
      if (!f.is_zero(h(i, m - 1))) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    if (piv != m) {
      for (int j = 0; j < N; ++j) std::swap(h(piv, j), h(m, j));
      for (int i = 0; i < N; ++i) std::swap(h(i, piv), h(i, m));
    }
    Elem<F> inv = f.inv(h(m, m - 1));
    for (int i = m + 1; i < N; ++i) {
      if (f.is_zero(h(i, m - 1))) continue;
      Elem<F> u = f.mul(h(i, m - 1), inv);
      for (int j = 0; j < N; ++j) h(i, j) = f.sub(h(i, j), f.mul(u, h(m, j)));
      for (int j = 0; j < N; ++j) h(j, m) = f.add(h(j, m), f.mul(u, h(j, i)));
    }
  }
  // p[k] is the char poly of the leading k x k block.
  std::vector<std::vector<Elem<F>>> p(N + 1);
  p[0] = {f.one()};
  for (int k = 1; k <= N; ++k) {
    std::vector<Elem<F>> cur(k + 1, f.zero());
    // (X - h_{k-1,k-1}) p[k-1]
    for (int d = 0; d < k; ++d) {
      cur[d + 1] = f.add(cur[d + 1], p[k - 1][d]);
      cur[d] = f.sub(cur[d], f.mul(h(k - 1, k - 1), p[k - 1][d]));
    }
    Elem<F> prod = f.one();
    for (int i = 1; i < k; ++i) {
      prod = f.mul(prod, h(k - i, k - i - 1));
      Elem<F> c = f.mul(prod, h(k - i - 1, k - 1));
      for (std::size_t d = 0; d < p[k - i - 1].size(); ++d) cur[d] = f.sub(cur[d], f.mul(c, p[k - i - 1][d]));
    }
    p[k] = std::move(cur);
  }
  std::array<Elem<F>, N + 1> out;
  for (int i = 0; i <= N; ++i) out[i] = p[N][i];
  return out;
}

// ---------------------------------------------------------------------------
// Dynamic linear algebra.

template <class F>
using Row = std::vector<Elem<F>>;

// In-place reduced row echelon form; returns pivot columns.
template <class F>
std::vector<int> rref(const F& f, std::vector<Row<F>>& rows) {
  std::vector<int> pivots;
  if (rows.empty()) return pivots;
  const int ncols = static_cast<int>(rows[0].size());
  int r = 0;
  for (int c = 0; c < ncols && r < static_cast<int>(rows.size()); ++c) {
    int piv = -1;
    for (int i = r; i < static_cast<int>(rows.size()); ++i)
      if (!f.is_zero(rows[i][c])) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(rows[r], rows[piv]);
    Elem<F> s = f.inv(rows[r][c]);
    for (auto& x : rows[r]) x = f.mul(s, x);
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
      if (i == r || f.is_zero(rows[i][c])) continue;
      Elem<F> k = rows[i][c];
      for (int j = c; j < ncols; ++j) rows[i][j] = f.sub(rows[i][j], f.mul(k, rows[r][j]));
    }
    pivots.push_back(c);
    ++r;
  }
  rows.resize(r);
  return pivots;
}

// Basis of {x : A x = 0} for A given by rows of length ncols.
template <class F>
std::vector<Row<F>> nullspace(const F& f, std::vector<Row<F>> rows, int ncols) {
  auto pivots = rref(f, rows);
  std::vector<bool> is_piv(ncols, false);
  for (int c : pivots) is_piv[c] = true;
  std::vector<Row<F>> basis;
  for (int free = 0; free < ncols; ++free) {
    if (is_piv[free]) continue;
    Row<F> v(ncols, f.zero());
    v[free] = f.one();
    for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = f.neg(rows[i][free]);
    basis.push_back(std::move(v));
  }
  return basis;
}

template <class F>
int rank_of(const F& f, std::vector<Row<F>> rows) {
  return static_cast<int>(rref(f, rows).size());
}

// ---------------------------------------------------------------------------
// Packed keys for hashing group elements.

struct Key128 {
  u64 lo = 0, hi = 0;
  bool operator==(const Key128&) const = default;
};

struct Key128Hash {
  std::size_t operator()(const Key128& k) const {
    u64 x = k.lo * 0x9E3779B97F4A7C15ULL ^ (k.hi + 0x632BE59BD9B4E019ULL + (k.lo << 6) + (k.lo >> 2));
    x ^= x >> 31;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 29;
    return static_cast<std::size_t>(x);
  }
};

// Open-addressing set of keys; the all-zero key marks an empty slot and is
// stored out of band.
class KeySet {
 public:
  bool insert(const Key128& k) {
    if (k == Key128{}) {
      const bool fresh = !has_zero_;
      has_zero_ = true;
      size_ += fresh;
      return fresh;
    }
    if ((size_ + 1) * 2 > slots_.size()) grow();
    return place(k);
  }
  bool contains(const Key128& k) const {
    if (k == Key128{}) return has_zero_;
    if (slots_.empty()) return false;
    const std::size_t mask = slots_.size() - 1;
    for (std::size_t i = Key128Hash{}(k) & mask;; i = (i + 1) & mask) {
      if (slots_[i] == k) return true;
      if (slots_[i] == Key128{}) return false;
    }
  }
  std::size_t size() const { return size_; }

 private:
  bool place(const Key128& k) {
    const std::size_t mask = slots_.size() - 1;
    for (std::size_t i = Key128Hash{}(k) & mask;; i = (i + 1) & mask) {
      if (slots_[i] == k) return false;
      if (slots_[i] == Key128{}) {
        slots_[i] = k;
        ++size_;
        return true;
      }
    }
  }
  void grow() {
    std::vector<Key128> old(std::max<std::size_t>(64, slots_.size() * 2));
    old.swap(slots_);
    size_ = has_zero_ ? 1 : 0;
    for (const auto& k : old)
      if (!(k == Key128{})) place(k);
  }
  std::vector<Key128> slots_;
  std::size_t size_ = 0;
  bool has_zero_ = false;
};

class KeyPacker {
 public:
  void put(u64 value, int bits) {
    if (pos_ + bits > 128) throw std::length_error("element does not fit a 128-bit key");
    if (bits < 64) value &= (1ULL << bits) - 1;
    if (pos_ < 64) {
      key_.lo |= value << pos_;
      if (pos_ + bits > 64) key_.hi |= value >> (64 - pos_);
    } else {
      key_.hi |= value << (pos_ - 64);
    }
    pos_ += bits;
  }
  Key128 key() const { return key_; }

 private:
  Key128 key_;
  int pos_ = 0;
};

class KeyReader {
 public:
  explicit KeyReader(Key128 k) : key_(k) {}
  u64 get(int bits) {
    u64 v;
    if (pos_ < 64) {
      v = key_.lo >> pos_;
      if (pos_ + bits > 64) v |= key_.hi << (64 - pos_);
    } else {
      v = key_.hi >> (pos_ - 64);
    }
    pos_ += bits;
    return bits < 64 ? v & ((1ULL << bits) - 1) : v;
  }

 private:
  Key128 key_;
  int pos_ = 0;
};

template <class F>
int element_bits(const F& f) {
  return std::bit_width(f.size() - 1);
}

template <class F, int N>
void pack_matrix(const F& f, const MatF<F, N>& m, KeyPacker& kp) {
  const int bits = element_bits(f);
  for (const auto& e : m.a) kp.put(f.index(e), bits);
}

template <class F, int N>
MatF<F, N> unpack_matrix(const F& f, KeyReader& kr) {
  const int bits = element_bits(f);
  MatF<F, N> m;
  for (auto& e : m.a) e = f.from_index(static_cast<std::uint32_t>(kr.get(bits)));
  return m;
}

// Scale so that the first nonzero entry (row-major) is 1.
template <class F, int N>
MatF<F, N> projective_canonical(const F& f, const MatF<F, N>& m) {
  for (const auto& e : m.a)
    if (!f.is_zero(e)) return mat_scale<F, N>(f, f.inv(e), m);
  return m;
}

}  // namespace galsurj
