#pragma once

// Word-packed linear algebra over F2: vectors of (F2)^n packed into a single
// unsigned word (bit k = coordinate k, block j occupying bits [(j-1)m, jm)),
// subspaces with canonical reduced-echelon bases, invertible linear maps,
// walls and per-block intersection profiles, and GF(2^m) arithmetic.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tbtrap {

using word = std::uint32_t;

constexpr int kMaxAmbientDim = 16;

inline word dim_mask(int n) { return n >= 32 ? ~word(0) : ((word(1) << n) - 1); }

inline int top_bit(word x) {
  return x == 0 ? -1 : 31 - std::countl_zero(x);
}

inline int parity(word x) { return std::popcount(x) & 1; }

// Standard dot product on packed bits.
inline int dot(word a, word b) { return parity(a & b); }

struct F2Vector {
  word bits = 0;
  int n = 0;

  F2Vector() = default;
  F2Vector(word b, int dim) : bits(b), n(dim) {
    if (dim < 0 || dim > kMaxAmbientDim)
      throw std::invalid_argument("F2Vector: dimension out of range");
    if (b & ~dim_mask(dim))
      throw std::invalid_argument("F2Vector: set bit at position >= n");
  }

  friend F2Vector operator^(F2Vector a, F2Vector b) {
    if (a.n != b.n) throw std::invalid_argument("F2Vector: dimension mismatch");
    return F2Vector(a.bits ^ b.bits, a.n);
  }
  friend bool operator==(const F2Vector&, const F2Vector&) = default;
};

// A subspace of (F2)^n held as a reduced row-echelon basis. Each basis row
// has a distinct pivot (highest set bit) and no row has another row's pivot
// set, so two Subspace values are equal iff their basis lists are identical.
class Subspace {
 public:
  Subspace() = default;
  explicit Subspace(int ambient) : n_(check_dim(ambient)) {}

  static Subspace span(const std::vector<word>& vectors, int ambient) {
    Subspace s(ambient);
    for (word v : vectors) s.insert(v);
    return s;
  }

  static Subspace span_of(const std::vector<F2Vector>& vectors, int ambient) {
    Subspace s(ambient);
    for (const F2Vector& v : vectors) {
      if (v.n != ambient) throw std::invalid_argument("span: dimension mismatch");
      s.insert(v.bits);
    }
    return s;
  }

  static Subspace full(int ambient) {
    Subspace s(ambient);
    for (int k = 0; k < ambient; ++k) s.insert(word(1) << k);
    return s;
  }

  int ambient_dim() const { return n_; }
  int dim() const { return int(basis_.size()); }
  bool is_zero() const { return basis_.empty(); }
  bool is_full() const { return dim() == n_; }
  bool is_trivial() const { return is_zero() || is_full(); }
  std::uint64_t size() const { return std::uint64_t(1) << dim(); }

  // Basis rows sorted by pivot position, ascending.
  const std::vector<word>& basis() const { return basis_; }

  // Reduces v by the basis; the residue is 0 iff v is in the subspace.
  word reduce(word v) const {
    for (word row : basis_) {
      if ((v >> top_bit(row)) & 1) v ^= row;
    }
    return v;
  }

  bool contains(word v) const { return reduce(v) == 0; }

  bool contains(const Subspace& other) const {
    for (word row : other.basis_)
      if (!contains(row)) return false;
    return true;
  }

  // Inserts v into the basis, keeping reduced echelon form.
  // Returns true if the dimension grew.
  bool insert(word v) {
    if (v & ~dim_mask(n_))
      throw std::invalid_argument("Subspace: vector has set bit at position >= n");
    v = reduce(v);
    if (v == 0) return false;
    int p = top_bit(v);
    for (word& row : basis_)
      if ((row >> p) & 1) row ^= v;
    basis_.push_back(v);
    std::sort(basis_.begin(), basis_.end(),
              [](word a, word b) { return top_bit(a) < top_bit(b); });
    return true;
  }

  // All 2^dim elements, in basis-combination order (deterministic).
  std::vector<word> elements() const {
    std::vector<word> out(std::size_t(1) << dim(), 0);
    for (std::size_t mask = 1; mask < out.size(); ++mask) {
      int low = std::countr_zero(mask);
      out[mask] = out[mask ^ (std::size_t(1) << low)] ^ basis_[std::size_t(low)];
    }
    return out;
  }

  Subspace sum(const Subspace& other) const {
    require_same_ambient(other);
    Subspace s = *this;
    for (word row : other.basis_) s.insert(row);
    return s;
  }

  Subspace intersect(const Subspace& other) const {
    require_same_ambient(other);
    // Zassenhaus-style via kernel is overkill at n <= 16; filter the smaller
    // element set through the other's membership test.
    const Subspace& small = dim() <= other.dim() ? *this : other;
    const Subspace& big = dim() <= other.dim() ? other : *this;
    Subspace s(n_);
    for (word v : small.elements())
      if (big.contains(v)) s.insert(v);
    return s;
  }

  // { v : <v, u> = 0 for all u in this subspace }.
  Subspace orthogonal_complement() const {
    Subspace s(n_);
    // Nullspace of the basis-rows-as-matrix: echelonize a copy tracking pivot
    // bits, then produce one kernel vector per free bit position.
    std::vector<word> rows = basis_;
    std::vector<int> pivot_of_row;
    word pivot_bits = 0;
    // Gaussian elimination with pivot = lowest set bit for easy back-subst.
    for (std::size_t r = 0; r < rows.size(); ++r) {
      // rows are already independent; eliminate using lowest available bit
      word v = rows[r];
      for (std::size_t q = 0; q < r; ++q)
        if ((v >> pivot_of_row[q]) & 1) v ^= rows[q];
      int p = std::countr_zero(v);
      rows[r] = v;
      pivot_of_row.push_back(p);
      pivot_bits |= word(1) << p;
      for (std::size_t q = 0; q < r; ++q)
        if ((rows[q] >> p) & 1) rows[q] ^= v;
    }
    for (int free = 0; free < n_; ++free) {
      if ((pivot_bits >> free) & 1) continue;
      word v = word(1) << free;
      for (std::size_t q = 0; q < rows.size(); ++q)
        if ((rows[q] >> free) & 1) v |= word(1) << pivot_of_row[q];
      s.insert(v);
    }
    return s;
  }

  friend bool operator==(const Subspace& a, const Subspace& b) {
    return a.n_ == b.n_ && a.basis_ == b.basis_;
  }

  // Lexicographic order on (dim, basis word tuple); used for deterministic
  // enumeration and witness selection.
  friend bool operator<(const Subspace& a, const Subspace& b) {
    if (a.dim() != b.dim()) return a.dim() < b.dim();
    return a.basis_ < b.basis_;
  }

 private:
  static int check_dim(int n) {
    if (n < 0 || n > kMaxAmbientDim)
      throw std::invalid_argument("Subspace: ambient dimension out of range");
    return n;
  }
  void require_same_ambient(const Subspace& other) const {
    if (n_ != other.n_)
      throw std::invalid_argument("Subspace: ambient dimension mismatch");
  }

  std::vector<word> basis_;
  int n_ = 0;
};

inline Subspace span(const std::vector<F2Vector>& vectors, int n) {
  return Subspace::span_of(vectors, n);
}

// Row-vector times matrix: row k is the image of e_k, so composition reads
// left to right and matches the postfix action v.g used throughout.
class LinearMap {
 public:
  LinearMap() = default;
  LinearMap(std::vector<word> rows, int n) : rows_(std::move(rows)), n_(n) {
    if (int(rows_.size()) != n)
      throw std::invalid_argument("LinearMap: need exactly n rows");
    for (word r : rows_)
      if (r & ~dim_mask(n))
        throw std::invalid_argument("LinearMap: row has set bit at position >= n");
  }

  static LinearMap identity(int n) {
    std::vector<word> rows(std::size_t(n), 0);
    for (int k = 0; k < n; ++k) rows[std::size_t(k)] = word(1) << k;
    return LinearMap(std::move(rows), n);
  }

  int dim() const { return n_; }
  const std::vector<word>& rows() const { return rows_; }

  word apply(word v) const {
    word out = 0;
    word x = v;
    while (x) {
      int k = std::countr_zero(x);
      x &= x - 1;
      out ^= rows_[std::size_t(k)];
    }
    return out;
  }

  int rank() const {
    Subspace s(n_);
    for (word r : rows_) s.insert(r);
    return s.dim();
  }

  bool is_invertible() const { return rank() == n_; }

  LinearMap inverse() const {
    // Gauss-Jordan on the augmented system.
    std::vector<word> a = rows_, inv(std::size_t(n_), 0);
    for (int k = 0; k < n_; ++k) inv[std::size_t(k)] = word(1) << k;
    for (int col = 0; col < n_; ++col) {
      int pivot = -1;
      for (int r = col; r < n_; ++r)
        if ((a[std::size_t(r)] >> col) & 1) { pivot = r; break; }
      if (pivot < 0) throw std::domain_error("LinearMap: not invertible");
      std::swap(a[std::size_t(col)], a[std::size_t(pivot)]);
      std::swap(inv[std::size_t(col)], inv[std::size_t(pivot)]);
      for (int r = 0; r < n_; ++r) {
        if (r != col && ((a[std::size_t(r)] >> col) & 1)) {
          a[std::size_t(r)] ^= a[std::size_t(col)];
          inv[std::size_t(r)] ^= inv[std::size_t(col)];
        }
      }
    }
    return LinearMap(std::move(inv), n_);
  }

  // this, then other.
  LinearMap compose(const LinearMap& other) const {
    if (n_ != other.n_) throw std::invalid_argument("LinearMap: dimension mismatch");
    std::vector<word> rows(std::size_t(n_), 0);
    for (int k = 0; k < n_; ++k) rows[std::size_t(k)] = other.apply(rows_[std::size_t(k)]);
    return LinearMap(std::move(rows), n_);
  }

  Subspace image_of(const Subspace& u) const {
    if (u.ambient_dim() != n_) throw std::invalid_argument("image_of: dimension mismatch");
    Subspace s(n_);
    for (word row : u.basis()) s.insert(apply(row));
    return s;
  }

  friend bool operator==(const LinearMap&, const LinearMap&) = default;

 private:
  std::vector<word> rows_;
  int n_ = 0;
};

// ---- walls and block decompositions ----

inline void check_block_shape(int ambient, int b, int m) {
  if (b < 1 || m < 1 || b * m != ambient)
    throw std::invalid_argument("block shape does not match ambient dimension");
}

inline word block_mask(int j, int m) {  // j is 1-based
  return dim_mask(m) << ((j - 1) * m);
}

inline Subspace wall_subspace(const std::vector<int>& index_set, int b, int m) {
  Subspace s(b * m);
  for (int j : index_set) {
    if (j < 1 || j > b) throw std::invalid_argument("wall index out of range");
    for (int k = 0; k < m; ++k) s.insert(word(1) << ((j - 1) * m + k));
  }
  return s;
}

// U is a wall iff it is a direct sum of blocks over a nonempty proper index
// set. Returns that index set when it exists.
inline std::optional<std::vector<int>> wall_index_set(const Subspace& u, int b, int m) {
  check_block_shape(u.ambient_dim(), b, m);
  if (u.dim() == 0 || u.dim() % m != 0) return std::nullopt;
  word support = 0;
  for (word row : u.basis()) support |= row;
  std::vector<int> idx;
  for (int j = 1; j <= b; ++j)
    if (support & block_mask(j, m)) idx.push_back(j);
  if (int(idx.size()) * m != u.dim()) return std::nullopt;
  if (idx.empty() || int(idx.size()) == b) return std::nullopt;
  if (!(u == wall_subspace(idx, b, m))) return std::nullopt;
  return idx;
}

inline bool is_wall(const Subspace& u, int b, int m) {
  return wall_index_set(u, b, m).has_value();
}

struct BlockIntersectionProfile {
  std::vector<int> dims;   // dims[j-1] = dim(U intersect V_j)
  std::vector<int> j_set;  // J_U = { j : V_j intersect U proper in V_j }
};

inline BlockIntersectionProfile block_intersection_profile(const Subspace& u, int b, int m) {
  check_block_shape(u.ambient_dim(), b, m);
  BlockIntersectionProfile out;
  out.dims.resize(std::size_t(b));
  const std::vector<word> elems = u.elements();
  for (int j = 1; j <= b; ++j) {
    word outside = dim_mask(b * m) & ~block_mask(j, m);
    Subspace inter(b * m);
    for (word v : elems)
      if (!(v & outside)) inter.insert(v);
    out.dims[std::size_t(j - 1)] = inter.dim();
    if (inter.dim() < m) out.j_set.push_back(j);
  }
  if (u.dim() == u.ambient_dim() - 1) {
    for (int j : out.j_set)
      if (out.dims[std::size_t(j - 1)] != m - 1)
        throw std::logic_error("hyperplane block intersection must have dim m-1");
  }
  return out;
}

inline std::vector<int> j_set_of(const Subspace& u, int b, int m) {
  return block_intersection_profile(u, b, m).j_set;
}

// ---- subspace enumeration ----

inline std::uint64_t gaussian_binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  // prod_{i=0..k-1} (2^{n-i} - 1) / (2^{k-i} - 1); always divides exactly.
  unsigned __int128 num = 1, den = 1;
  for (int i = 0; i < k; ++i) {
    num *= (std::uint64_t(1) << (n - i)) - 1;
    den *= (std::uint64_t(1) << (k - i)) - 1;
  }
  return std::uint64_t(num / den);
}

inline std::uint64_t subspace_count(int n) {
  std::uint64_t total = 0;
  for (int k = 0; k <= n; ++k) total += gaussian_binomial(n, k);
  return total;
}

namespace detail {

constexpr std::uint64_t kEnumerationBatchCap = 20'000'000;

// Emits every RREF basis of dimension k in (F2)^n, batch-sorted so the
// stream order is lexicographic on the basis word tuple.
inline void for_each_subspace_of_dim(int n, int k,
                                     const std::function<void(const Subspace&)>& fn) {
  if (k == 0) {
    fn(Subspace(n));
    return;
  }
  if (gaussian_binomial(n, k) > kEnumerationBatchCap)
    throw std::length_error("subspace enumeration too large");

  std::vector<std::vector<word>> bases;
  std::vector<int> pivots(std::size_t(k), 0);  // descending bit positions

  // Recursive choice of pivot positions, then free-entry odometer.
  std::function<void(int, int)> choose = [&](int idx, int max_pos) {
    if (idx == k) {
      // free positions of row i: bits below pivots[i] that are not pivots
      word pivot_bits = 0;
      for (int p : pivots) pivot_bits |= word(1) << p;
      std::vector<std::vector<int>> free_bits(std::size_t(k), std::vector<int>{});
      int total_free = 0;
      for (int i = 0; i < k; ++i) {
        for (int q = 0; q < pivots[std::size_t(i)]; ++q)
          if (!((pivot_bits >> q) & 1)) free_bits[std::size_t(i)].push_back(q);
        total_free += int(free_bits[std::size_t(i)].size());
      }
      std::vector<word> rows(std::size_t(k), 0);
      for (std::uint64_t assign = 0; assign < (std::uint64_t(1) << total_free); ++assign) {
        std::uint64_t a = assign;
        for (int i = 0; i < k; ++i) {
          word r = word(1) << pivots[std::size_t(i)];
          for (int q : free_bits[std::size_t(i)]) {
            if (a & 1) r |= word(1) << q;
            a >>= 1;
          }
          rows[std::size_t(i)] = r;
        }
        std::vector<word> sorted = rows;
        std::sort(sorted.begin(), sorted.end(),
                  [](word x, word y) { return top_bit(x) < top_bit(y); });
        bases.push_back(std::move(sorted));
      }
      return;
    }
    for (int p = max_pos; p >= k - 1 - idx; --p) {
      pivots[std::size_t(idx)] = p;
      choose(idx + 1, p - 1);
    }
  };
  choose(0, n - 1);

  std::sort(bases.begin(), bases.end());
  for (auto& rows : bases) {
    Subspace s(n);
    for (word r : rows) s.insert(r);
    fn(s);
  }
}

}  // namespace detail

// Streams each subspace exactly once, dimension-major, then lexicographic on
// the canonical basis encoding within a dimension.
inline void for_each_subspace(int n, std::optional<int> dim_filter,
                              const std::function<void(const Subspace&)>& fn) {
  if (n < 0 || n > 12) throw std::invalid_argument("subspace enumeration: n too large");
  if (dim_filter) {
    if (*dim_filter < 0 || *dim_filter > n)
      throw std::invalid_argument("subspace enumeration: bad dimension filter");
    detail::for_each_subspace_of_dim(n, *dim_filter, fn);
    return;
  }
  for (int k = 0; k <= n; ++k) detail::for_each_subspace_of_dim(n, k, fn);
}

inline std::vector<Subspace> enumerate_subspaces(int n, std::optional<int> dim_filter = {}) {
  std::vector<Subspace> out;
  for_each_subspace(n, dim_filter, [&](const Subspace& s) { out.push_back(s); });
  return out;
}

// Subspaces of a given subspace, enumerated through its basis coordinates.
// Order follows the coordinate-space enumeration and is deterministic.
inline std::vector<Subspace> subspaces_of(const Subspace& u) {
  std::vector<Subspace> out;
  const std::vector<word>& basis = u.basis();
  int k = u.dim();
  for_each_subspace(k, std::nullopt, [&](const Subspace& inner) {
    Subspace s(u.ambient_dim());
    for (word row : inner.basis()) {
      word v = 0, x = row;
      while (x) {
        int i = std::countr_zero(x);
        x &= x - 1;
        v ^= basis[std::size_t(i)];
      }
      s.insert(v);
    }
    out.push_back(s);
  });
  return out;
}

// ---- GF(2^m) ----

class GFContext {
 public:
  GFContext(int m, word poly) : m_(m), poly_(poly) {
    if (m < 2 || m > kMaxAmbientDim)
      throw std::invalid_argument("GFContext: field degree out of range");
    if (top_bit(poly) != m)
      throw std::invalid_argument("GFContext: polynomial degree must equal m");
    if (!poly_irreducible(poly, m))
      throw std::invalid_argument("GFContext: polynomial is reducible");
  }

  explicit GFContext(int m) : GFContext(m, default_poly(m)) {}

  static word default_poly(int m) {
    switch (m) {
      case 2: return 0x7;     // x^2+x+1
      case 3: return 0xB;     // x^3+x+1
      case 4: return 0x13;    // x^4+x+1
      case 5: return 0x25;    // x^5+x^2+1
      case 6: return 0x43;    // x^6+x+1
      case 7: return 0x83;    // x^7+x+1
      case 8: return 0x11B;   // x^8+x^4+x^3+x+1
      default:
        throw std::invalid_argument("no default polynomial for this degree");
    }
  }

  int degree() const { return m_; }
  word poly() const { return poly_; }

  word mul(word a, word b) const {
    word acc = 0;
    while (b) {
      if (b & 1) acc ^= a;
      b >>= 1;
      a <<= 1;
      if ((a >> m_) & 1) a ^= poly_;
    }
    return acc;
  }

  word pow(word a, std::uint64_t e) const {
    word acc = 1, base = a;
    while (e) {
      if (e & 1) acc = mul(acc, base);
      base = mul(base, base);
      e >>= 1;
    }
    return acc;
  }

  // x^{2^m - 2}; maps 0 to 0 by convention.
  word inv(word a) const {
    if (a == 0) return 0;
    return pow(a, (std::uint64_t(1) << m_) - 2);
  }

  std::vector<std::uint16_t> inverse_table() const {
    std::vector<std::uint16_t> t(std::size_t(1) << m_);
    for (word x = 0; x < (word(1) << m_); ++x) t[x] = std::uint16_t(inv(x));
    return t;
  }

 private:
  // Exhaustive factor check: no divisor of degree in [1, m/2].
  static bool poly_irreducible(word p, int m) {
    for (int d = 1; 2 * d <= m; ++d) {
      for (word q = (word(1) << d); q < (word(1) << (d + 1)); ++q) {
        if (poly_mod(p, q) == 0) return false;
      }
    }
    return true;
  }

  static word poly_mod(word a, word b) {
    int db = top_bit(b);
    while (true) {
      int da = top_bit(a);
      if (da < db) return a;
      a ^= b << (da - db);
    }
  }

  int m_;
  word poly_;
};

}  // namespace tbtrap
