#pragma once

// S-box property analysis: derivatives, difference distribution tables,
// differential uniformity, strong anti-invariance, linear structures and
// the n-hat measure, affine hulls of derivative images, nonlinearity.

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tbtrap/f2lin.hpp"

namespace tbtrap {

struct SBox {
  int m = 0;
  std::vector<std::uint16_t> table;

  SBox() = default;
  SBox(int width, std::vector<std::uint16_t> t) : m(width), table(std::move(t)) {
    if (width < 1 || width > 12)
      throw std::invalid_argument("SBox: width out of range");
    if (table.size() != (std::size_t(1) << width))
      throw std::invalid_argument("SBox: table size must be 2^m");
    for (auto v : table)
      if (v >= (1u << width))
        throw std::invalid_argument("SBox: table value out of range");
  }

  std::uint16_t operator()(word x) const { return table[x]; }
  std::size_t domain_size() const { return table.size(); }

  bool is_bijective() const {
    std::vector<bool> seen(table.size(), false);
    for (auto v : table) {
      if (seen[v]) return false;
      seen[v] = true;
    }
    return true;
  }

  SBox inverse() const {
    if (!is_bijective()) throw std::domain_error("SBox: not bijective");
    std::vector<std::uint16_t> inv(table.size());
    for (std::size_t x = 0; x < table.size(); ++x) inv[table[x]] = std::uint16_t(x);
    return SBox(m, std::move(inv));
  }

  friend bool operator==(const SBox&, const SBox&) = default;
};

inline SBox identity_sbox(int m) {
  std::vector<std::uint16_t> t(std::size_t(1) << m);
  for (std::size_t x = 0; x < t.size(); ++x) t[x] = std::uint16_t(x);
  return SBox(m, std::move(t));
}

inline SBox sbox_from_linear_map(const LinearMap& lm) {
  std::vector<std::uint16_t> t(std::size_t(1) << lm.dim());
  for (word x = 0; x < (word(1) << lm.dim()); ++x) t[x] = std::uint16_t(lm.apply(x));
  return SBox(lm.dim(), std::move(t));
}

// Lookup table of x -> x^{2^m - 2} over GF(2^m); 0 maps to 0.
inline SBox gf_inverse_sbox(const GFContext& ctx) {
  return SBox(ctx.degree(), ctx.inverse_table());
}

inline SBox random_bijective_sbox(int m, std::mt19937_64& rng, bool fix_zero = false) {
  std::vector<std::uint16_t> t(std::size_t(1) << m);
  for (std::size_t x = 0; x < t.size(); ++x) t[x] = std::uint16_t(x);
  std::size_t lo = fix_zero ? 1 : 0;
  for (std::size_t i = t.size() - 1; i > lo; --i) {
    std::size_t j = lo + std::size_t(rng() % (i - lo + 1));
    std::swap(t[i], t[j]);
  }
  return SBox(m, std::move(t));
}

// f^_u(x) = f(x+u) + f(x)
inline std::vector<std::uint16_t> derivative(const SBox& f, word u) {
  std::vector<std::uint16_t> d(f.table.size());
  for (word x = 0; x < d.size(); ++x) d[x] = std::uint16_t(f.table[x ^ u] ^ f.table[x]);
  return d;
}

struct DDT {
  int m = 0;
  std::vector<std::uint32_t> counts;  // 2^m x 2^m, row-major

  std::uint32_t at(word a, word b) const { return counts[(std::size_t(a) << m) | b]; }
};

inline DDT compute_ddt(const SBox& f) {
  DDT ddt;
  ddt.m = f.m;
  std::size_t size = f.table.size();
  ddt.counts.assign(size * size, 0);
  for (word a = 0; a < size; ++a)
    for (word x = 0; x < size; ++x)
      ++ddt.counts[(std::size_t(a) << f.m) | (f.table[x ^ a] ^ f.table[x])];
  return ddt;
}

inline int differential_uniformity(const DDT& ddt) {
  std::uint32_t best = 0;
  std::size_t size = std::size_t(1) << ddt.m;
  for (word a = 1; a < size; ++a)
    for (word b = 0; b < size; ++b) best = std::max(best, ddt.at(a, b));
  return int(best);
}

inline int differential_uniformity(const SBox& f) {
  return differential_uniformity(compute_ddt(f));
}

// { f(x+u)+f(x) : x in S }, returned sorted without duplicates.
inline std::vector<word> derivative_image_on(const SBox& f, word u,
                                             const std::vector<word>& s) {
  std::vector<word> out;
  out.reserve(s.size());
  for (word x : s) out.push_back(word(f.table[x ^ u] ^ f.table[x]));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::vector<word> derivative_image(const SBox& f, word u) {
  std::vector<word> all(f.table.size());
  for (word x = 0; x < all.size(); ++x) all[x] = x;
  return derivative_image_on(f, u, all);
}

struct AntiInvarianceResult {
  bool holds = false;
  // Witness pair (U, W = f(U)) with dim >= m - r when the property fails.
  std::optional<std::pair<Subspace, Subspace>> witness;
};

// Setwise image of a subspace; nullopt when the image is not a subspace.
inline std::optional<Subspace> setwise_subspace_image(const SBox& f, const Subspace& u) {
  std::vector<word> img;
  img.reserve(std::size_t(1) << u.dim());
  for (word v : u.elements()) img.push_back(f.table[v]);
  std::sort(img.begin(), img.end());
  img.erase(std::unique(img.begin(), img.end()), img.end());
  if (img.empty() || img[0] != 0) return std::nullopt;
  Subspace sp(f.m);
  for (word y : img) sp.insert(y);
  // A set containing 0 equals its span iff the sizes agree.
  if (sp.size() != img.size()) return std::nullopt;
  return sp;
}

// f is strongly r-anti-invariant iff every subspace pair U, W with f(U) = W
// has dim < m - r, unless both are the full space. The quantifier collapses
// to scanning U with dim in [m-r, m): W is determined as f(U) and the pair
// violates iff that image set is itself a subspace.
inline AntiInvarianceResult is_strongly_anti_invariant(const SBox& f, int r) {
  if (f.table[0] != 0)
    throw std::invalid_argument("strong anti-invariance requires f(0) = 0");
  if (r < 1 || r >= f.m) throw std::invalid_argument("r out of range");
  if (!f.is_bijective())
    throw std::invalid_argument("strong anti-invariance requires a bijective S-box");
  AntiInvarianceResult res;
  for (int d = f.m - r; d < f.m; ++d) {
    bool found = false;
    detail::for_each_subspace_of_dim(f.m, d, [&](const Subspace& u) {
      if (found) return;
      if (auto w = setwise_subspace_image(f, u)) {
        res.witness = std::make_pair(u, *w);
        found = true;
      }
    });
    if (found) return res;
  }
  res.holds = true;
  return res;
}

// V_a = { v : x -> <f^_a(x), v> is constant }. Closed under addition by
// construction of the defining condition; verified before returning.
inline Subspace linear_structure_space(const SBox& f, word a) {
  if (a == 0) throw std::invalid_argument("linear_structure_space: a must be nonzero");
  std::vector<std::uint16_t> d = derivative(f, a);
  Subspace va(f.m);
  std::size_t size = f.table.size();
  std::vector<word> members;
  for (word v = 0; v < size; ++v) {
    int c = dot(d[0], v);
    bool constant = true;
    for (word x = 1; x < size; ++x) {
      if (dot(d[x], v) != c) {
        constant = false;
        break;
      }
    }
    if (constant) members.push_back(v);
  }
  for (word v : members) va.insert(v);
  if (va.size() != members.size())
    throw std::logic_error("V_a is not closed under addition");
  return va;
}

// max over a != 0 of |V_a| - 1.
inline int n_hat(const SBox& f) {
  int best = 0;
  for (word a = 1; a < f.table.size(); ++a) {
    Subspace va = linear_structure_space(f, a);
    best = std::max(best, int(va.size()) - 1);
  }
  return best;
}

// Smallest affine subspace containing Im(f^_a), returned as the pair
// (f(a), V_a-perp). Requires f(0) = 0 so that f(a) lies in the image.
inline std::pair<word, Subspace> affine_hull_of_derivative_image(const SBox& f, word a) {
  if (a == 0) throw std::invalid_argument("affine hull: a must be nonzero");
  if (f.table[0] != 0) throw std::invalid_argument("affine hull requires f(0) = 0");
  Subspace va = linear_structure_space(f, a);
  return {word(f.table[a]), va.orthogonal_complement()};
}

// Walsh-transform nonlinearity: min distance of nonzero components to the
// affine functions.
inline int nonlinearity(const SBox& f) {
  std::size_t size = f.table.size();
  std::vector<int> w(size);
  long best = 0;
  for (word v = 1; v < size; ++v) {
    for (word x = 0; x < size; ++x) w[x] = dot(f.table[x], v) ? -1 : 1;
    // in-place fast Walsh-Hadamard transform
    for (std::size_t h = 1; h < size; h <<= 1) {
      for (std::size_t i = 0; i < size; i += h << 1) {
        for (std::size_t j = i; j < i + h; ++j) {
          int x = w[j], y = w[j + h];
          w[j] = x + y;
          w[j + h] = x - y;
        }
      }
    }
    for (std::size_t u = 0; u < size; ++u)
      best = std::max(best, long(w[u] < 0 ? -w[u] : w[u]));
  }
  return int((long(size) - best) / 2);
}

// g(x) = f(x) + f(0); returns (g, f(0)).
inline std::pair<SBox, word> normalize_zero(const SBox& f) {
  word c = f.table[0];
  std::vector<std::uint16_t> t(f.table.size());
  for (std::size_t x = 0; x < t.size(); ++x) t[x] = std::uint16_t(f.table[x] ^ c);
  return {SBox(f.m, std::move(t)), c};
}

// Seeded search for a bijective S-box that is differentially 6-uniform and
// strongly 2-anti-invariant; such permutations exist at m = 4 but none is
// singled out here, so callers get whatever the budget uncovers.
inline std::optional<SBox> search_strongly2ai_6uniform(int m, std::uint64_t seed,
                                                       int tries) {
  std::mt19937_64 rng(seed);
  for (int t = 0; t < tries; ++t) {
    SBox f = random_bijective_sbox(m, rng, /*fix_zero=*/true);
    if (differential_uniformity(f) != 6) continue;
    if (m <= 2) continue;
    if (is_strongly_anti_invariant(f, 2).holds) return f;
  }
  return std::nullopt;
}

}  // namespace tbtrap
