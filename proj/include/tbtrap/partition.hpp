#pragma once

// Partitions of V = (F2)^n stored densely as 2^n block labels, linear and
// linear-affine partitions with canonical expansion, mapping under
// permutations and translations, the translation-subgroup classifier, and
// the derivative-containment checks for maps carrying one structured
// partition onto another.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "tbtrap/f2lin.hpp"

namespace tbtrap {

constexpr int kMaxPartitionDim = 12;

using PermTable = std::vector<std::uint16_t>;

inline PermTable identity_table(int n) {
  PermTable t(std::size_t(1) << n);
  for (std::size_t x = 0; x < t.size(); ++x) t[x] = std::uint16_t(x);
  return t;
}

inline bool is_permutation_table(const PermTable& t) {
  std::vector<bool> seen(t.size(), false);
  for (auto v : t) {
    if (v >= t.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

inline PermTable invert_table(const PermTable& t) {
  PermTable inv(t.size());
  for (std::size_t x = 0; x < t.size(); ++x) inv[t[x]] = std::uint16_t(x);
  return inv;
}

// t then u.
inline PermTable compose_tables(const PermTable& t, const PermTable& u) {
  PermTable out(t.size());
  for (std::size_t x = 0; x < t.size(); ++x) out[x] = u[t[x]];
  return out;
}

// Canonical form: blocks labelled 0,1,2,... in order of their minimal
// member, so two Partition values are equal iff the arrays are identical.
class Partition {
 public:
  Partition() = default;

  static Partition from_labels(int n, std::vector<std::uint16_t> labels) {
    if (n < 0 || n > kMaxPartitionDim)
      throw std::invalid_argument("Partition: dimension out of range");
    if (labels.size() != (std::size_t(1) << n))
      throw std::invalid_argument("Partition: need 2^n labels");
    Partition p;
    p.n_ = n;
    p.block_id_ = std::move(labels);
    p.canonicalize();
    return p;
  }

  static Partition singletons(int n) {
    std::vector<std::uint16_t> l(std::size_t(1) << n);
    for (std::size_t x = 0; x < l.size(); ++x) l[x] = std::uint16_t(x);
    return from_labels(n, std::move(l));
  }

  static Partition one_block(int n) {
    return from_labels(n, std::vector<std::uint16_t>(std::size_t(1) << n, 0));
  }

  int dim() const { return n_; }
  std::size_t points() const { return block_id_.size(); }
  const std::vector<std::uint16_t>& labels() const { return block_id_; }
  std::uint16_t block_of(word x) const { return block_id_[x]; }

  int block_count() const {
    int c = 0;
    for (auto l : block_id_) c = std::max(c, int(l) + 1);
    return c;
  }

  bool is_trivial() const {
    return block_count() == 1 || block_count() == int(points());
  }

  std::vector<word> block_members(std::uint16_t label) const {
    std::vector<word> out;
    for (word x = 0; x < points(); ++x)
      if (block_id_[x] == label) out.push_back(x);
    return out;
  }

  std::vector<std::vector<word>> blocks() const {
    std::vector<std::vector<word>> out(std::size_t(block_count()), std::vector<word>{});
    for (word x = 0; x < points(); ++x) out[block_id_[x]].push_back(x);
    return out;
  }

  // Image under the translation x -> x + v.
  Partition translate(word v) const {
    std::vector<std::uint16_t> l(block_id_.size());
    for (std::size_t x = 0; x < l.size(); ++x) l[x] = block_id_[x ^ v];
    return from_labels(n_, std::move(l));
  }

  // Image under an arbitrary permutation table.
  Partition map(const PermTable& rho) const {
    if (rho.size() != block_id_.size())
      throw std::invalid_argument("Partition::map: table size mismatch");
    std::vector<std::uint16_t> l(block_id_.size());
    for (std::size_t x = 0; x < l.size(); ++x) l[rho[x]] = block_id_[x];
    return from_labels(n_, std::move(l));
  }

  bool fixed_by_translation(word v) const {
    // same partition iff every pair (x, x+v) may only move between blocks
    // consistently; cheap check without re-canonicalizing.
    std::vector<int> image_label(std::size_t(block_count()), -1);
    for (std::size_t x = 0; x < block_id_.size(); ++x) {
      int from = block_id_[x ^ v];
      int to = block_id_[x];
      if (image_label[std::size_t(from)] < 0)
        image_label[std::size_t(from)] = to;
      else if (image_label[std::size_t(from)] != to)
        return false;
    }
    return true;
  }

  // Fixed by every translation from the subspace (basis suffices: the
  // stabilizer of a partition in the translation group is a subgroup).
  bool fixed_by_translations(const Subspace& u) const {
    for (word d : u.basis())
      if (!fixed_by_translation(d)) return false;
    return true;
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  void canonicalize() {
    std::vector<int> relabel(block_id_.size(), -1);
    std::uint16_t next = 0;
    for (auto& l : block_id_) {
      if (relabel[l] < 0) relabel[l] = next++;
      l = std::uint16_t(relabel[l]);
    }
  }

  int n_ = 0;
  std::vector<std::uint16_t> block_id_;
};

// L(U) = { U + v : v in V }.
struct LinearPartition {
  Subspace U;

  explicit LinearPartition(Subspace u) : U(std::move(u)) {}
  bool is_trivial() const { return U.is_trivial(); }
};

// LA_U(W1|W2) = { W1+v : v in U } u { (W2+vbar)+v : v in U } for any
// vbar outside U; the expansion is independent of that choice.
struct LinearAffinePartition {
  Subspace U;   // hyperplane, dim n-1
  Subspace W1;  // subspace of U
  Subspace W2;  // subspace of U

  LinearAffinePartition(Subspace u, Subspace w1, Subspace w2)
      : U(std::move(u)), W1(std::move(w1)), W2(std::move(w2)) {
    if (U.dim() != U.ambient_dim() - 1)
      throw std::invalid_argument("linear-affine partition: U must be a hyperplane");
    if (!U.contains(W1) || !U.contains(W2))
      throw std::invalid_argument("linear-affine partition: W1, W2 must lie in U");
  }

  // Minimal vector of V \ U.
  word canonical_vbar() const {
    for (word v = 1; v < (word(1) << U.ambient_dim()); ++v)
      if (!U.contains(v)) return v;
    throw std::logic_error("hyperplane covers the full space");
  }

  bool is_linear() const { return W1 == W2; }
};

using StructuredPartition = std::variant<LinearPartition, LinearAffinePartition>;

inline Partition expand(const LinearPartition& p) {
  int n = p.U.ambient_dim();
  std::vector<std::uint16_t> labels(std::size_t(1) << n, std::uint16_t(0xffff));
  std::vector<word> coset = p.U.elements();
  std::uint16_t next = 0;
  for (word x = 0; x < (word(1) << n); ++x) {
    if (labels[x] != 0xffff) continue;
    for (word u : coset) labels[x ^ u] = next;
    ++next;
  }
  return Partition::from_labels(n, std::move(labels));
}

// Expansion pinned to a specific vbar; exposed so the vbar-independence
// property can be tested directly.
inline Partition expand_with_vbar(const LinearAffinePartition& p, word vbar) {
  int n = p.U.ambient_dim();
  if (p.U.contains(vbar))
    throw std::invalid_argument("vbar must lie outside U");
  std::vector<std::uint16_t> labels(std::size_t(1) << n, std::uint16_t(0xffff));
  std::uint16_t next = 0;
  std::vector<word> w1 = p.W1.elements();
  std::vector<word> w2 = p.W2.elements();
  for (word v : p.U.elements()) {
    if (labels[v] == 0xffff) {
      for (word u : w1) labels[v ^ u] = next;
      ++next;
    }
    word y = vbar ^ v;
    if (labels[y] == 0xffff) {
      for (word u : w2) labels[y ^ u] = next;
      ++next;
    }
  }
  for (auto l : labels)
    if (l == 0xffff) throw std::logic_error("linear-affine expansion did not cover V");
  return Partition::from_labels(n, std::move(labels));
}

inline Partition expand(const LinearAffinePartition& p) {
  return expand_with_vbar(p, p.canonical_vbar());
}

inline Partition expand(const StructuredPartition& p) {
  return std::visit([](const auto& q) { return expand(q); }, p);
}

inline Partition map_partition(const Partition& a, const PermTable& rho) {
  return a.map(rho);
}

// True iff every non-identity permutation in the set carries A onto B.
inline bool maps_onto(const std::vector<PermTable>& perms, const Partition& a,
                      const Partition& b) {
  if (perms.empty()) throw std::invalid_argument("maps_onto: empty permutation set");
  PermTable id = identity_table(a.dim());
  for (const PermTable& rho : perms) {
    if (rho == id) continue;
    if (!(a.map(rho) == b)) return false;
  }
  return true;
}

// T' = { sigma_v : v in U }.
struct TranslationSubgroup {
  Subspace U;
  explicit TranslationSubgroup(Subspace u) : U(std::move(u)) {}
  std::uint64_t order() const { return U.size(); }
};

struct TranslationClassification {
  enum class Kind { Linear, LinearAffine, NotMapped } kind;
  // Linear: W set. LinearAffine: U, W1, W2 set.
  Subspace W;
  Subspace U;
  Subspace W1;
  Subspace W2;
};

namespace detail {

inline std::optional<Subspace> block_as_subspace(const Partition& a, word anchor,
                                                 int n) {
  std::vector<word> members = a.block_members(a.block_of(anchor));
  Subspace s(n);
  for (word x : members) s.insert(word(x ^ anchor));
  if (s.size() != members.size()) return std::nullopt;
  return s;
}

}  // namespace detail

// Constructive classification of a partition fixed by a translation
// subgroup of index 1 or 2: reconstructs the linear or linear-affine
// structure from the blocks through 0 and through a vector outside U.
inline TranslationClassification classify_under_translations(
    const TranslationSubgroup& t, const Partition& a) {
  int n = a.dim();
  if (t.U.ambient_dim() != n)
    throw std::invalid_argument("classify_under_translations: dimension mismatch");
  if (t.U.dim() != n && t.U.dim() != n - 1)
    throw std::invalid_argument("classify_under_translations: subgroup must have order 2^n or 2^(n-1)");

  TranslationClassification out{TranslationClassification::Kind::NotMapped, Subspace(n),
                                Subspace(n), Subspace(n), Subspace(n)};
  if (!a.fixed_by_translations(t.U)) return out;

  if (t.U.dim() == n) {
    // Fixed by the whole translation group: must be a coset partition.
    auto w = detail::block_as_subspace(a, 0, n);
    if (!w || !(expand(LinearPartition(*w)) == a)) return out;
    out.kind = TranslationClassification::Kind::Linear;
    out.W = *w;
    return out;
  }

  // T' of order 2^{n-1}: the block through 0 either stays inside U or
  // reaches across; both cases reconstruct the structure directly.
  std::vector<word> a0 = a.block_members(a.block_of(0));
  bool a0_in_u = true;
  for (word x : a0)
    if (!t.U.contains(x)) { a0_in_u = false; break; }

  if (!a0_in_u) {
    auto w = detail::block_as_subspace(a, 0, n);
    if (!w || !(expand(LinearPartition(*w)) == a)) return out;
    out.kind = TranslationClassification::Kind::Linear;
    out.W = *w;
    return out;
  }

  auto w1 = detail::block_as_subspace(a, 0, n);
  if (!w1) return out;
  word vbar = 0;
  for (word v = 1; v < (word(1) << n); ++v)
    if (!t.U.contains(v)) { vbar = v; break; }
  auto w2 = detail::block_as_subspace(a, vbar, n);
  if (!w2 || !t.U.contains(*w2)) return out;

  if (*w1 == *w2) {
    if (!(expand(LinearPartition(*w1)) == a)) return out;
    out.kind = TranslationClassification::Kind::Linear;
    out.W = *w1;
    return out;
  }
  LinearAffinePartition la(t.U, *w1, *w2);
  if (!(expand(la) == a)) return out;
  out.kind = TranslationClassification::Kind::LinearAffine;
  out.U = t.U;
  out.W1 = *w1;
  out.W2 = *w2;
  return out;
}

// Structural classification of an arbitrary partition with no subgroup
// given: linear, linear-affine over some hyperplane, or neither.
struct PartitionStructure {
  enum class Kind { Linear, LinearAffine, Other } kind;
  Subspace W;       // linear case
  Subspace U, W1, W2;  // linear-affine case
};

inline PartitionStructure classify_partition_structure(const Partition& a) {
  int n = a.dim();
  PartitionStructure out{PartitionStructure::Kind::Other, Subspace(n), Subspace(n),
                         Subspace(n), Subspace(n)};
  auto w1 = detail::block_as_subspace(a, 0, n);
  if (!w1) return out;
  if (expand(LinearPartition(*w1)) == a) {
    out.kind = PartitionStructure::Kind::Linear;
    out.W = *w1;
    return out;
  }
  // Union of the blocks that are W1-cosets must form a hyperplane.
  std::vector<word> w1_elems = w1->elements();
  Subspace u(n);
  std::vector<bool> in_u(a.points(), false);
  std::vector<std::vector<word>> blocks = a.blocks();
  for (const auto& blk : blocks) {
    if (blk.size() != w1_elems.size()) continue;
    bool coset = true;
    for (word x : blk)
      if (!w1->contains(word(x ^ blk[0]))) { coset = false; break; }
    if (coset)
      for (word x : blk) in_u[x] = true;
  }
  for (word x = 0; x < a.points(); ++x)
    if (in_u[x]) u.insert(x);
  if (u.dim() != n - 1 || u.size() * 2 != a.points()) return out;
  std::uint64_t covered = 0;
  for (word x = 0; x < a.points(); ++x) covered += in_u[x];
  if (covered != u.size()) return out;
  word vbar = 0;
  for (word v = 1; v < (word(1) << n); ++v)
    if (!u.contains(v)) { vbar = v; break; }
  auto w2 = detail::block_as_subspace(a, vbar, n);
  if (!w2 || !u.contains(*w2) || !u.contains(*w1)) return out;
  if (*w1 == *w2) return out;  // would have matched the linear test
  LinearAffinePartition la(u, *w1, *w2);
  if (!(expand(la) == a)) return out;
  out.kind = PartitionStructure::Kind::LinearAffine;
  out.U = u;
  out.W1 = *w1;
  out.W2 = *w2;
  return out;
}

// ---- derivative containment checks ----

// For gamma with 0.gamma = 0 mapping one structured partition onto another,
// the derivative images land in the advertised subspaces. Verifies the
// mapping precondition first, then checks every containment exhaustively.
// Set expressions follow the reading S = U cap (U'.gamma^{-1}).
inline bool lemmaeasy_check(const PermTable& gamma, const StructuredPartition& src,
                            const StructuredPartition& dst) {
  const std::size_t size = gamma.size();
  if (gamma[0] != 0)
    throw std::invalid_argument("lemmaeasy_check: gamma must fix 0");
  Partition a = expand(src), b = expand(dst);
  if (!(a.map(gamma) == b))
    throw std::invalid_argument("lemmaeasy_check: gamma does not map source onto target");

  auto deriv = [&](word u, word x) { return word(gamma[x ^ u] ^ gamma[x]); };

  auto domain = [&](const std::function<bool(word)>& pred) {
    std::vector<word> out;
    for (word x = 0; x < size; ++x)
      if (pred(x)) out.push_back(x);
    return out;
  };

  auto contained = [&](const std::vector<word>& us, const std::vector<word>& s,
                       const Subspace& target) {
    for (word u : us)
      for (word x : s)
        if (!target.contains(deriv(u, x))) return false;
    return true;
  };

  if (std::holds_alternative<LinearPartition>(src) &&
      std::holds_alternative<LinearPartition>(dst)) {
    const auto& w = std::get<LinearPartition>(src).U;
    const auto& wp = std::get<LinearPartition>(dst).U;
    std::vector<word> all = domain([](word) { return true; });
    return contained(w.elements(), all, wp);
  }

  if (std::holds_alternative<LinearPartition>(src)) {
    const auto& w = std::get<LinearPartition>(src).U;
    const auto& la = std::get<LinearAffinePartition>(dst);
    word vbar = la.canonical_vbar();
    std::vector<word> s = domain([&](word x) { return la.U.contains(gamma[x]); });
    std::vector<word> sp =
        domain([&](word x) { return la.U.contains(word(gamma[x] ^ vbar)); });
    return contained(w.elements(), s, la.W1) && contained(w.elements(), sp, la.W2);
  }

  if (std::holds_alternative<LinearPartition>(dst)) {
    const auto& la = std::get<LinearAffinePartition>(src);
    const auto& w = std::get<LinearPartition>(dst).U;
    word vbar = la.canonical_vbar();
    std::vector<word> s = domain([&](word x) { return la.U.contains(x); });
    std::vector<word> sp = domain([&](word x) { return la.U.contains(word(x ^ vbar)); });
    return contained(la.W1.elements(), s, w) && contained(la.W2.elements(), sp, w);
  }

  const auto& la = std::get<LinearAffinePartition>(src);
  const auto& lb = std::get<LinearAffinePartition>(dst);
  word vbar = la.canonical_vbar();
  word vbarp = lb.canonical_vbar();
  auto in_u = [&](word x) { return la.U.contains(x); };
  auto in_up_img = [&](word x) { return lb.U.contains(gamma[x]); };
  std::vector<word> s11 = domain([&](word x) { return in_u(x) && in_up_img(x); });
  std::vector<word> s21 =
      domain([&](word x) { return la.U.contains(word(x ^ vbar)) && in_up_img(x); });
  std::vector<word> s12 = domain(
      [&](word x) { return in_u(x) && lb.U.contains(word(gamma[x] ^ vbarp)); });
  std::vector<word> s22 = domain([&](word x) {
    return la.U.contains(word(x ^ vbar)) && lb.U.contains(word(gamma[x] ^ vbarp));
  });
  return contained(la.W1.elements(), s11, lb.W1) &&
         contained(la.W2.elements(), s21, lb.W1) &&
         contained(la.W1.elements(), s12, lb.W2) &&
         contained(la.W2.elements(), s22, lb.W2);
}

// ---- enumeration ----

inline void for_each_linear_partition(int n, const std::function<void(const LinearPartition&)>& fn) {
  if (n > kMaxPartitionDim) throw std::invalid_argument("n too large");
  for_each_subspace(n, std::nullopt,
                    [&](const Subspace& s) { fn(LinearPartition(s)); });
}

// All LA_U(W1|W2) with W1 != W2 over the given hyperplane (W1 = W2 would
// duplicate the linear family), as ordered pairs in enumeration order.
inline void for_each_linear_affine_partition(
    const Subspace& u, const std::function<void(const LinearAffinePartition&)>& fn) {
  if (u.dim() != u.ambient_dim() - 1)
    throw std::invalid_argument("linear-affine enumeration needs a hyperplane");
  std::vector<Subspace> subs = subspaces_of(u);
  for (const Subspace& w1 : subs)
    for (const Subspace& w2 : subs) {
      if (w1 == w2) continue;
      fn(LinearAffinePartition(u, w1, w2));
    }
}

}  // namespace tbtrap
