#pragma once

// The translation-based cipher model: rounds (parallel S-box, mixing layer,
// round-key XOR), key schedules with enumerable images, mixing-layer wall
// properties, and the 3-round (almost-)independence checks.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "tbtrap/f2lin.hpp"
#include "tbtrap/partition.hpp"
#include "tbtrap/sbox.hpp"

namespace tbtrap {

struct ParallelMap {
  int b = 0;
  int m = 0;
  std::vector<SBox> boxes;

  ParallelMap() = default;
  ParallelMap(int blocks, int width, std::vector<SBox> bx)
      : b(blocks), m(width), boxes(std::move(bx)) {
    if (int(boxes.size()) != blocks)
      throw std::invalid_argument("ParallelMap: need one S-box per block");
    for (const SBox& s : boxes)
      if (s.m != width) throw std::invalid_argument("ParallelMap: width mismatch");
  }

  static ParallelMap uniform(int blocks, const SBox& s) {
    return ParallelMap(blocks, s.m, std::vector<SBox>(std::size_t(blocks), s));
  }

  int dim() const { return b * m; }

  word apply(word v) const {
    word out = 0;
    word mask = dim_mask(m);
    for (int j = 0; j < b; ++j)
      out |= word(boxes[std::size_t(j)].table[(v >> (j * m)) & mask]) << (j * m);
    return out;
  }

  bool fixes_zero() const {
    for (const SBox& s : boxes)
      if (s.table[0] != 0) return false;
    return true;
  }

  bool is_bijective() const {
    for (const SBox& s : boxes)
      if (!s.is_bijective()) return false;
    return true;
  }

  PermTable table() const {
    PermTable t(std::size_t(1) << dim());
    for (word x = 0; x < t.size(); ++x) t[x] = std::uint16_t(apply(x));
    return t;
  }
};

// ---- mixing layer wall properties ----

struct MixingLayerVerdict {
  bool proper = false;
  bool strongly_proper = false;
  // First wall mapped to a wall (strongly-proper failure), if any.
  std::optional<Subspace> witness_wall;
};

inline MixingLayerVerdict check_mixing_layer(const LinearMap& lambda, int b, int m) {
  check_block_shape(lambda.dim(), b, m);
  if (!lambda.is_invertible())
    throw std::invalid_argument("mixing layer must be invertible");
  MixingLayerVerdict v;
  v.proper = true;
  v.strongly_proper = true;
  for (word mask = 1; mask + 1 < (word(1) << b); ++mask) {
    std::vector<int> idx;
    for (int j = 1; j <= b; ++j)
      if ((mask >> (j - 1)) & 1) idx.push_back(j);
    Subspace wall = wall_subspace(idx, b, m);
    Subspace image = lambda.image_of(wall);
    if (image == wall) v.proper = false;
    if (is_wall(image, b, m)) {
      v.strongly_proper = false;
      if (!v.witness_wall) v.witness_wall = wall;
    }
  }
  return v;
}

inline bool is_proper(const LinearMap& lambda, int b, int m) {
  return check_mixing_layer(lambda, b, m).proper;
}

inline bool is_strongly_proper(const LinearMap& lambda, int b, int m) {
  return check_mixing_layer(lambda, b, m).strongly_proper;
}

// ---- key schedules ----

// Explicit list of round-key tuples.
struct ExplicitSchedule {
  std::vector<std::vector<word>> tuples;
};

// All of V^3 at rounds i-1, i, i+1; other rounds pinned to fixed values.
struct ThreeIndependentSchedule {
  int round_i = 0;
  std::vector<word> fixed;  // length = rounds; window entries ignored
};

// U1 x U2 x U3 at rounds i-1, i, i+1; other rounds pinned.
struct AlmostIndependentSchedule {
  int round_i = 0;
  Subspace U1, U2, U3;
  std::vector<word> fixed;
};

// (k1,k2,k3,k4) -> (k1,k2,k3, tail(f1(k1), f2(k2), f3(k3), k4)) with the
// tail supplying rounds 4..l. Almost-independent at round 2 with respect to
// the kernels of the three functionals.
struct ExampleLinearSchedule {
  word f1 = 0, f2 = 0, f3 = 0;  // functionals as dot-product masks
  // tail[bits][k4] = round keys 4..l; bits = f1|f2<<1|f3<<2
  std::vector<std::vector<std::vector<word>>> tail;
};

constexpr std::uint64_t kScheduleImageCap = std::uint64_t(1) << 24;

class KeySchedule {
 public:
  using Variant = std::variant<ExplicitSchedule, ThreeIndependentSchedule,
                               AlmostIndependentSchedule, ExampleLinearSchedule>;

  KeySchedule(int rounds, int n, Variant v)
      : rounds_(rounds), n_(n), v_(std::move(v)) {
    validate();
  }

  int rounds() const { return rounds_; }
  int dim() const { return n_; }
  const Variant& variant() const { return v_; }

  template <typename T>
  const T* get_if() const { return std::get_if<T>(&v_); }

  std::uint64_t image_size() const {
    if (auto* e = std::get_if<ExplicitSchedule>(&v_)) return e->tuples.size();
    if (std::get_if<ThreeIndependentSchedule>(&v_))
      return std::uint64_t(1) << (3 * n_);
    if (auto* a = std::get_if<AlmostIndependentSchedule>(&v_))
      return a->U1.size() * a->U2.size() * a->U3.size();
    return std::uint64_t(1) << (4 * n_);  // master-key count, with duplicates
  }

  // Streams every tuple of the image (ExampleLinear streams per master key,
  // so duplicates may occur; property checks are set-based and unaffected).
  void for_each_tuple(const std::function<void(const std::vector<word>&)>& fn) const {
    if (image_size() > kScheduleImageCap)
      throw std::length_error("key-schedule image too large to enumerate");
    std::vector<word> t(std::size_t(rounds_), 0);
    if (auto* e = std::get_if<ExplicitSchedule>(&v_)) {
      for (const auto& tuple : e->tuples) fn(tuple);
      return;
    }
    if (auto* th = std::get_if<ThreeIndependentSchedule>(&v_)) {
      t = th->fixed;
      int i = th->round_i;
      word top = word(1) << n_;
      for (word a = 0; a < top; ++a)
        for (word bb = 0; bb < top; ++bb)
          for (word c = 0; c < top; ++c) {
            t[std::size_t(i - 2)] = a;
            t[std::size_t(i - 1)] = bb;
            t[std::size_t(i)] = c;
            fn(t);
          }
      return;
    }
    if (auto* al = std::get_if<AlmostIndependentSchedule>(&v_)) {
      t = al->fixed;
      int i = al->round_i;
      for (word a : al->U1.elements())
        for (word bb : al->U2.elements())
          for (word c : al->U3.elements()) {
            t[std::size_t(i - 2)] = a;
            t[std::size_t(i - 1)] = bb;
            t[std::size_t(i)] = c;
            fn(t);
          }
      return;
    }
    const auto& ex = std::get<ExampleLinearSchedule>(v_);
    word top = word(1) << n_;
    for (word k1 = 0; k1 < top; ++k1)
      for (word k2 = 0; k2 < top; ++k2)
        for (word k3 = 0; k3 < top; ++k3) {
          int bits = dot(k1, ex.f1) | (dot(k2, ex.f2) << 1) | (dot(k3, ex.f3) << 2);
          t[0] = k1;
          t[1] = k2;
          t[2] = k3;
          for (word k4 = 0; k4 < top; ++k4) {
            const auto& tl = ex.tail[std::size_t(bits)][k4];
            for (int h = 3; h < rounds_; ++h) t[std::size_t(h)] = tl[std::size_t(h - 3)];
            fn(t);
          }
        }
  }

  // Deterministic indexed access into the image (used for seeded sampling).
  std::vector<word> tuple_at(std::uint64_t idx) const {
    std::vector<word> t(std::size_t(rounds_), 0);
    if (auto* e = std::get_if<ExplicitSchedule>(&v_)) return e->tuples[idx];
    if (auto* th = std::get_if<ThreeIndependentSchedule>(&v_)) {
      t = th->fixed;
      int i = th->round_i;
      word mask = dim_mask(n_);
      t[std::size_t(i - 2)] = word(idx >> (2 * n_)) & mask;
      t[std::size_t(i - 1)] = word(idx >> n_) & mask;
      t[std::size_t(i)] = word(idx) & mask;
      return t;
    }
    if (auto* al = std::get_if<AlmostIndependentSchedule>(&v_)) {
      t = al->fixed;
      int i = al->round_i;
      std::uint64_t s2 = al->U2.size(), s3 = al->U3.size();
      // element lists are cheap at desk scale; rebuild per call
      t[std::size_t(i - 2)] = al->U1.elements()[std::size_t(idx / (s2 * s3))];
      t[std::size_t(i - 1)] = al->U2.elements()[std::size_t((idx / s3) % s2)];
      t[std::size_t(i)] = al->U3.elements()[std::size_t(idx % s3)];
      return t;
    }
    const auto& ex = std::get<ExampleLinearSchedule>(v_);
    word mask = dim_mask(n_);
    word k1 = word(idx >> (3 * n_)) & mask;
    word k2 = word(idx >> (2 * n_)) & mask;
    word k3 = word(idx >> n_) & mask;
    word k4 = word(idx) & mask;
    int bits = dot(k1, ex.f1) | (dot(k2, ex.f2) << 1) | (dot(k3, ex.f3) << 2);
    t[0] = k1;
    t[1] = k2;
    t[2] = k3;
    for (int h = 3; h < rounds_; ++h)
      t[std::size_t(h)] = ex.tail[std::size_t(bits)][k4][std::size_t(h - 3)];
    return t;
  }

  // Per-round representative and difference span of the projected key sets.
  // The product of the per-round sets contains the image; schedules whose
  // image is exactly a product (all variants here except ExampleLinear and
  // non-product Explicit lists) are represented exactly.
  struct RoundKeyStructure {
    word representative = 0;
    Subspace differences;
  };

  std::vector<RoundKeyStructure> round_structure() const {
    std::vector<RoundKeyStructure> out(std::size_t(rounds_),
                                       RoundKeyStructure{0, Subspace(n_)});
    if (auto* e = std::get_if<ExplicitSchedule>(&v_)) {
      for (int h = 0; h < rounds_; ++h) {
        out[std::size_t(h)].representative = e->tuples.at(0)[std::size_t(h)];
        for (const auto& tuple : e->tuples)
          out[std::size_t(h)].differences.insert(
              tuple[std::size_t(h)] ^ out[std::size_t(h)].representative);
      }
      return out;
    }
    if (auto* th = std::get_if<ThreeIndependentSchedule>(&v_)) {
      for (int h = 0; h < rounds_; ++h) out[std::size_t(h)].representative = th->fixed[std::size_t(h)];
      for (int h : {th->round_i - 2, th->round_i - 1, th->round_i}) {
        out[std::size_t(h)].representative = 0;
        out[std::size_t(h)].differences = Subspace::full(n_);
      }
      return out;
    }
    if (auto* al = std::get_if<AlmostIndependentSchedule>(&v_)) {
      for (int h = 0; h < rounds_; ++h) out[std::size_t(h)].representative = al->fixed[std::size_t(h)];
      int i = al->round_i;
      out[std::size_t(i - 2)] = {0, al->U1};
      out[std::size_t(i - 1)] = {0, al->U2};
      out[std::size_t(i)] = {0, al->U3};
      return out;
    }
    const auto& ex = std::get<ExampleLinearSchedule>(v_);
    for (int h : {0, 1, 2}) out[std::size_t(h)].differences = Subspace::full(n_);
    for (int h = 3; h < rounds_; ++h) {
      word rep = ex.tail[0][0][std::size_t(h - 3)];
      out[std::size_t(h)].representative = rep;
      for (const auto& per_bits : ex.tail)
        for (const auto& tl : per_bits)
          out[std::size_t(h)].differences.insert(tl[std::size_t(h - 3)] ^ rep);
    }
    return out;
  }

  // True when the enumerated image equals the product of the per-round
  // projections, which makes chain-style trapdoor checks exact.
  bool image_is_product() const {
    if (std::get_if<ThreeIndependentSchedule>(&v_)) return true;
    if (std::get_if<AlmostIndependentSchedule>(&v_)) return true;
    if (auto* e = std::get_if<ExplicitSchedule>(&v_)) {
      std::uint64_t product = 1;
      for (int h = 0; h < rounds_; ++h) {
        std::vector<word> vals;
        for (const auto& t : e->tuples) vals.push_back(t[std::size_t(h)]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        product *= vals.size();
        if (product > kScheduleImageCap) return false;
      }
      auto tuples = e->tuples;
      std::sort(tuples.begin(), tuples.end());
      tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
      return tuples.size() == product;
    }
    return false;  // ExampleLinear correlates the tail with rounds 1..3
  }

 private:
  void validate() const {
    if (rounds_ < 1) throw std::invalid_argument("key schedule: need at least one round");
    if (n_ < 1 || n_ > kMaxPartitionDim)
      throw std::invalid_argument("key schedule: dimension out of range");
    word mask = dim_mask(n_);
    if (auto* e = std::get_if<ExplicitSchedule>(&v_)) {
      if (e->tuples.empty()) throw std::invalid_argument("explicit schedule: empty image");
      for (const auto& t : e->tuples) {
        if (int(t.size()) != rounds_)
          throw std::invalid_argument("explicit schedule: tuple length mismatch");
        for (word k : t)
          if (k & ~mask) throw std::invalid_argument("explicit schedule: key out of range");
      }
      return;
    }
    if (auto* th = std::get_if<ThreeIndependentSchedule>(&v_)) {
      check_window(th->round_i);
      if (int(th->fixed.size()) != rounds_)
        throw std::invalid_argument("schedule: fixed key list length mismatch");
      return;
    }
    if (auto* al = std::get_if<AlmostIndependentSchedule>(&v_)) {
      check_window(al->round_i);
      if (int(al->fixed.size()) != rounds_)
        throw std::invalid_argument("schedule: fixed key list length mismatch");
      for (const Subspace* u : {&al->U1, &al->U2, &al->U3})
        if (u->ambient_dim() != n_ || u->dim() < n_ - 1)
          throw std::invalid_argument(
              "almost-independent schedule: subgroups must have order at least 2^(n-1)");
      return;
    }
    const auto& ex = std::get<ExampleLinearSchedule>(v_);
    if (rounds_ < 4)
      throw std::invalid_argument("example-linear schedule: needs at least 4 rounds");
    if (ex.tail.size() != 8)
      throw std::invalid_argument("example-linear schedule: tail needs 8 bit patterns");
    for (const auto& per_bits : ex.tail) {
      if (per_bits.size() != (std::size_t(1) << n_))
        throw std::invalid_argument("example-linear schedule: tail needs 2^n rows");
      for (const auto& tl : per_bits)
        if (int(tl.size()) != rounds_ - 3)
          throw std::invalid_argument("example-linear schedule: tail row length mismatch");
    }
    if (std::uint64_t(4) * n_ > 24)
      throw std::invalid_argument("example-linear schedule: master-key space too large");
  }

  void check_window(int i) const {
    if (i < 2 || i > rounds_ - 1)
      throw std::invalid_argument("key schedule: window round out of range");
  }

  int rounds_;
  int n_;
  Variant v_;
};

// ---- 3-round independence checks ----

namespace detail {

class DynamicBitset {
 public:
  explicit DynamicBitset(std::uint64_t bits)
      : words_((bits + 63) / 64, 0), count_(0) {}
  bool set(std::uint64_t i) {
    std::uint64_t& w = words_[i >> 6];
    std::uint64_t bit = std::uint64_t(1) << (i & 63);
    if (w & bit) return false;
    w |= bit;
    ++count_;
    return true;
  }
  bool test(std::uint64_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1;
  }
  std::uint64_t count() const { return count_; }

 private:
  std::vector<std::uint64_t> words_;
  std::uint64_t count_;
};

// Groups the schedule image by the fixed (non-window) coordinates and fills
// one window bitset per group.
inline std::map<std::vector<word>, DynamicBitset> group_windows(const KeySchedule& ks,
                                                                int i) {
  int n = ks.dim();
  int l = ks.rounds();
  if (i < 2 || i > l - 1) throw std::invalid_argument("window round out of range");
  if (3 * n > 24) throw std::length_error("window space too large to bitset");
  std::map<std::vector<word>, DynamicBitset> groups;
  std::vector<word> fixed_part;
  ks.for_each_tuple([&](const std::vector<word>& t) {
    fixed_part.clear();
    for (int h = 0; h < l; ++h)
      if (h < i - 2 || h > i) fixed_part.push_back(t[std::size_t(h)]);
    auto it = groups.find(fixed_part);
    if (it == groups.end())
      it = groups.emplace(fixed_part, DynamicBitset(std::uint64_t(1) << (3 * n))).first;
    std::uint64_t idx = (std::uint64_t(t[std::size_t(i - 2)]) << (2 * n)) |
                        (std::uint64_t(t[std::size_t(i - 1)]) << n) | t[std::size_t(i)];
    it->second.set(idx);
  });
  return groups;
}

}  // namespace detail

// Some fixed completion admits every (k_{i-1}, k_i, k_{i+1}) in V^3.
inline bool is_3round_independent(const KeySchedule& ks, int i) {
  int n = ks.dim();
  if (i < 2 || i > ks.rounds() - 1)
    throw std::invalid_argument("is_3round_independent: i out of range");
  if (ks.image_size() < (std::uint64_t(1) << (3 * n))) return false;
  auto groups = detail::group_windows(ks, i);
  for (const auto& [fixed, bits] : groups)
    if (bits.count() == (std::uint64_t(1) << (3 * n))) return true;
  return false;
}

// Some fixed completion admits every triple from U1 x U2 x U3.
inline bool is_3round_almost_independent(const KeySchedule& ks, int i,
                                         const TranslationSubgroup& t1,
                                         const TranslationSubgroup& t2,
                                         const TranslationSubgroup& t3) {
  int n = ks.dim();
  if (i < 2 || i > ks.rounds() - 1)
    throw std::invalid_argument("is_3round_almost_independent: i out of range");
  for (const TranslationSubgroup* t : {&t1, &t2, &t3})
    if (t->U.ambient_dim() != n || t->U.dim() < n - 1)
      throw std::invalid_argument(
          "is_3round_almost_independent: subgroups must have order at least 2^(n-1)");
  auto groups = detail::group_windows(ks, i);
  std::vector<word> u1 = t1.U.elements(), u2 = t2.U.elements(), u3 = t3.U.elements();
  for (const auto& [fixed, bits] : groups) {
    if (bits.count() < u1.size() * u2.size() * u3.size()) continue;
    bool all = true;
    for (word a : u1) {
      for (word bb : u2) {
        for (word c : u3) {
          std::uint64_t idx =
              (std::uint64_t(a) << (2 * n)) | (std::uint64_t(bb) << n) | c;
          if (!bits.test(idx)) { all = false; break; }
        }
        if (!all) break;
      }
      if (!all) break;
    }
    if (all) return true;
  }
  return false;
}

// ---- the cipher ----

struct Round {
  ParallelMap gamma;
  LinearMap lambda;
};

struct EncryptionFunction;

class TbCipher {
 public:
  TbCipher(int n, int b, int m, std::vector<Round> rounds, KeySchedule schedule)
      : n_(n), b_(b), m_(m), rounds_(std::move(rounds)), schedule_(std::move(schedule)) {
    check_block_shape(n, b, m);
    if (n > kMaxPartitionDim)
      throw std::invalid_argument("TbCipher: dimension out of range");
    if (rounds_.empty()) throw std::invalid_argument("TbCipher: need rounds");
    if (schedule_.rounds() != int(rounds_.size()) || schedule_.dim() != n)
      throw std::invalid_argument("TbCipher: schedule shape mismatch");
    key_offset_.assign(rounds_.size(), 0);
    for (std::size_t h = 0; h < rounds_.size(); ++h) {
      Round& r = rounds_[h];
      if (r.gamma.dim() != n || r.lambda.dim() != n)
        throw std::invalid_argument("TbCipher: round dimension mismatch");
      if (!r.gamma.is_bijective())
        throw std::invalid_argument("TbCipher: parallel S-box must be bijective");
      if (!r.lambda.is_invertible())
        throw std::invalid_argument("TbCipher: mixing layer must be invertible");
      // Fold nonzero S-box offsets into the key addition that follows.
      word offset = 0;
      for (int j = 0; j < b; ++j) {
        SBox& s = r.gamma.boxes[std::size_t(j)];
        if (s.table[0] != 0) {
          auto [g, c] = normalize_zero(s);
          s = g;
          offset |= word(c) << (j * m);
        }
      }
      key_offset_[h] = r.lambda.apply(offset);
    }
  }

  int dim() const { return n_; }
  int blocks() const { return b_; }
  int block_width() const { return m_; }
  int round_count() const { return int(rounds_.size()); }
  const std::vector<Round>& rounds() const { return rounds_; }
  const KeySchedule& schedule() const { return schedule_; }
  const std::vector<word>& key_offsets() const { return key_offset_; }

  word encrypt(const std::vector<word>& keys, word x) const {
    if (keys.size() != rounds_.size())
      throw std::invalid_argument("encrypt: key tuple length mismatch");
    word v = x;
    for (std::size_t h = 0; h < rounds_.size(); ++h) {
      v = rounds_[h].gamma.apply(v);
      v = rounds_[h].lambda.apply(v);
      v ^= keys[h] ^ key_offset_[h];
    }
    return v;
  }

  PermTable materialize(const std::vector<word>& keys) const {
    PermTable t(std::size_t(1) << n_);
    for (word x = 0; x < t.size(); ++x) t[x] = std::uint16_t(encrypt(keys, x));
    return t;
  }

  // Composition gamma_h lambda_h of a round, without the key addition.
  PermTable round_table(int h) const {
    PermTable t(std::size_t(1) << n_);
    for (word x = 0; x < t.size(); ++x)
      t[x] = std::uint16_t(rounds_[std::size_t(h)].lambda.apply(
          rounds_[std::size_t(h)].gamma.apply(x)));
    return t;
  }

  // Effective per-round key structure including folded offsets.
  std::vector<KeySchedule::RoundKeyStructure> effective_round_structure() const {
    auto rs = schedule_.round_structure();
    for (std::size_t h = 0; h < rs.size(); ++h)
      rs[h].representative ^= key_offset_[h];
    return rs;
  }

 private:
  int n_, b_, m_;
  std::vector<Round> rounds_;
  KeySchedule schedule_;
  std::vector<word> key_offset_;
};

struct EncryptionFunction {
  const TbCipher* cipher;
  std::vector<word> keys;

  word apply(word x) const { return cipher->encrypt(keys, x); }
  PermTable table() const { return cipher->materialize(keys); }
};

// Deterministic seeded sample of key tuples from the schedule image.
inline std::vector<std::vector<word>> sample_key_tuples(const KeySchedule& ks, int count,
                                                        std::uint64_t seed) {
  std::uint64_t size = ks.image_size();
  std::vector<std::vector<word>> out;
  if (size <= std::uint64_t(count)) {
    if (auto* e = ks.get_if<ExplicitSchedule>()) {
      out = e->tuples;
    } else {
      for (std::uint64_t i = 0; i < size; ++i) out.push_back(ks.tuple_at(i));
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) out.push_back(ks.tuple_at(rng() % size));
  return out;
}

// ---- theorem hypothesis report ----

struct SBoxHypotheses {
  int delta = 0;
  int r_min = 0;  // smallest r with delta <= 2^r
  int nhat = 0;
  int nonlin = 0;
  bool anti_invariant_rmin = false;        // strongly r_min-anti-invariant
  bool anti_invariant_rmin_minus_1 = false;
};

struct RoundHypotheses {
  std::vector<SBoxHypotheses> boxes;
  bool lambda_proper = false;
  bool lambda_strongly_proper = false;
  // Route 1: every box 2^r-uniform with r < m and strongly (r-1)-anti-invariant.
  bool boxes_independent_route = false;
  // Route 1': every box 2^r-uniform with r < m-1 and strongly r-anti-invariant.
  bool boxes_strict_route = false;
  // Route 2: every box 4-uniform with nhat = 0 (needs m >= 4).
  bool boxes_nhat_route = false;
};

struct TheoremHypothesesReport {
  std::vector<RoundHypotheses> per_round;
  std::vector<int> independent_rounds;          // i with full V^3 window
  std::vector<int> almost_independent_rounds;   // i verified against declared windows
  std::optional<int> declared_window_round;
  std::vector<Subspace> declared_window_subspaces;
  bool j_condition = false;      // J_{U2 lambda_i^-1} cap J_{U1} empty
  std::vector<int> j_u1, j_u2_pullback;
  bool th_main_applies = false;  // independent-key criterion, some h < l
  std::optional<int> th_main_round;
  bool th_gam_applies = false;
  std::optional<int> th_gam_round;
  bool th_mainme_applies = false;
  std::optional<int> th_mainme_round;
  bool cor_nonlimit_applies = false;
  std::optional<int> cor_nonlimit_round;
  const char* verdict = "none";
};

namespace detail {

inline int ceil_log2(int v) {
  int r = 0;
  while ((1 << r) < v) ++r;
  return r;
}

}  // namespace detail

inline TheoremHypothesesReport theorem_hypotheses_report(const TbCipher& c) {
  TheoremHypothesesReport rep;
  int m = c.block_width();
  int l = c.round_count();

  for (int h = 0; h < l; ++h) {
    const Round& r = c.rounds()[std::size_t(h)];
    RoundHypotheses rh;
    auto verdict = check_mixing_layer(r.lambda, c.blocks(), m);
    rh.lambda_proper = verdict.proper;
    rh.lambda_strongly_proper = verdict.strongly_proper;
    rh.boxes_independent_route = true;
    rh.boxes_strict_route = true;
    rh.boxes_nhat_route = m >= 4;
    for (const SBox& s : r.gamma.boxes) {
      SBoxHypotheses sh;
      sh.delta = differential_uniformity(s);
      sh.r_min = detail::ceil_log2(sh.delta);
      sh.nhat = n_hat(s);
      sh.nonlin = nonlinearity(s);
      if (sh.r_min >= 1 && sh.r_min < m)
        sh.anti_invariant_rmin = is_strongly_anti_invariant(s, sh.r_min).holds;
      if (sh.r_min - 1 >= 1 && sh.r_min - 1 < m)
        sh.anti_invariant_rmin_minus_1 =
            is_strongly_anti_invariant(s, sh.r_min - 1).holds;
      rh.boxes_independent_route &=
          sh.r_min < m && (sh.r_min == 1 || sh.anti_invariant_rmin_minus_1);
      rh.boxes_strict_route &= sh.r_min < m - 1 && sh.anti_invariant_rmin;
      rh.boxes_nhat_route &= sh.delta <= 4 && sh.nhat == 0;
      rh.boxes.push_back(sh);
    }
    rep.per_round.push_back(rh);
  }

  // th:main needs some h < l with lambda_h strongly proper and rounds h, h+1
  // boxes on the independent route (keys quantified independently).
  for (int h = 0; h + 1 < l; ++h) {
    if (rep.per_round[std::size_t(h)].lambda_strongly_proper &&
        rep.per_round[std::size_t(h)].boxes_independent_route &&
        rep.per_round[std::size_t(h + 1)].boxes_independent_route) {
      rep.th_main_applies = true;
      rep.th_main_round = h + 1;  // 1-based
      break;
    }
  }

  const KeySchedule& ks = c.schedule();
  bool enumerable = ks.image_size() <= kScheduleImageCap && 3 * c.dim() <= 24;
  if (enumerable) {
    for (int i = 2; i <= l - 1; ++i)
      if (is_3round_independent(ks, i)) rep.independent_rounds.push_back(i);
  }

  if (auto* al = ks.get_if<AlmostIndependentSchedule>()) {
    rep.declared_window_round = al->round_i;
    rep.declared_window_subspaces = {al->U1, al->U2, al->U3};
  } else if (auto* ex = ks.get_if<ExampleLinearSchedule>()) {
    rep.declared_window_round = 2;
    auto kernel = [&](word f) {
      Subspace u(c.dim());
      for (word v = 1; v < (word(1) << c.dim()); ++v)
        if (dot(v, f) == 0) u.insert(v);
      return u;
    };
    rep.declared_window_subspaces = {kernel(ex->f1), kernel(ex->f2), kernel(ex->f3)};
  } else if (auto* th = ks.get_if<ThreeIndependentSchedule>()) {
    rep.declared_window_round = th->round_i;
    Subspace full = Subspace::full(c.dim());
    rep.declared_window_subspaces = {full, full, full};
  }

  if (rep.declared_window_round && enumerable) {
    int i = *rep.declared_window_round;
    TranslationSubgroup t1(rep.declared_window_subspaces[0]);
    TranslationSubgroup t2(rep.declared_window_subspaces[1]);
    TranslationSubgroup t3(rep.declared_window_subspaces[2]);
    if (is_3round_almost_independent(ks, i, t1, t2, t3))
      rep.almost_independent_rounds.push_back(i);
  }

  // th:gam: 3-round independent at i, boxes of rounds i, i+1 on the
  // independent route, lambda_i strongly proper.
  for (int i : rep.independent_rounds) {
    if (rep.per_round[std::size_t(i - 1)].lambda_strongly_proper &&
        rep.per_round[std::size_t(i - 1)].boxes_independent_route &&
        rep.per_round[std::size_t(i)].boxes_independent_route) {
      rep.th_gam_applies = true;
      rep.th_gam_round = i;
      break;
    }
  }

  // th:mainme / cor:nonlimit over the declared window.
  for (int i : rep.almost_independent_rounds) {
    const RoundHypotheses& ri = rep.per_round[std::size_t(i - 1)];
    const RoundHypotheses& ri1 = rep.per_round[std::size_t(i)];
    bool boxes_ok = (ri.boxes_strict_route && ri1.boxes_strict_route) ||
                    (ri.boxes_nhat_route && ri1.boxes_nhat_route);
    if (!boxes_ok || !ri.lambda_strongly_proper) continue;
    const Subspace& u1 = rep.declared_window_subspaces[0];
    const Subspace& u2 = rep.declared_window_subspaces[1];
    const Subspace& u3 = rep.declared_window_subspaces[2];
    bool some_full = u1.is_full() || u2.is_full() || u3.is_full();
    if (some_full) {
      rep.cor_nonlimit_applies = true;
      rep.cor_nonlimit_round = i;
    }
    if (u1.dim() == c.dim() - 1 && u2.dim() == c.dim() - 1) {
      const LinearMap& li = c.rounds()[std::size_t(i - 1)].lambda;
      Subspace u2_pullback = li.inverse().image_of(u2);
      rep.j_u1 = j_set_of(u1, c.blocks(), c.block_width());
      rep.j_u2_pullback = j_set_of(u2_pullback, c.blocks(), c.block_width());
      bool disjoint = true;
      for (int a : rep.j_u1)
        for (int bb : rep.j_u2_pullback)
          if (a == bb) disjoint = false;
      rep.j_condition = disjoint;
      if (disjoint && u3.dim() >= c.dim() - 1) {
        rep.th_mainme_applies = true;
        rep.th_mainme_round = i;
      }
    }
    if (rep.th_mainme_applies || rep.cor_nonlimit_applies) break;
  }

  if (rep.th_mainme_applies)
    rep.verdict = "th-mainme";
  else if (rep.cor_nonlimit_applies)
    rep.verdict = "cor-nonlimit";
  else if (rep.th_gam_applies)
    rep.verdict = "th-gam";
  else if (rep.th_main_applies)
    rep.verdict = "th-main";
  return rep;
}

}  // namespace tbtrap
