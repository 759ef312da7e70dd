#pragma once

// Partition-trapdoor search over linear and linear-affine candidate
// families, brute-force oracle at tiny dimensions, lemma-family scans for
// parallel maps, and end-to-end theorem validation (search + primitivity).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tbtrap/cipher.hpp"
#include "tbtrap/f2lin.hpp"
#include "tbtrap/parallel.hpp"
#include "tbtrap/partition.hpp"
#include "tbtrap/permgroup.hpp"

namespace tbtrap {

struct ChainEntry {
  Partition partition;
  PartitionStructure structure;
};

struct TrapdoorWitness {
  Partition A;
  Partition B;
  std::vector<ChainEntry> chain;  // states before round 1 and after each round
  bool reverified_all_keys = false;
};

struct SearchScope {
  enum class Family { LinearOnly, LinearAndAffine, ExhaustiveTiny };
  Family family = Family::LinearAndAffine;
  // Hyperplanes for the linear-affine scan; when empty they are derived from
  // the schedule's declared window subgroups plus their images under the
  // round mixing layers (forward and inverse).
  std::vector<Subspace> u_list;
  // Restrict the key set to a deterministic sample (count, seed); default is
  // the full enumerable image.
  std::optional<std::pair<int, std::uint64_t>> key_sample;
  // Worker count for the candidate profile precomputation; the result is
  // worker-count independent.
  int threads = 1;
};

namespace detail {

// Per-round key material the chain check runs against: a representative
// (with folded S-box offsets) and the span of the projected differences.
struct RoundKeys {
  word representative = 0;
  Subspace differences;
};

inline std::vector<RoundKeys> chain_key_structure(const TbCipher& c,
                                                  const SearchScope& scope) {
  std::vector<RoundKeys> out;
  if (scope.key_sample) {
    auto sample = sample_key_tuples(c.schedule(), scope.key_sample->first,
                                    scope.key_sample->second);
    out.assign(std::size_t(c.round_count()), RoundKeys{0, Subspace(c.dim())});
    for (int h = 0; h < c.round_count(); ++h) {
      out[std::size_t(h)].representative =
          sample.at(0)[std::size_t(h)] ^ c.key_offsets()[std::size_t(h)];
      for (const auto& t : sample)
        out[std::size_t(h)].differences.insert(t[std::size_t(h)] ^ sample[0][std::size_t(h)]);
    }
    return out;
  }
  for (const auto& rs : c.effective_round_structure())
    out.push_back(RoundKeys{rs.representative, rs.differences});
  return out;
}

// Runs the candidate through the cipher skeleton, requiring the partition
// to be fixed by each round's key-difference translations. Exact for
// product-structured key images; witnesses are re-verified regardless.
inline std::optional<std::pair<Partition, std::vector<ChainEntry>>> chain_run(
    const Partition& a, const std::vector<PermTable>& round_tables,
    const std::vector<RoundKeys>& keys, bool classify) {
  std::vector<ChainEntry> chain;
  Partition p = a;
  if (classify) chain.push_back({p, classify_partition_structure(p)});
  for (std::size_t h = 0; h < round_tables.size(); ++h) {
    p = p.map(round_tables[h]);
    if (!p.fixed_by_translations(keys[h].differences)) return std::nullopt;
    if (keys[h].representative) p = p.translate(keys[h].representative);
    if (classify) chain.push_back({p, classify_partition_structure(p)});
  }
  return std::make_pair(p, std::move(chain));
}

// ---- linear-affine candidate scan with per-half coset profiles ----
//
// A candidate LA_U(W1|W2) passes the first constrained round only if its
// image there is fixed by the difference translations, i.e. is linear or
// linear-affine over the difference hyperplane (order-2^{n-1} case). Both
// shapes force every image block of each half to be a coset, with at most
// one direction inside the hyperplane, one outside, and straddling blocks
// only in the all-one-direction (linear) case. That test factors over the
// two halves, collapsing the quadratic pair scan.

struct HalfProfile {
  bool cosets = false;     // every image block is a coset
  bool uniform = false;    // all image blocks share one direction
  Subspace dir_any;        // that direction when uniform
  bool split_ok = false;   // no straddling block w.r.t. the hyperplane
  std::optional<Subspace> dir_in, dir_out;  // per-side common directions
};

// side = 0: blocks {W+v : v in U}; side = 1: blocks {W+vbar+v : v in U}.
inline HalfProfile half_profile(const Subspace& u, word vbar, const Subspace& w,
                                int side, const PermTable& rho,
                                const std::optional<Subspace>& hyperplane) {
  const int n = u.ambient_dim();
  HalfProfile prof;
  prof.cosets = true;
  prof.split_ok = true;
  bool any_block = false;
  std::vector<word> w_elems = w.elements();
  std::vector<bool> seen(std::size_t(1) << n, false);
  std::vector<word> image(w_elems.size());

  for (word v : u.elements()) {
    word rep = side ? (v ^ vbar) : v;
    if (seen[rep]) continue;
    for (std::size_t i = 0; i < w_elems.size(); ++i) {
      word x = rep ^ w_elems[i];
      seen[x] = true;
      image[i] = rho[x];
    }
    // coset test: differences from the first element span at most dim(W)
    Subspace dir(n);
    for (std::size_t i = 1; i < image.size(); ++i) {
      dir.insert(image[i] ^ image[0]);
      if (dir.dim() > w.dim()) {
        prof.cosets = false;
        return prof;
      }
    }
    if (!any_block) {
      prof.dir_any = dir;
      prof.uniform = true;
      any_block = true;
    } else if (prof.uniform && !(prof.dir_any == dir)) {
      prof.uniform = false;
    }
    if (hyperplane && prof.split_ok) {
      int inside = 0, outside = 0;
      for (word y : image)
        (hyperplane->contains(y) ? inside : outside) += 1;
      if (inside && outside) {
        prof.split_ok = false;
      } else if (inside) {
        if (!prof.dir_in)
          prof.dir_in = dir;
        else if (!(*prof.dir_in == dir))
          prof.split_ok = false;
      } else {
        if (!prof.dir_out)
          prof.dir_out = dir;
        else if (!(*prof.dir_out == dir))
          prof.split_ok = false;
      }
    }
  }
  return prof;
}

inline bool sides_consistent(const std::optional<Subspace>& a,
                             const std::optional<Subspace>& b) {
  return !(a && b && !(*a == *b));
}

// Necessary condition for the joint partition image to be fixed by the
// translation subgroup of the hyperplane (or by all of T(V) when absent).
inline bool profiles_may_pass(const HalfProfile& p, const HalfProfile& q,
                              bool have_hyperplane) {
  if (!p.cosets || !q.cosets) return false;
  bool linear_shape = p.uniform && q.uniform && p.dir_any == q.dir_any;
  if (!have_hyperplane) return linear_shape;
  bool split_shape = p.split_ok && q.split_ok &&
                     sides_consistent(p.dir_in, q.dir_in) &&
                     sides_consistent(p.dir_out, q.dir_out);
  return linear_shape || split_shape;
}

}  // namespace detail

// Verifies a candidate pair against every enumerated key tuple.
inline bool verify_witness_all_keys(const TbCipher& c, const Partition& a,
                                    const Partition& b) {
  std::vector<PermTable> tables;
  for (int h = 0; h < c.round_count(); ++h) tables.push_back(c.round_table(h));
  const auto& offsets = c.key_offsets();
  const auto& la = a.labels();
  const auto& lb = b.labels();
  bool ok = true;
  std::vector<int> to_b(a.points());
  c.schedule().for_each_tuple([&](const std::vector<word>& keys) {
    if (!ok) return;
    std::fill(to_b.begin(), to_b.end(), -1);
    for (word x = 0; x < a.points(); ++x) {
      word y = x;
      for (std::size_t h = 0; h < tables.size(); ++h)
        y = tables[h][y] ^ keys[h] ^ offsets[h];
      int& slot = to_b[la[x]];
      if (slot < 0)
        slot = lb[y];
      else if (slot != lb[y]) {
        ok = false;
        return;
      }
    }
  });
  return ok;
}

inline std::vector<Subspace> default_u_list(const TbCipher& c) {
  std::vector<Subspace> out;
  auto add = [&](const Subspace& u) {
    if (u.dim() != c.dim() - 1) return;
    for (const Subspace& v : out)
      if (v == u) return;
    out.push_back(u);
  };
  const KeySchedule& ks = c.schedule();
  std::vector<Subspace> declared;
  if (auto* al = ks.get_if<AlmostIndependentSchedule>()) {
    declared = {al->U1, al->U2, al->U3};
  } else if (auto* ex = ks.get_if<ExampleLinearSchedule>()) {
    for (word f : {ex->f1, ex->f2, ex->f3}) {
      Subspace u(c.dim());
      for (word v = 1; v < (word(1) << c.dim()); ++v)
        if (dot(v, f) == 0) u.insert(v);
      declared.push_back(u);
    }
  }
  for (const Subspace& u : declared) add(u);
  for (const Subspace& u : declared) {
    for (int h = 0; h < c.round_count(); ++h) {
      const LinearMap& lm = c.rounds()[std::size_t(h)].lambda;
      add(lm.image_of(u));
      add(lm.inverse().image_of(u));
    }
  }
  return out;
}

// Enumerates all set partitions of {0..points-1} via restricted growth
// strings; the tiny-oracle family and the full-enumeration acceptance runs.
inline void for_each_set_partition(
    int points, const std::function<void(const std::vector<std::uint16_t>&)>& fn) {
  std::vector<std::uint16_t> rgs(std::size_t(points), 0);
  std::function<void(int, int)> rec = [&](int i, int maxv) {
    if (i == points) {
      fn(rgs);
      return;
    }
    for (int v = 0; v <= maxv + 1 && v < points; ++v) {
      rgs[std::size_t(i)] = std::uint16_t(v);
      rec(i + 1, std::max(maxv, v));
    }
  };
  rec(1, 0);
}

inline std::optional<TrapdoorWitness> search_trapdoor(const TbCipher& c,
                                                      const SearchScope& scope) {
  const int n = c.dim();
  std::vector<PermTable> round_tables;
  for (int h = 0; h < c.round_count(); ++h) round_tables.push_back(c.round_table(h));
  std::vector<detail::RoundKeys> keys = detail::chain_key_structure(c, scope);

  auto finish = [&](const Partition& a) -> std::optional<TrapdoorWitness> {
    if (!detail::chain_run(a, round_tables, keys, /*classify=*/false)) return std::nullopt;
    auto res = detail::chain_run(a, round_tables, keys, /*classify=*/true);
    TrapdoorWitness w;
    w.A = a;
    w.B = res->first;
    w.chain = std::move(res->second);
    if (!scope.key_sample && c.schedule().image_size() <= kScheduleImageCap) {
      w.reverified_all_keys = verify_witness_all_keys(c, w.A, w.B);
      if (!w.reverified_all_keys)
        throw std::logic_error("chain survivor failed re-verification against the key image");
    } else {
      w.reverified_all_keys = false;
    }
    return w;
  };

  if (scope.family == SearchScope::Family::ExhaustiveTiny) {
    if (n > 3) throw std::invalid_argument("exhaustive scope only for 2^n <= 8");
    if (c.schedule().image_size() > (std::uint64_t(1) << 16))
      throw std::invalid_argument("exhaustive scope needs a small key image");
    std::vector<std::vector<word>> tuples;
    c.schedule().for_each_tuple(
        [&](const std::vector<word>& t) { tuples.push_back(t); });
    const auto& offsets = c.key_offsets();
    std::optional<TrapdoorWitness> found;
    for_each_set_partition(1 << n, [&](const std::vector<std::uint16_t>& rgs) {
      if (found) return;
      Partition a = Partition::from_labels(n, rgs);
      if (a.is_trivial()) return;
      std::optional<Partition> b;
      for (const auto& t : tuples) {
        PermTable tau(a.points());
        for (word x = 0; x < a.points(); ++x) {
          word y = x;
          for (std::size_t h = 0; h < round_tables.size(); ++h)
            y = round_tables[h][y] ^ t[h] ^ offsets[h];
          tau[x] = std::uint16_t(y);
        }
        Partition img = a.map(tau);
        if (!b)
          b = img;
        else if (!(*b == img))
          return;
      }
      TrapdoorWitness w;
      w.A = a;
      w.B = *b;
      w.chain = {};
      w.reverified_all_keys = true;
      found = std::move(w);
    });
    return found;
  }

  // Linear candidates, dimension-major enumeration order.
  std::optional<TrapdoorWitness> found;
  for (int d = 1; d < n && !found; ++d) {
    detail::for_each_subspace_of_dim(n, d, [&](const Subspace& w) {
      if (found) return;
      found = finish(expand(LinearPartition(w)));
    });
  }
  if (found || scope.family == SearchScope::Family::LinearOnly) return found;

  // Linear-affine candidates over each hyperplane in the scan list.
  std::vector<Subspace> us = scope.u_list.empty() ? default_u_list(c) : scope.u_list;
  for (const Subspace& u : us) {
    if (u.dim() != n - 1)
      throw std::invalid_argument("linear-affine scan needs hyperplanes");

    // First constrained round and the prefix permutation reaching it.
    int hstar = -1;
    for (std::size_t h = 0; h < keys.size(); ++h)
      if (keys[h].differences.dim() > 0) { hstar = int(h); break; }

    std::vector<Subspace> subs = subspaces_of(u);
    word vbar = 0;
    for (word v = 1; v < (word(1) << n); ++v)
      if (!u.contains(v)) { vbar = v; break; }

    if (hstar < 0) {
      // No key constraints at all: the first strict pair survives outright.
      for (const Subspace& w1 : subs) {
        for (const Subspace& w2 : subs) {
          if (w1 == w2) continue;
          if ((found = finish(expand(LinearAffinePartition(u, w1, w2))))) return found;
        }
      }
      continue;
    }

    PermTable prefix = identity_table(n);
    for (int h = 0; h <= hstar; ++h) {
      prefix = compose_tables(prefix, round_tables[std::size_t(h)]);
      if (h < hstar && keys[std::size_t(h)].representative) {
        word r = keys[std::size_t(h)].representative;
        for (auto& y : prefix) y = std::uint16_t(y ^ r);
      }
    }
    const Subspace& diff = keys[std::size_t(hstar)].differences;
    std::optional<Subspace> hyper;
    if (diff.dim() == n - 1) hyper = diff;
    bool fast = diff.dim() >= n - 1;

    std::vector<detail::HalfProfile> prof1(subs.size()), prof2(subs.size());
    if (fast) {
      parallel_for(subs.size(), scope.threads, [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t i = lo; i < hi; ++i) {
          prof1[i] = detail::half_profile(u, vbar, subs[i], 0, prefix, hyper);
          prof2[i] = detail::half_profile(u, vbar, subs[i], 1, prefix, hyper);
        }
      });
    }
    for (std::size_t i1 = 0; i1 < subs.size() && !found; ++i1) {
      const Subspace& w1 = subs[i1];
      if (fast && !prof1[i1].cosets) continue;
      for (std::size_t i2 = 0; i2 < subs.size() && !found; ++i2) {
        if (i1 == i2) continue;
        if (fast && !detail::profiles_may_pass(prof1[i1], prof2[i2], hyper.has_value()))
          continue;
        found = finish(expand(LinearAffinePartition(u, w1, subs[i2])));
      }
    }
    if (found) return found;
  }
  return found;
}

// Key-free chain A_{i+1} = A_i (gamma_i lambda_i), with classifications.
inline std::vector<ChainEntry> propagate(const TbCipher& c, const Partition& a1) {
  std::vector<ChainEntry> chain;
  Partition p = a1;
  chain.push_back({p, classify_partition_structure(p)});
  for (int h = 0; h < c.round_count(); ++h) {
    p = p.map(c.round_table(h));
    chain.push_back({p, classify_partition_structure(p)});
  }
  return chain;
}

inline std::vector<ChainEntry> propagate(const TbCipher& c,
                                         const StructuredPartition& a1) {
  return propagate(c, expand(a1));
}

// ---- trapdoored control construction ----

// Bijection of (F2)^m carrying cosets of from_m onto cosets of to_m (equal
// dimensions), fixing 0: random pairing of nonzero cosets with random
// in-coset bijections.
inline SBox coset_respecting_sbox(int m, const Subspace& from_m, const Subspace& to_m,
                                  std::mt19937_64& rng) {
  if (from_m.dim() != to_m.dim())
    throw std::invalid_argument("coset-respecting S-box needs equal dimensions");
  std::size_t size = std::size_t(1) << m;
  std::vector<word> from = from_m.elements(), to = to_m.elements();
  std::vector<word> from_reps, to_reps;
  std::vector<bool> seen(size, false);
  for (word x = 0; x < size; ++x) {
    if (seen[x]) continue;
    from_reps.push_back(x);
    for (word wv : from) seen[x ^ wv] = true;
  }
  std::fill(seen.begin(), seen.end(), false);
  for (word x = 0; x < size; ++x) {
    if (seen[x]) continue;
    to_reps.push_back(x);
    for (word wv : to) seen[x ^ wv] = true;
  }
  std::vector<std::size_t> perm(from_reps.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size() - 1; i > 1; --i)
    std::swap(perm[i], perm[1 + rng() % i]);
  std::vector<std::uint16_t> table(size);
  for (std::size_t ci = 0; ci < from_reps.size(); ++ci) {
    std::vector<word> src, dst;
    for (word wv : from) src.push_back(from_reps[ci] ^ wv);
    for (word wv : to) dst.push_back(to_reps[perm[ci]] ^ wv);
    for (std::size_t i = dst.size() - 1; i > 0; --i)
      std::swap(dst[i], dst[rng() % (i + 1)]);
    if (ci == 0) {
      std::size_t zero_src = 0, zero_dst = 0;
      for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i] == 0) zero_src = i;
        if (dst[i] == 0) zero_dst = i;
      }
      std::swap(dst[zero_src], dst[zero_dst]);
    }
    for (std::size_t i = 0; i < src.size(); ++i)
      table[src[i]] = std::uint16_t(dst[i]);
  }
  return SBox(m, std::move(table));
}

// Invertible map with from . lambda = to (equal dimensions), completed with
// a seeded random basis extension.
inline LinearMap carrying_linear_map(int n, const Subspace& from, const Subspace& to,
                                     std::mt19937_64& rng) {
  if (from.dim() != to.dim())
    throw std::invalid_argument("carrying map needs equal dimensions");
  for (int attempt = 0; attempt < 4096; ++attempt) {
    std::vector<word> dom = from.basis(), img = to.basis();
    Subspace dom_span = from, img_span = to;
    while (dom_span.dim() < n) {
      word v = word(rng()) & dim_mask(n);
      word wv = word(rng()) & dim_mask(n);
      if (!dom_span.contains(v) && !img_span.contains(wv)) {
        dom.push_back(v);
        img.push_back(wv);
        dom_span.insert(v);
        img_span.insert(wv);
      }
    }
    std::vector<word> rows(std::size_t(n), 0);
    LinearMap dom_inv = LinearMap(dom, n).inverse();
    for (int k = 0; k < n; ++k) {
      word coords = dom_inv.apply(word(1) << k);
      word image = 0, x = coords;
      while (x) {
        int i = std::countr_zero(x);
        x &= x - 1;
        image ^= img[std::size_t(i)];
      }
      rows[std::size_t(k)] = image;
    }
    LinearMap lm(rows, n);
    if (lm.is_invertible()) return lm;
  }
  throw std::logic_error("could not build a carrying mixing layer");
}

// Splits a block-decomposable subspace into per-block parts in block-local
// (width-m) coordinates; throws if it does not decompose.
inline std::vector<Subspace> block_decomposition(const Subspace& s, int b, int m) {
  check_block_shape(s.ambient_dim(), b, m);
  std::vector<Subspace> parts;
  int total = 0;
  for (int j = 1; j <= b; ++j) {
    word outside = dim_mask(b * m) & ~block_mask(j, m);
    Subspace part(m);
    for (word v : s.elements())
      if (!(v & outside)) part.insert(v >> ((j - 1) * m));
    total += part.dim();
    parts.push_back(part);
  }
  if (total != s.dim())
    throw std::invalid_argument("subspace does not decompose per block");
  return parts;
}

// Parallel map carrying cosets of one block-decomposable subspace onto
// cosets of another with matching per-block dimensions.
inline ParallelMap coset_respecting_parallel_map(int b, int m, const Subspace& from,
                                                 const Subspace& to,
                                                 std::mt19937_64& rng) {
  std::vector<Subspace> fp = block_decomposition(from, b, m);
  std::vector<Subspace> tp = block_decomposition(to, b, m);
  std::vector<SBox> boxes;
  for (int j = 0; j < b; ++j)
    boxes.push_back(coset_respecting_sbox(m, fp[std::size_t(j)], tp[std::size_t(j)], rng));
  return ParallelMap(b, m, std::move(boxes));
}

// Builds an l-round cipher whose round maps carry L(chain[h]) onto
// L(chain[h+1]): per-block coset bijections for the S-boxes, and a mixing
// layer built to carry the intermediate subspace onto the next chain entry.
// Serves as the positive control for the searches.
inline TbCipher build_trapdoored_cipher(int n, int b, int m,
                                        const std::vector<Subspace>& chain,
                                        std::uint64_t seed,
                                        std::optional<KeySchedule> schedule = {}) {
  check_block_shape(n, b, m);
  if (chain.size() < 2)
    throw std::invalid_argument("trapdoored chain needs at least two entries");
  int l = int(chain.size()) - 1;
  std::mt19937_64 rng(seed);

  // Every chain entry must be nontrivial, block-decomposable, and of a
  // common dimension (bijective rounds preserve block sizes).
  std::vector<std::vector<Subspace>> block_parts;
  for (const Subspace& s : chain) {
    if (s.ambient_dim() != n || s.is_trivial())
      throw std::invalid_argument("trapdoored chain entries must be nontrivial");
    if (s.dim() != chain[0].dim())
      throw std::invalid_argument("trapdoored chain entries must share a dimension");
    block_parts.push_back(block_decomposition(s, b, m));
  }

  auto random_block_local_subspace = [&](int d) {
    Subspace s(m);
    while (s.dim() < d) s.insert(word(rng()) & dim_mask(m));
    return s;
  };

  std::vector<Round> rounds;
  for (int h = 0; h < l; ++h) {
    // intermediate subspace with the same per-block dimensions as chain[h]
    Subspace m_total(n);
    std::vector<SBox> boxes;
    for (int j = 1; j <= b; ++j) {
      Subspace part =
          random_block_local_subspace(block_parts[std::size_t(h)][std::size_t(j - 1)].dim());
      for (word r : part.basis()) m_total.insert(r << ((j - 1) * m));
      boxes.push_back(coset_respecting_sbox(
          m, block_parts[std::size_t(h)][std::size_t(j - 1)], part, rng));
    }
    LinearMap lambda = carrying_linear_map(n, m_total, chain[std::size_t(h) + 1], rng);
    rounds.push_back(Round{ParallelMap(b, m, std::move(boxes)), lambda});
  }

  KeySchedule ks = schedule ? *schedule : [&] {
    std::vector<std::vector<word>> tuples;
    for (int i = 0; i < 256; ++i) {
      std::vector<word> t;
      for (int h = 0; h < l; ++h) t.push_back(word(rng()) & dim_mask(n));
      tuples.push_back(t);
    }
    return KeySchedule(l, n, ExplicitSchedule{std::move(tuples)});
  }();

  TbCipher c(n, b, m, std::move(rounds), std::move(ks));

  // The construction promises L(chain[h]) -> L(chain[h+1]) per round.
  for (int h = 0; h < l; ++h) {
    Partition img = expand(LinearPartition(chain[std::size_t(h)])).map(c.round_table(h));
    if (!(img == expand(LinearPartition(chain[std::size_t(h) + 1]))))
      throw std::logic_error("trapdoored construction failed to carry the chain");
  }
  return c;
}

// ---- lemma-family scans ----

enum class LemmaId { lm1, lm2, lm3, lm11, lm22, lm33 };

inline const char* lemma_name(LemmaId id) {
  switch (id) {
    case LemmaId::lm1: return "lm-1";
    case LemmaId::lm2: return "lm-2";
    case LemmaId::lm3: return "lm-3";
    case LemmaId::lm11: return "lm-11";
    case LemmaId::lm22: return "lm-22";
    case LemmaId::lm33: return "lm-33";
  }
  return "?";
}

struct LemmaSurvivor {
  Subspace W1, W2;          // the linear-affine pair over U
  PartitionStructure image;  // structure of the mapped partition
  bool conclusion_holds = false;  // all named spaces are equal walls
};

struct LemmaReport {
  std::string which;
  bool hypotheses_ok = false;
  std::string hypothesis_detail;
  std::uint64_t pairs_scanned = 0;
  std::vector<LemmaSurvivor> survivors;
  bool all_conclusions_hold = true;
};

namespace detail {

// Scans ordered pairs (W1, W2) of subspaces of U (including W1 == W2, the
// degenerate linear members of the family) and reports every pair whose
// image under rho lands in the target family: linear partitions, or
// linear-affine partitions over the given hyperplane.
inline void scan_la_pairs(const PermTable& rho, const Subspace& u,
                          const std::optional<Subspace>& target_u,
                          LemmaReport& rep, int b, int m, int threads = 1) {
  const int n = u.ambient_dim();
  std::vector<Subspace> subs = subspaces_of(u);
  word vbar = 0;
  for (word v = 1; v < (word(1) << n); ++v)
    if (!u.contains(v)) { vbar = v; break; }

  std::vector<HalfProfile> prof1(subs.size()), prof2(subs.size());
  parallel_for(subs.size(), threads, [&](std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t i = lo; i < hi; ++i) {
      prof1[i] = half_profile(u, vbar, subs[i], 0, rho, target_u);
      prof2[i] = half_profile(u, vbar, subs[i], 1, rho, target_u);
    }
  });

  for (std::size_t i1 = 0; i1 < subs.size(); ++i1) {
    const HalfProfile& p1 = prof1[i1];
    for (std::size_t i2 = 0; i2 < subs.size(); ++i2) {
      ++rep.pairs_scanned;
      const Subspace& w1 = subs[i1];
      const Subspace& w2 = subs[i2];
      if (w1.is_zero() && w2.is_zero()) continue;  // trivial partition
      if (!p1.cosets || !prof2[i2].cosets) continue;

      bool candidate;
      if (target_u) {
        // target family: linear with direction inside U', or genuine LA_{U'};
        // straddling blocks cannot occur in either shape.
        candidate = p1.split_ok && prof2[i2].split_ok &&
                    sides_consistent(p1.dir_in, prof2[i2].dir_in) &&
                    sides_consistent(p1.dir_out, prof2[i2].dir_out);
      } else {
        candidate = p1.uniform && prof2[i2].uniform && p1.dir_any == prof2[i2].dir_any;
      }
      if (!candidate) continue;

      Partition image = (w1 == w2 ? expand(LinearPartition(w1))
                                  : expand(LinearAffinePartition(u, w1, w2)))
                            .map(rho);
      PartitionStructure st = classify_partition_structure(image);
      bool in_family = false;
      if (st.kind == PartitionStructure::Kind::Linear) {
        in_family = !target_u || target_u->contains(st.W);
      } else if (st.kind == PartitionStructure::Kind::LinearAffine) {
        in_family = target_u && st.U == *target_u;
      }
      if (!in_family) continue;

      LemmaSurvivor s;
      s.W1 = w1;
      s.W2 = w2;
      s.image = st;
      bool walls = is_wall(w1, b, m) && w1 == w2;
      if (st.kind == PartitionStructure::Kind::Linear)
        walls = walls && is_wall(st.W, b, m) && st.W == w1;
      else
        walls = walls && is_wall(st.W1, b, m) && is_wall(st.W2, b, m) &&
                st.W1 == st.W2 && st.W1 == w1;
      s.conclusion_holds = walls;
      rep.all_conclusions_hold &= walls;
      rep.survivors.push_back(std::move(s));
    }
  }
}

}  // namespace detail

// Exhaustive lemma-family scan for a parallel map. Refuses to run when the
// S-box hypotheses do not hold (the reports would be meaningless).
inline LemmaReport validate_lemma(const ParallelMap& gamma, LemmaId which,
                                  const Subspace& u,
                                  std::optional<Subspace> u_prime = {},
                                  int threads = 1) {
  LemmaReport rep;
  rep.which = lemma_name(which);
  const int m = gamma.m;
  const int n = gamma.dim();
  if (!gamma.fixes_zero() || !gamma.is_bijective())
    throw std::invalid_argument("lemma scan needs a bijective zero-fixing parallel map");
  if (u.ambient_dim() != n || u.dim() != n - 1)
    throw std::invalid_argument("lemma scan needs a hyperplane U");

  bool strict = which == LemmaId::lm1 || which == LemmaId::lm2 || which == LemmaId::lm3;
  bool pair_target = which == LemmaId::lm3 || which == LemmaId::lm33;
  if (pair_target) {
    if (!u_prime || u_prime->ambient_dim() != n || u_prime->dim() != n - 1)
      throw std::invalid_argument("lemma scan needs a hyperplane U'");
    auto ju = j_set_of(u, gamma.b, m);
    auto jup = j_set_of(*u_prime, gamma.b, m);
    for (int a : ju)
      for (int bb : jup)
        if (a == bb)
          throw std::invalid_argument("lemma scan requires disjoint J sets");
  }

  for (const SBox& s : gamma.boxes) {
    int delta = differential_uniformity(s);
    if (strict) {
      int r = detail::ceil_log2(delta);
      if (r >= m - 1) {
        rep.hypothesis_detail = "S-box differential uniformity too large (needs 2^r with r < m-1)";
        throw std::invalid_argument(rep.hypothesis_detail);
      }
      if (!is_strongly_anti_invariant(s, r).holds) {
        rep.hypothesis_detail = "S-box is not strongly r-anti-invariant";
        throw std::invalid_argument(rep.hypothesis_detail);
      }
    } else {
      if (m < 4 || delta > 4 || n_hat(s) != 0) {
        rep.hypothesis_detail =
            "S-box hypotheses (m >= 4, 4-uniform, no linear structures) violated";
        throw std::invalid_argument(rep.hypothesis_detail);
      }
    }
  }
  rep.hypotheses_ok = true;

  PermTable table = gamma.table();
  switch (which) {
    case LemmaId::lm1:
    case LemmaId::lm11:
      // gamma maps L(W) onto LA_U(W1|W2)  <=>  the pair maps to linear
      // under gamma^{-1}.
      detail::scan_la_pairs(invert_table(table), u, std::nullopt, rep, gamma.b, m, threads);
      break;
    case LemmaId::lm2:
    case LemmaId::lm22:
      detail::scan_la_pairs(table, u, std::nullopt, rep, gamma.b, m, threads);
      break;
    case LemmaId::lm3:
    case LemmaId::lm33:
      detail::scan_la_pairs(table, u, u_prime, rep, gamma.b, m, threads);
      break;
  }
  return rep;
}

// ---- theorem validation ----

enum class TheoremId { francesi, main, gam, mainme, nonlimit };

inline const char* theorem_name(TheoremId id) {
  switch (id) {
    case TheoremId::francesi: return "th-francesi";
    case TheoremId::main: return "th-main";
    case TheoremId::gam: return "th-gam";
    case TheoremId::mainme: return "th-mainme";
    case TheoremId::nonlimit: return "cor-nonlimit";
  }
  return "?";
}

struct TheoremValidation {
  std::string which;
  bool hypotheses_ok = false;
  std::string detail;
  TheoremHypothesesReport hypotheses;
  bool pass = false;
  std::optional<TrapdoorWitness> witness;
  std::optional<PrimitivityVerdict> primitivity;
};

inline PrimitivityVerdict cipher_primitivity(const TbCipher& c, int sample_keys,
                                             std::uint64_t seed, int threads = 1) {
  auto tuples = sample_key_tuples(c.schedule(), sample_keys, seed);
  std::vector<PermTable> gens;
  for (const auto& t : tuples) gens.push_back(c.materialize(t));
  return is_primitive(PermSet(c.dim(), std::move(gens)), threads);
}

inline TheoremValidation validate_theorem(const TbCipher& c, TheoremId which,
                                          bool force = false, int sample_keys = 64,
                                          std::uint64_t seed = 1, int threads = 1) {
  TheoremValidation out;
  out.which = theorem_name(which);
  out.hypotheses = theorem_hypotheses_report(c);

  if (which == TheoremId::francesi) {
    // Hypotheses: a whitening first round and an all-tuples key image.
    bool whitening = c.round_table(0) == identity_table(c.dim());
    std::uint64_t full = std::uint64_t(1) << (c.dim() * c.round_count());
    bool all_keys = false;
    if (auto* e = c.schedule().get_if<ExplicitSchedule>()) {
      auto tuples = e->tuples;
      std::sort(tuples.begin(), tuples.end());
      tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
      all_keys = tuples.size() == full;
    }
    out.hypotheses_ok = whitening && all_keys;
    if (!out.hypotheses_ok && !force) {
      out.detail = "needs an identity first round and the full key-tuple image";
      return out;
    }
    SearchScope scope;
    scope.threads = threads;
    out.witness = search_trapdoor(c, scope);
    if (!out.witness) {
      out.detail = "no trapdoor pair found to instantiate the hypotheses";
      return out;
    }
    auto chain = propagate(c, out.witness->A);
    bool all_linear = true;
    for (const ChainEntry& e : chain)
      all_linear &= e.structure.kind == PartitionStructure::Kind::Linear;
    bool ends_at_b = chain.back().partition == out.witness->B;
    out.pass = all_linear && ends_at_b && out.witness->reverified_all_keys;
    out.detail = all_linear ? "chain is linear throughout" : "chain left the linear family";
    return out;
  }

  switch (which) {
    case TheoremId::main: out.hypotheses_ok = out.hypotheses.th_main_applies; break;
    case TheoremId::gam: out.hypotheses_ok = out.hypotheses.th_gam_applies; break;
    case TheoremId::mainme: out.hypotheses_ok = out.hypotheses.th_mainme_applies; break;
    case TheoremId::nonlimit: out.hypotheses_ok = out.hypotheses.cor_nonlimit_applies; break;
    default: break;
  }
  if (!out.hypotheses_ok && !force) {
    out.detail = "theorem hypotheses not met";
    return out;
  }

  if (which == TheoremId::main) {
    // Independent round keys: the chain faces a full window at every round.
    std::vector<std::vector<word>> two;
    two.push_back(std::vector<word>(std::size_t(c.round_count()), 0));
    for (int h = 0; h < c.round_count(); ++h) {
      // explicit schedule whose per-round difference span is all of V
      for (int k = 0; k < c.dim(); ++k) {
        std::vector<word> t(std::size_t(c.round_count()), 0);
        t[std::size_t(h)] = word(1) << k;
        two.push_back(t);
      }
    }
    KeySchedule ind(c.round_count(), c.dim(), ExplicitSchedule{std::move(two)});
    TbCipher cc(c.dim(), c.blocks(), c.block_width(), c.rounds(), std::move(ind));
    SearchScope scope;
    scope.threads = threads;
    out.witness = search_trapdoor(cc, scope);
    // primitivity of the independent-key group: seeded sample over V^l
    std::mt19937_64 rng(seed);
    std::vector<PermTable> gens;
    for (int i = 0; i < sample_keys; ++i) {
      std::vector<word> t;
      for (int h = 0; h < c.round_count(); ++h) t.push_back(word(rng()) & dim_mask(c.dim()));
      gens.push_back(c.materialize(t));
    }
    out.primitivity = is_primitive(PermSet(c.dim(), std::move(gens)), threads);
  } else {
    SearchScope scope;
    scope.threads = threads;
    out.witness = search_trapdoor(c, scope);
    out.primitivity = cipher_primitivity(c, sample_keys, seed, threads);
  }
  out.pass = !out.witness && out.primitivity->primitive();
  out.detail = out.pass ? "no trapdoor in the scanned family; group is primitive"
                        : (out.witness ? "search found a trapdoor witness"
                                       : "group verdict is not primitive");
  return out;
}

}  // namespace tbtrap
