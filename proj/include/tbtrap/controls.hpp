#pragma once

// Shipped control ciphers: the compliant reference cipher, trapdoored
// positive controls, and the single-hypothesis ablation fixtures. All are
// deterministic functions of their seed.

#include <cstdint>
#include <random>
#include <stdexcept>

#include "tbtrap/cipher.hpp"
#include "tbtrap/trapdoor.hpp"

namespace tbtrap {

inline LinearMap random_invertible_map(int n, std::mt19937_64& rng) {
  while (true) {
    std::vector<word> rows;
    for (int k = 0; k < n; ++k) rows.push_back(word(rng()) & dim_mask(n));
    LinearMap lm(rows, n);
    if (lm.is_invertible()) return lm;
  }
}

inline LinearMap random_strongly_proper_map(int n, int b, int m, std::mt19937_64& rng) {
  while (true) {
    LinearMap lm = random_invertible_map(n, rng);
    if (check_mixing_layer(lm, b, m).strongly_proper) return lm;
  }
}

inline Subspace kernel_of_functional(word c, int n) {
  Subspace u(n);
  for (word v = 1; v < (word(1) << n); ++v)
    if (dot(v, c) == 0) u.insert(v);
  return u;
}

inline LinearMap block_swap_map(int n) {
  // b = 2 only: swaps the two halves.
  std::vector<word> rows(std::size_t(n), 0);
  int half = n / 2;
  for (int k = 0; k < half; ++k) {
    rows[std::size_t(k)] = word(1) << (k + half);
    rows[std::size_t(k + half)] = word(1) << k;
  }
  return LinearMap(std::move(rows), n);
}

struct CompliantParts {
  LinearMap lambda;          // used in every round; strongly proper
  Subspace U1, U2, U3;       // window subspaces, J-compatible with lambda
};

// Window subspaces compatible with the round-i mixing layer: J_{U1} = {2},
// U2 = D.lambda for D with J_D = {1} (so J_{U2 lambda^-1} = {1}), J_{U3} = {2}.
inline CompliantParts compliant_parts(int n, int b, int m, const LinearMap& lambda) {
  CompliantParts parts{lambda, Subspace(n), Subspace(n), Subspace(n)};
  parts.U1 = kernel_of_functional(word(1) << m, n);        // supported in block 2
  Subspace d = kernel_of_functional(1, n);                 // supported in block 1
  parts.U2 = lambda.image_of(d);
  parts.U3 = kernel_of_functional(word(1) << (n - 1), n);  // block b
  (void)b;
  return parts;
}

// The reference cipher for the almost-independent primitivity criterion:
// n = 8, b = 2, m = 4, five rounds of parallel inversion with one strongly
// proper mixing layer, window at rounds 1..3.
inline TbCipher make_compliant_cipher(std::uint64_t seed = 2024,
                                      std::optional<LinearMap> lambda = {}) {
  const int n = 8, b = 2, m = 4, l = 5;
  std::mt19937_64 rng(seed);
  LinearMap lm = lambda ? *lambda : random_strongly_proper_map(n, b, m, rng);
  CompliantParts parts = compliant_parts(n, b, m, lm);
  ParallelMap gamma = ParallelMap::uniform(b, gf_inverse_sbox(GFContext(m)));
  std::vector<Round> rounds(std::size_t(l), Round{gamma, lm});
  std::vector<word> fixed(std::size_t(l), 0);
  fixed[3] = word(rng()) & dim_mask(n);
  fixed[4] = word(rng()) & dim_mask(n);
  KeySchedule ks(l, n,
                 AlmostIndependentSchedule{2, parts.U1, parts.U2, parts.U3, fixed});
  return TbCipher(n, b, m, std::move(rounds), std::move(ks));
}

// Trapdoored positive control: three rounds carrying a chain of non-wall
// linear partitions, keys sampled explicitly.
inline TbCipher make_linear_chain_control(std::uint64_t seed = 7) {
  const int n = 8, b = 2, m = 4;
  auto sp = [&](std::vector<word> vs) {
    Subspace s(n);
    for (word v : vs) s.insert(v);
    return s;
  };
  std::vector<Subspace> chain = {
      sp({0x03, 0x30}), sp({0x05, 0x50}), sp({0x06, 0x60}), sp({0x09, 0x90})};
  return build_trapdoored_cipher(n, b, m, chain, seed);
}

// Wall-preserving variant: every round fixes L(V1), so the generated group
// is imprimitive with that coset partition as a block system.
inline TbCipher make_wall_control(std::uint64_t seed = 11) {
  const int n = 8, b = 2, m = 4;
  Subspace v1 = wall_subspace({1}, b, m);
  std::vector<Subspace> chain(4, v1);
  return build_trapdoored_cipher(n, b, m, chain, seed);
}

// All-keys trapdoored cipher with a whitening first round, small enough to
// enumerate the full tuple space V^l.
inline TbCipher make_full_key_trapdoor_control(std::uint64_t seed = 5) {
  const int n = 4, b = 2, m = 2, l = 4;
  auto sp = [&](std::vector<word> vs) {
    Subspace s(n);
    for (word v : vs) s.insert(v);
    return s;
  };
  std::vector<Subspace> chain = {sp({0x1, 0x4}), sp({0x2, 0x4}), sp({0x1, 0x8}),
                                 sp({0x2, 0x8})};
  TbCipher inner = build_trapdoored_cipher(n, b, m, chain, seed);
  std::vector<Round> rounds;
  rounds.push_back(Round{ParallelMap::uniform(b, identity_sbox(m)), LinearMap::identity(n)});
  for (const Round& r : inner.rounds()) rounds.push_back(r);
  std::vector<std::vector<word>> tuples;
  for (word k = 0; k < (word(1) << (n * l)); ++k) {
    std::vector<word> t;
    for (int h = 0; h < l; ++h) t.push_back((k >> (h * n)) & dim_mask(n));
    tuples.push_back(std::move(t));
  }
  KeySchedule ks(l, n, ExplicitSchedule{std::move(tuples)});
  return TbCipher(n, b, m, std::move(rounds), std::move(ks));
}

// ---- single-hypothesis ablations of the compliant cipher ----

// Mixing layer not strongly proper (block swap preserves the wall family);
// schedule and S-boxes unchanged.
inline TbCipher make_ablation_mixing(std::uint64_t seed = 2024) {
  const int n = 8, b = 2, m = 4, l = 5;
  std::mt19937_64 rng(seed);
  LinearMap swap = block_swap_map(n);
  CompliantParts parts = compliant_parts(n, b, m, swap);
  ParallelMap gamma = ParallelMap::uniform(b, gf_inverse_sbox(GFContext(m)));
  std::vector<Round> rounds(std::size_t(l), Round{gamma, swap});
  std::vector<word> fixed(std::size_t(l), 0);
  fixed[3] = word(rng()) & dim_mask(n);
  fixed[4] = word(rng()) & dim_mask(n);
  KeySchedule ks(l, n,
                 AlmostIndependentSchedule{2, parts.U1, parts.U2, parts.U3, fixed});
  return TbCipher(n, b, m, std::move(rounds), std::move(ks));
}

inline TbCipher make_ablation_mixing_restored(std::uint64_t seed = 2024) {
  return make_compliant_cipher(seed);
}

// S-boxes with linear structures (coset-respecting, so every derivative in
// a chain direction is constant); mixing layer strongly proper, schedule
// almost-independent. The chain subspace C satisfies C = M.lambda with both
// C and M block-decomposable, found by seeded search.
inline TbCipher make_ablation_sbox(std::uint64_t seed = 2024) {
  const int n = 8, b = 2, m = 4, l = 5;
  std::mt19937_64 rng(seed ^ 0x5b0f);
  for (int attempt = 0; attempt < 256; ++attempt) {
    LinearMap lambda = random_strongly_proper_map(n, b, m, rng);
    // M = span{u} + span{w} with u in block 1, w in block 2; need M.lambda
    // block-decomposable with per-block dimensions (1,1) as well.
    for (word u = 1; u < (word(1) << m); ++u) {
      for (word wv = 1; wv < (word(1) << m); ++wv) {
        word a = u, bb = wv << m;
        word ia = lambda.apply(a), ib = lambda.apply(bb);
        word lo = dim_mask(m), hi = dim_mask(m) << m;
        auto in_one_block = [&](word v) {
          return v && (((v & lo) == v) || ((v & hi) == v));
        };
        word e1 = ia, e2 = ib, e3 = ia ^ ib;
        // the image span {0, e1, e2, e3} decomposes iff two of the nonzero
        // elements live in opposite single blocks
        word c1 = 0, c2 = 0;
        for (word e : {e1, e2, e3}) {
          if (!in_one_block(e)) continue;
          if ((e & lo) == e && !c1) c1 = e;
          if ((e & hi) == e && !c2) c2 = e;
        }
        if (!c1 || !c2) continue;
        Subspace mm(n);
        mm.insert(a);
        mm.insert(bb);
        Subspace cc = lambda.image_of(mm);
        ParallelMap gamma = coset_respecting_parallel_map(b, m, cc, mm, rng);
        CompliantParts parts = compliant_parts(n, b, m, lambda);
        std::vector<Round> rounds(std::size_t(l), Round{gamma, lambda});
        std::vector<word> fixed(std::size_t(l), 0);
        // keys must keep the chain intact: linear partitions are fixed by
        // every translation, so any fixed keys work
        fixed[3] = word(rng()) & dim_mask(n);
        fixed[4] = word(rng()) & dim_mask(n);
        KeySchedule ks(
            l, n, AlmostIndependentSchedule{2, parts.U1, parts.U2, parts.U3, fixed});
        return TbCipher(n, b, m, std::move(rounds), std::move(ks));
      }
    }
  }
  throw std::logic_error("no decomposable chain found for the S-box ablation");
}

inline TbCipher make_ablation_sbox_restored(std::uint64_t seed = 2024) {
  // same recipe with the S-boxes put back to parallel inversion
  std::mt19937_64 rng(seed ^ 0x5b0f);
  LinearMap lambda = random_strongly_proper_map(8, 2, 4, rng);
  return make_compliant_cipher(seed, lambda);
}

// Schedule varying in round 1 only: not (almost-)independent at any window;
// every linear candidate sails through the later rounds unconstrained.
inline TbCipher make_ablation_schedule(std::uint64_t seed = 2024) {
  const int n = 8, b = 2, m = 4, l = 5;
  std::mt19937_64 rng(seed);
  LinearMap lm = random_strongly_proper_map(n, b, m, rng);
  ParallelMap gamma = ParallelMap::uniform(b, gf_inverse_sbox(GFContext(m)));
  std::vector<Round> rounds(std::size_t(l), Round{gamma, lm});
  std::vector<word> fixed;
  for (int h = 0; h < l; ++h) fixed.push_back(word(rng()) & dim_mask(n));
  std::vector<std::vector<word>> tuples;
  for (word k = 0; k < (word(1) << n); ++k) {
    std::vector<word> t = fixed;
    t[0] = k;
    tuples.push_back(std::move(t));
  }
  KeySchedule ks(l, n, ExplicitSchedule{std::move(tuples)});
  return TbCipher(n, b, m, std::move(rounds), std::move(ks));
}

inline TbCipher make_ablation_schedule_restored(std::uint64_t seed = 2024) {
  return make_compliant_cipher(seed);
}

}  // namespace tbtrap
