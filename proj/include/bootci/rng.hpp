// Deterministic keyed random streams.
//
// Every piece of randomness in the library is drawn from a stream derived
// from (master seed, path), where the path is a short tuple of nonnegative
// indices naming the work item (e.g. [context, first-level index,
// second-level index]). Distinct keys give statistically independent
// streams, so a tree of resampling work replays bit-identically in any
// execution order and on any number of threads.
#pragma once

#include <array>
#include <cassert>
#include <cstdint>

#include "bootci/stats.hpp"

namespace bootci {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer; a strong 64-bit permutation.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

struct StreamKey {
  std::uint64_t master_seed = 0;
  std::array<std::int64_t, 3> path{0, 0, 0};
  int depth = 0;

  static StreamKey root(std::uint64_t seed) { return StreamKey{seed, {0, 0, 0}, 0}; }

  StreamKey child(std::int64_t index) const {
    assert(depth < 3 && index >= 0);
    StreamKey k = *this;
    k.path[k.depth++] = index;
    return k;
  }
};

inline StreamKey make_key(std::uint64_t seed, std::initializer_list<std::int64_t> path) {
  StreamKey k = StreamKey::root(seed);
  for (std::int64_t e : path) k = k.child(e);
  return k;
}

// xoshiro256++ whose state is expanded from the key by splitmix64 absorption.
class Stream {
 public:
  explicit Stream(const StreamKey& key) {
    std::uint64_t h = mix64(key.master_seed + kGolden);
    for (int i = 0; i < key.depth; ++i) {
      h = mix64(h + kGolden +
                static_cast<std::uint64_t>(key.path[i]) * 0xD1B54A32D192ED03ull);
    }
    for (auto& word : state_) {
      h += kGolden;
      word = mix64(h);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0,1), 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1); safe to feed through inverse CDFs.
  double next_unit_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal by inverse CDF; one u64 per draw, no generator state
  // beyond the stream itself.
  double next_normal() { return norm_quantile(next_unit_open()); }

  // Unbiased draw from {0, ..., bound-1} (Lemire's multiply-reject method).
  std::uint64_t next_below(std::uint64_t bound) {
    assert(bound > 0);
    while (true) {
      const std::uint64_t x = next_u64();
      const auto m = static_cast<unsigned __int128>(x) * bound;
      const auto lo = static_cast<std::uint64_t>(m);
      if (lo >= bound || lo >= (0ull - bound) % bound) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int r) {
    return (x << r) | (x >> (64 - r));
  }
  std::array<std::uint64_t, 4> state_;
};

inline Stream derive_stream(const StreamKey& key) { return Stream(key); }

// Path contexts used by the library. Context 1 is an interval computation's
// own bootstrap tree; 2 draws datasets/subsamples; 3 derives per-replication
// master seeds for the interval computations inside a study.
inline constexpr std::int64_t kCtxBootstrap = 1;
inline constexpr std::int64_t kCtxDataDraw = 2;
inline constexpr std::int64_t kCtxSeedDerive = 3;

}  // namespace bootci
