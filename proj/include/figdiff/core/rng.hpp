// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace figdiff {

/// splitmix64 step, used to derive independent sub-seeds from (seed, tag)
/// pairs so that e.g. per-step training randomness is resume-stable.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

/// Deterministic RNG wrapper. All randomness in the project flows through
/// this type; distributions are fixed to the libstdc++ implementations,
/// which is fine because expected values are never frozen from raw draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return uni_(gen_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // inclusive range
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(gen_);
  }
  double normal() { return norm_(gen_); }

  template <typename T>
  void fill_normal(T* p, std::size_t n, double stddev = 1.0) {
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<T>(normal() * stddev);
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::uniform_real_distribution<double> uni_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace figdiff
