// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace faceanim {

/// Deterministic random source. mt19937_64 output is pinned by the C++
/// standard, and the value transforms below are spelled out by hand, so a
/// given seed produces the same stream on every platform and toolchain.
/// (std::uniform_real_distribution makes no such promise.)
class Rng {
public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double next_f64() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_f64(); }

  /// Uniform integer in [0, n).
  uint64_t below(uint64_t n) {
    // Rejection sampling keeps the draw exactly uniform.
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  int uniform_int(int lo, int hi) {  // inclusive range
    return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_f64(), u2 = next_f64();
    while (u1 <= 0.0) u1 = next_f64();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Mixes a base seed with a stream index into an independent child seed.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
  // splitmix64 finalizer over the combined value
  uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace faceanim
