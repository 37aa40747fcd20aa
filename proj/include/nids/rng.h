// Copyright 2026 The NIDS Workbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NIDS_RNG_H_
#define NIDS_RNG_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace nids {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a list of stream coordinates into a seed, e.g.
/// DeriveSeed(seed, {epoch, layer}) or DeriveSeed(seed, {fold, cell}).
constexpr uint64_t DeriveSeed(uint64_t seed,
                              std::initializer_list<uint64_t> coords) {
  uint64_t h = Mix64(seed);
  for (uint64_t c : coords) h = Mix64(h ^ Mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

/// Seeded pseudorandom source with a platform-independent draw sequence.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard library distributions are not portable, so every
/// conversion (uniform reals, bounded integers, shuffles) is implemented here.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t NextU64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  uint64_t Index(uint64_t n) {
    // Rejection sampling removes modulo bias.
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Independent child stream; the parent state is not advanced.
  Rng Split(std::initializer_list<uint64_t> coords) const {
    return Rng(DeriveSeed(seed_, coords));
  }

  template <typename T>
  void Shuffle(std::span<T> values) {
    for (size_t i = values.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(Index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace nids

#endif  // NIDS_RNG_H_
