#pragma once

// Seeded random source with platform-independent helpers.  The standard
// distributions are implementation-defined, so outputs would differ between
// standard libraries; everything here is computed from raw engine words.

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace ltlfgen {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for (seed, tag, index).
  static Rng derive(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
    return Rng(splitmix64(splitmix64(seed ^ fnv1a(tag)) + index));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n); n > 0.
  std::uint64_t uniform(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do x = engine_();
    while (x >= limit);
    return x % n;
  }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform(i)]);
  }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[uniform(v.size())];
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ltlfgen
