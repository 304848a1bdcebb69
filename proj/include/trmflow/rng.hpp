#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace trm {

// Deterministic RNG. All transforms are hand-rolled on top of the raw
// mt19937_64 stream because std::uniform_real_distribution and
// std::normal_distribution are not bit-identical across standard libraries,
// and frozen test values plus byte-identical reruns depend on the stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller (consumes two uniforms per draw).
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    const int k = static_cast<int>(uniform01() * static_cast<double>(n));
    return k >= n ? n - 1 : k;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[static_cast<std::size_t>(i)],
                v[static_cast<std::size_t>(uniform_int(i + 1))]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

// Named sub-stream seeds so that e.g. synthetic-data noise and weight init
// draw from unrelated streams of one root seed (FNV-1a over the name,
// mixed with the root by a splitmix64 round).
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stream) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::uint64_t z = root ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace trm
