#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace pwc {

// All randomness in the toolkit flows from one top-level seed through named
// substreams (sim, noise, init, dropout, shuffle) so components can be
// replayed independently and results are bit-identical run to run.

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derive a substream seed from (seed, name, indices). FNV-1a over the name,
// then splitmix rounds to decorrelate nearby indices.
inline uint64_t substream(uint64_t seed, std::string_view name, uint64_t a = 0, uint64_t b = 0,
                          uint64_t c = 0) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (char ch : name) h = (h ^ static_cast<unsigned char>(ch)) * 0x100000001b3ull;
  uint64_t s = seed ^ h;
  splitmix64(s);
  s ^= a * 0x9e3779b97f4a7c15ull;
  splitmix64(s);
  s ^= b * 0xc2b2ae3d27d4eb4full;
  splitmix64(s);
  s ^= c * 0x165667b19e3779f9ull;
  return splitmix64(s);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ? seed : 0x853c49e6748fea9bull) {}

  uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Modulo bias is negligible for the n used here.
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

  // Standard normal via Box-Muller; deterministic across platforms.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(next_u64() % i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pwc
