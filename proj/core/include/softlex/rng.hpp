#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace softlex {

// Deterministic RNG. All draws are derived from raw mt19937_64 output with
// fixed arithmetic (no implementation-defined std:: distributions), so a
// (seed, call sequence) pair reproduces bit-identical streams everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(splitmix(seed)) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(next_u64() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates with our own draws (std::shuffle is implementation-defined).
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent child stream; deterministic in (parent state, stream id).
  Rng fork(uint64_t stream) { return Rng(next_u64() ^ splitmix(stream + 0x9E3779B97F4A7C15ULL)); }

 private:
  static uint64_t splitmix(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 gen_;
};

}  // namespace softlex
