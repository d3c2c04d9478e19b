#pragma once
#include <cstdint>
#include <string_view>
#include <vector>

namespace daa {

// Deterministic, stream-splittable RNG. Every parallel unit of work owns a
// private stream derived from (seed, tag, indices), so results do not depend
// on thread count or scheduling.

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL);

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t a = 0, std::uint64_t b = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::string_view tag, std::uint64_t a = 0, std::uint64_t b = 0)
      : Rng(derive_seed(seed, tag, a, b)) {}

  std::uint64_t next();                    // xoshiro256++
  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);    // [lo, hi)
  double normal();                         // standard normal, Box-Muller
  std::uint64_t bounded(std::uint64_t n);  // uniform in [0, n), rejection method

  // first k entries of a uniformly random permutation of 0..n-1
  std::vector<int> partial_shuffle(int n, int k);
  std::vector<int> permutation(int n) { return partial_shuffle(n, n); }

 private:
  std::uint64_t s_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace daa
