#ifndef CALTUNE_RNG_HPP
#define CALTUNE_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace caltune {

/// splitmix64 finalizer; used to derive independent seed streams.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based seed derivation: the stream for (dataset, lambda, run, ...)
/// depends only on the master seed and the path components, never on
/// evaluation order.
inline uint64_t derive_seed(uint64_t base, std::initializer_list<uint64_t> path) {
  uint64_t s = mix64(base);
  for (uint64_t p : path) s = mix64(s ^ mix64(p));
  return s;
}

/// Seeded random stream with explicit, stdlib-version-independent draws.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : eng_(seed) {}

  uint64_t raw() { return eng_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Uniform integer in [0, n); rejection sampling, no modulo bias.
  uint64_t below(uint64_t n) {
    if (n == 0) return 0;
    uint64_t bound = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = eng_();
    } while (x >= bound);
    return x % n;
  }

  int action(int n) { return static_cast<int>(below(static_cast<uint64_t>(n))); }

  /// Standard normal via Box-Muller; second value cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace caltune

#endif
