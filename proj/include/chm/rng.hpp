#ifndef CHM_RNG_HPP
#define CHM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace chm {

// splitmix64: used to expand/mix seeds so that (master_seed, stream_index)
// pairs give decorrelated generators.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s ^= stream * 0xda942042e4dd58b5ULL;
  std::uint64_t b = splitmix64(s);
  return a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
}

// Deterministic generator wrapper. All draws go through explicit mappings
// rather than std:: distributions, so a (seed -> sequence) contract holds
// independent of the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  Rng(std::uint64_t master, std::uint64_t stream) : gen_(derive_seed(master, stream)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1): 53 random mantissa bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (cached spare kept for determinism).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Binomial(n, p). Exact Bernoulli counting for small n, Gaussian
  // approximation (rounded, clamped) once n p (1-p) is large enough that the
  // approximation error is far below shot-noise scale.
  long binomial(long n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (n <= 1024 || n * p * (1.0 - p) < 100.0) {
      long k = 0;
      for (long i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
      return k;
    }
    const double mu = static_cast<double>(n) * p;
    const double sigma = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
    double v = std::round(mu + sigma * normal());
    if (v < 0.0) v = 0.0;
    if (v > static_cast<double>(n)) v = static_cast<double>(n);
    return static_cast<long>(v);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace chm

#endif
