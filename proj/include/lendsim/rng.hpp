#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lendsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seed for one sweep cell. Splitting off (horizon, repetition) keeps earlier
// repetitions' seeds fixed when more repetitions are requested later.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t horizon,
                                 std::uint64_t repetition) {
  return splitmix64(splitmix64(master ^ splitmix64(horizon + 0x632be59bd9b4e019ull)) ^
                    repetition);
}

// mt19937_64 raw output is pinned by the standard; all samplers below are
// built from those bits only, so streams replay byte-identically anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // [0, 1) with 53-bit resolution
  double uniform01() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  long long uniform_int(long long lo, long long hi) {  // inclusive range
    return lo + static_cast<long long>(uniform01() * static_cast<double>(hi - lo + 1));
  }

  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  // density (1/2b)e^{-|x|/b}; tail P[|X| > x] = e^{-x/b}
  double laplace(double scale) {
    const double u = uniform01() - 0.5;
    const double mag = -scale * std::log1p(-2.0 * std::fabs(u));
    return u < 0 ? -mag : mag;
  }

  // support {1, 2, ...} with mean `mean` (success probability 1/mean)
  long long geometric(double mean) {
    if (mean <= 1.0) return 1;
    const double q = 1.0 / mean;
    const double u = uniform01();
    const long long k = 1 + static_cast<long long>(std::floor(std::log1p(-u) / std::log1p(-q)));
    return k < 1 ? 1 : k;
  }

  double pareto(double alpha, double x_min) {
    return x_min * std::pow(1.0 - uniform01(), -1.0 / alpha);
  }

  double normal(double mean, double stddev) {
    // Box-Muller; consumes two uniforms per call, no cached spare
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lendsim
