#ifndef IBSIM_RNG_HPP
#define IBSIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace ibsim {

// SplitMix64 step; used both as a mixer for stream derivation and to seed
// the main generator.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic per-member stream seed. Results of ensemble runs therefore
// do not depend on scheduling order.
inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s = a ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  std::uint64_t b = splitmix64(s);
  return b;
}

// Deterministic generator. Uniform/normal conversion is done here rather
// than through std::*_distribution so output is pinned to the algorithm,
// not a library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe for log().
  double uniform01_open0() { return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller, pair cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01_open0();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Poisson by Knuth inversion; fine for desk-scale means.
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    double prod = 1.0;
    int n = -1;
    do {
      prod *= uniform01_open0();
      ++n;
    } while (prod > limit);
    return n;
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Modulo bias negligible for desk-scale n; determinism is what matters.
    return gen_() % n;
  }

 private:
  std::mt19937_64 gen_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace ibsim

#endif  // IBSIM_RNG_HPP
