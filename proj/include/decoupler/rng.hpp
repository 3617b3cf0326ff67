// rng.hpp — Deterministic seeded RNG streams for Monte-Carlo sampling.
//
// Every stochastic routine in the library derives an independent stream
// per (master seed, index) pair, so results do not depend on execution
// order or worker count.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace decoupler::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream seed for sub-task `index` of a computation with master `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

// Standard-normal source. mt19937_64 output is specified by the standard,
// and the Box-Muller transform below avoids the implementation-defined
// behaviour of std::normal_distribution, so streams are reproducible
// across standard libraries.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double uniform01() {
    return (gen_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace decoupler::rng
