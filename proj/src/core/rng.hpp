// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef SMM_CORE_RNG_HPP
#define SMM_CORE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace smm {

// Deterministic random source. All randomized operations (holdout shuffling,
// synthetic sampling) draw from this wrapper rather than from the
// distribution classes of <random>, whose output is implementation-defined.
// std::mt19937_64's raw sequence is fixed by the standard, so results are
// reproducible across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() {
    return static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
  }

  // Uniform integer in [0, n). Plain modulo; the bias is O(n / 2^64) and
  // irrelevant at the data sizes this engine targets.
  size_t below(size_t n) { return static_cast<size_t>(gen_() % n); }

  // Standard normal via Box-Muller. Draws two uniforms per call and keeps
  // only the cosine branch, so the stream position per draw is fixed.
  double next_gaussian() {
    double u1 = 1.0 - next_unit();  // (0, 1]
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace smm

#endif  // SMM_CORE_RNG_HPP
