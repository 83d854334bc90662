#pragma once

#include <cstdint>
#include <random>

namespace mspec {

// splitmix64 finalizer; also used to derive independent substreams.
uint64_t mix_seed(uint64_t x);

// Deterministic substream derivation: derive_seed(s, k) != derive_seed(s, k')
// for k != k' with overwhelming probability, and the mapping is pure.
uint64_t derive_seed(uint64_t base, uint64_t stream);

// Seeded generator used for all randomness in the library. The engine is
// mt19937_64 (bit-exact across platforms per the standard); the uniform and
// normal transforms are implemented here rather than with std distributions,
// whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(mix_seed(seed)) {}

  uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  double normal(double mean, double stddev);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mspec
