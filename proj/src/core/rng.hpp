#ifndef ORDMTL_CORE_RNG_HPP
#define ORDMTL_CORE_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace ordmtl {

// splitmix64 step; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Deterministic RNG wrapper. mt19937_64 supplies the bits; the mappings to
// uniform/normal/int are fixed here rather than delegated to std
// distributions, whose output is implementation-defined. Same seed therefore
// means the same sample sequence on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Box-Muller; second value of each pair is cached.
  double normal(double mean = 0.0, double sd = 1.0);

  // Uniform integer on [lo, hi], inclusive. Rejection sampling, no modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ordmtl

#endif
