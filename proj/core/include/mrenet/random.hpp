#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace mrenet {

/// Seeded random stream. The engine is std::mt19937_64, whose output sequence
/// is fixed by the standard; the distributions below are written out here
/// because the std:: ones are implementation-defined, and seeded runs must be
/// byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on {0, ..., n - 1}; unbiased (rejection sampling).
  std::size_t index(std::size_t n);

  /// Uniform on {lo, ..., hi}.
  long integer(long lo, long hi);

  /// Standard normal (polar Box-Muller).
  double normal();

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent child seed from (seed, a, b) with splitmix64 mixing.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace mrenet
