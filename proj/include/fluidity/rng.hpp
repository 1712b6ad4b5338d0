#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace fluidity {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

/// Seed for one request in one chain. Keyed by (run seed, chain id, step) so
/// chains can run in any order or on any thread without perturbing results.
std::uint64_t stream_seed(std::uint64_t run_seed, std::string_view chain_id, std::uint64_t step);

/// mt19937_64 with platform-independent draws. The standard distributions are
/// implementation-defined, so they are avoided on purpose.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  /// Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fluidity
