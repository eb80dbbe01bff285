#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rlg {

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;

// Named stream of a global seed; every component draws from its own stream.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view stream) noexcept;

// Per-value stream used by guidance sweeps: seed XOR hash of the IEEE bits of `value`.
std::uint64_t seed_for_value(std::uint64_t base_seed, double value) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace rlg
