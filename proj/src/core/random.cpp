#include "rlg/core/random.hpp"

#include <bit>

namespace rlg {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view stream) noexcept {
  return splitmix64(global_seed ^ fnv1a64(stream));
}

std::uint64_t seed_for_value(std::uint64_t base_seed, double value) noexcept {
  return base_seed ^ splitmix64(std::bit_cast<std::uint64_t>(value));
}

}  // namespace rlg
