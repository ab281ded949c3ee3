#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vhjb {

/// Splits one run seed into independent, reproducible named streams
/// ("init", "sampling", "audit", ...).
class SeedStreams {
 public:
  explicit SeedStreams(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::mt19937_64 stream(std::string_view name) const {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (char c : name) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return std::mt19937_64(seq);
  }

 private:
  std::uint64_t seed_;
};

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace vhjb
