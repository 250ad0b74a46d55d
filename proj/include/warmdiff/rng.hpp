#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace warmdiff {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Counter-based uniform source. Every draw is a pure function of
/// (seed, purpose, position, iteration), so enabling or disabling one
/// stochastic feature never shifts the draws seen by another.
class DeterministicRng {
 public:
  constexpr explicit DeterministicRng(std::uint64_t seed) : seed_(seed) {}

  constexpr std::uint64_t seed() const { return seed_; }

  constexpr std::uint64_t bits(std::string_view purpose, std::uint64_t position,
                               std::uint64_t iteration) const {
    std::uint64_t h = detail::splitmix64(seed_ ^ detail::splitmix64(detail::fnv1a(purpose)));
    h = detail::splitmix64(h ^ position);
    h = detail::splitmix64(h ^ (iteration * 0xd1b54a32d192ed03ULL));
    return h;
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  constexpr double draw(std::string_view purpose, std::uint64_t position,
                        std::uint64_t iteration) const {
    return static_cast<double>(bits(purpose, position, iteration) >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). bound must be positive.
  constexpr std::size_t index(std::string_view purpose, std::uint64_t position,
                              std::uint64_t iteration, std::size_t bound) const {
    auto k = static_cast<std::size_t>(draw(purpose, position, iteration) * static_cast<double>(bound));
    return std::min(k, bound - 1);
  }

  /// Inverse-CDF sample from a (not necessarily normalized) non-negative weight vector.
  std::size_t categorical(std::string_view purpose, std::uint64_t position, std::uint64_t iteration,
                          std::span<const double> weights) const {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = draw(purpose, position, iteration) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    // rounding at the top end: last index with positive weight
    for (std::size_t i = weights.size(); i-- > 0;) {
      if (weights[i] > 0.0) return i;
    }
    return 0;
  }

 private:
  std::uint64_t seed_;
};

}  // namespace warmdiff
