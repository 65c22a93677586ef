#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <utility>

namespace wikievents {

// 64-bit FNV-1a. Used wherever a hash must be stable across platforms and
// runs (feature hashing, seed substreams, config fingerprints).
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t Fnv1a64(std::string_view bytes,
                                std::uint64_t state = kFnvOffset) noexcept {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= kFnvPrime;
  }
  return state;
}

// SplitMix64 generator. The standard library distributions are
// implementation-defined, so sampling goes through UniformBelow/Shuffle below
// to keep outputs byte-identical everywhere.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t UniformBelow(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = (*this)();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform real in [0, 1) with 53 bits of precision.
  double UniformUnit() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// Independent generator for a named purpose ("sampling", "split", ...), all
// derived from one run seed.
inline SplitMix64 Substream(std::uint64_t seed, std::string_view name) {
  return SplitMix64(seed ^ Fnv1a64(name));
}

// Fisher-Yates, high index to low.
template <typename T>
void Shuffle(std::span<T> items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.UniformBelow(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace wikievents
