#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace specstop {

/// Counter-based 64-bit generator: the i-th output is splitmix64(key + i * golden).
///
/// Constants are the ones published with SplitMix64 (Steele, Lea, Flood 2014):
///   golden gamma 0x9E3779B97F4A7C15,
///   finalizer multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB,
///   shifts 30, 27, 31.
/// Because every output is a pure function of (key, counter) the stream can be
/// split and replayed on any platform, and it satisfies
/// UniformRandomBitGenerator for use with <algorithm>.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the sine branch is cached.
  double standard_normal() noexcept;

  /// +1 or -1 with equal probability.
  double rademacher() noexcept { return ((*this)() >> 63) ? 1.0 : -1.0; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Order-dependent combination of two 64-bit words.
constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
  return CounterRng::mix(seed ^ CounterRng::mix(value + CounterRng::kGolden + (seed << 6) + (seed >> 2)));
}

/// FNV-1a over the bytes of a label; used to give named rules stable ids.
constexpr std::uint64_t label_hash(std::string_view label) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed of an independent stream for replication `index` under `master`.
constexpr std::uint64_t derive_stream(std::uint64_t master, std::uint64_t index) noexcept {
  return hash_combine(master, index);
}

}  // namespace specstop
