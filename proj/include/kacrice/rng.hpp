#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace kacrice {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer; used to derive stream keys.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Standard normal quantile, accurate to a few ulps on (0, 1).
double normal_quantile(double u);

/// Counter-based random stream keyed by (seed, path...).
///
/// Draw `i` of a stream is a pure function of the key and `i`, so results do not
/// depend on the order in which draws are requested or on how work is split
/// across threads.
class KeyedStream {
 public:
  KeyedStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t index) const noexcept;
  /// Standard normal via the inverse CDF of uniform(index).
  double normal(std::uint64_t index) const { return normal_quantile(uniform(index)); }

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
};

/// Sequential cursor over a KeyedStream.
class StreamCursor {
 public:
  explicit StreamCursor(KeyedStream stream, std::uint64_t start = 0) noexcept
      : stream_(stream), next_(start) {}
  double uniform() noexcept { return stream_.uniform(next_++); }
  double normal() { return stream_.normal(next_++); }

 private:
  KeyedStream stream_;
  std::uint64_t next_;
};

}  // namespace kacrice
