#pragma once

#include <cstdint>
#include <random>

namespace pwgf {

/// A reproducible random stream identified by (seed, stream id).
///
/// RngStream is a plain value: every operation that consumes randomness
/// builds its own engine from it, so identical streams always reproduce
/// identical draws. Independent sub-streams are derived with child().
class RngStream {
 public:
  constexpr explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  constexpr std::uint64_t seed() const { return seed_; }
  constexpr std::uint64_t stream() const { return stream_; }

  /// Derived stream for sub-task `index` (iteration, coordinate, replicate).
  RngStream child(std::uint64_t index) const;

  friend constexpr bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// Engine instantiated from an RngStream. Uniform variates are produced from
/// the raw 64-bit output so draws do not depend on the standard library's
/// distribution implementations.
class UniformSource {
 public:
  explicit UniformSource(const RngStream& rng);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pwgf
