#include "pwgf/rng.hpp"

namespace pwgf {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream RngStream::child(std::uint64_t index) const {
  return RngStream(seed_, splitmix64(splitmix64(stream_) ^ (index + 1)));
}

UniformSource::UniformSource(const RngStream& rng) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(rng.seed()), hi(rng.seed()), lo(rng.stream()), hi(rng.stream())};
  engine_.seed(seq);
}

}  // namespace pwgf
