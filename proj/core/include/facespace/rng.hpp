#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace facespace {

/// Stream tags used when fanning a single seed out to independent substreams.
/// A substream is keyed by (seed, tag, index); the tag names the consumer.
enum class StreamTag : std::uint64_t {
  IdentityDirections = 1,
  ConditionAxes = 2,
  RowNoise = 3,
  TsneInit = 4,
  TsneJitter = 5,
  FoldShuffle = 6,
  Permutation = 7,
  Reservoir = 8,
  LabelShuffle = 9,
};

/// Seedable 64-bit generator with portable output.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Distributions are implemented here rather than taken from
/// <random> because the standard leaves their algorithms unspecified.
///
/// Stream splitting: `Rng::substream(seed, tag, index)` seeds a fresh engine
/// with splitmix64(splitmix64(seed ^ tag) ^ index). Rows of a synthetic
/// dataset, permutation replicates and similar units of parallel work each
/// draw from their own substream, so results do not depend on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via the Box-Muller transform.
  double normal();

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      std::iter_swap(first + (i - 1), first + j);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace facespace
