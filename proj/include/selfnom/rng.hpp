// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace selfnom {

using RngStream = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream addressed by (seed, path...). Every random draw in the
// library goes through a stream keyed by the logical index of the thing being
// drawn, never by worker or iteration order, so results do not depend on how
// work is partitioned.
inline RngStream make_stream(std::uint64_t seed,
                             std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return RngStream(seq);
}

// Domain tags keep streams for different purposes disjoint.
namespace stream_tag {
inline constexpr std::uint64_t kLayout = 1;
inline constexpr std::uint64_t kSmallScale = 2;
inline constexpr std::uint64_t kSetDraw = 3;
inline constexpr std::uint64_t kInit = 4;
inline constexpr std::uint64_t kShuffle = 5;
inline constexpr std::uint64_t kDecision = 6;
inline constexpr std::uint64_t kScheduler = 7;
inline constexpr std::uint64_t kPfWeight = 8;
inline constexpr std::uint64_t kDualDecision = 9;
inline constexpr std::uint64_t kNormalization = 10;
inline constexpr std::uint64_t kFeedback = 11;
inline constexpr std::uint64_t kStatsWeight = 12;
}  // namespace stream_tag

inline double uniform01(RngStream& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace selfnom
