// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "selfnom/channel_gen.hpp"

namespace selfnom::channel {

struct DatasetSpec {
  std::size_t pool_size = 0;
  std::size_t num_sets = 0;
  std::size_t users_per_set = 0;
  // Default split is 6:1 train:test over num_sets.
  std::optional<std::size_t> num_train;
  std::optional<std::size_t> num_test;
  std::uint64_t seed = 0;
};

struct Dataset {
  int num_antennas = 0;
  std::size_t users_per_set = 0;
  std::vector<ChannelVector> pool;
  std::vector<std::vector<mimo::UeId>> sets;  // pool indices
  std::size_t num_train = 0;                  // sets [0, num_train)
  std::size_t num_test = 0;                   // sets [num_train, num_train + num_test)

  std::span<const std::vector<mimo::UeId>> train_sets() const {
    return std::span(sets).subspan(0, num_train);
  }
  std::span<const std::vector<mimo::UeId>> test_sets() const {
    return std::span(sets).subspan(num_train, num_test);
  }
  // Channels of one set, in set order (UE id k is position k).
  std::vector<ChannelVector> gather(std::span<const mimo::UeId> set) const;
};

// Pool entry i uses stream (seed, kLayout, i); set j uses (seed, kSetDraw, j).
// Throws InvalidSplit if num_train + num_test > num_sets.
Dataset build_dataset(const DatasetSpec& spec, const ChannelModel& model,
                      std::size_t workers = 1);

// Binary little-endian: "SNCH", u32 version, u32 N, u32 pool_size,
// u32 num_sets, u32 users_per_set, u32 num_train, u32 num_test, then pool as
// interleaved (re, im) f64, then set indices as u32.
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace selfnom::channel
