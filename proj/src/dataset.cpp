// SPDX-License-Identifier: Apache-2.0

#include "selfnom/dataset.hpp"

#include <fstream>
#include <algorithm>
#include <stdexcept>

#include "selfnom/binary_io.hpp"
#include "selfnom/errors.hpp"
#include "selfnom/parallel.hpp"

namespace selfnom::channel {
namespace {
constexpr std::uint32_t kDatasetVersion = 1;
}

std::vector<ChannelVector> Dataset::gather(std::span<const mimo::UeId> set) const {
  std::vector<ChannelVector> out;
  out.reserve(set.size());
  for (auto i : set) out.push_back(pool.at(i));
  return out;
}

Dataset build_dataset(const DatasetSpec& spec, const ChannelModel& model, std::size_t workers) {
  if (spec.users_per_set < 1 || spec.users_per_set > spec.pool_size)
    throw std::invalid_argument("build_dataset: need 1 <= users_per_set <= pool_size");
  std::size_t train = spec.num_train.value_or(spec.num_sets * 6 / 7);
  std::size_t test = spec.num_test.value_or(spec.num_sets - std::min(train, spec.num_sets));
  if (train + test > spec.num_sets)
    throw InvalidSplit("build_dataset: train + test exceeds num_sets");

  Dataset d;
  d.num_antennas = model.geometry().num_antennas();
  d.users_per_set = spec.users_per_set;
  d.num_train = train;
  d.num_test = test;
  d.pool.resize(spec.pool_size);
  d.sets.resize(spec.num_sets);
  parallel_for(spec.pool_size, workers, [&](std::size_t i) {
    RngStream rng = make_stream(spec.seed, {stream_tag::kLayout, i});
    d.pool[i] = model.generate(rng);
  });
  parallel_for(spec.num_sets, workers, [&](std::size_t j) {
    RngStream rng = make_stream(spec.seed, {stream_tag::kSetDraw, j});
    // Floyd's algorithm: a uniform k-subset without touching the whole pool.
    auto& set = d.sets[j];
    set.clear();
    set.reserve(spec.users_per_set);
    const std::size_t n = spec.pool_size;
    for (std::size_t m = n - spec.users_per_set; m < n; ++m) {
      const auto t = static_cast<mimo::UeId>(std::uniform_int_distribution<std::size_t>(0, m)(rng));
      const bool seen = std::find(set.begin(), set.end(), t) != set.end();
      set.push_back(seen ? static_cast<mimo::UeId>(m) : t);
    }
  });
  return d;
}

void write_dataset(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  io::put_magic(os, "SNCH");
  io::put<std::uint32_t>(os, kDatasetVersion);
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(d.num_antennas));
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(d.pool.size()));
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(d.sets.size()));
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(d.users_per_set));
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(d.num_train));
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(d.num_test));
  for (const auto& h : d.pool)
    for (const auto& v : h) {
      io::put<double>(os, v.real());
      io::put<double>(os, v.imag());
    }
  for (const auto& s : d.sets)
    for (auto i : s) io::put<std::uint32_t>(os, i);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  io::expect_magic(is, "SNCH");
  if (io::get<std::uint32_t>(is) != kDatasetVersion) throw FormatError("unsupported SNCH version");
  Dataset d;
  d.num_antennas = static_cast<int>(io::get<std::uint32_t>(is));
  const std::size_t pool_size = io::get<std::uint32_t>(is);
  const std::size_t num_sets = io::get<std::uint32_t>(is);
  d.users_per_set = io::get<std::uint32_t>(is);
  d.num_train = io::get<std::uint32_t>(is);
  d.num_test = io::get<std::uint32_t>(is);
  if (d.num_train + d.num_test > num_sets) throw InvalidSplit("SNCH: split exceeds num_sets");
  d.pool.assign(pool_size, ChannelVector(d.num_antennas));
  for (auto& h : d.pool)
    for (auto& v : h) {
      const double re = io::get<double>(is);
      const double im = io::get<double>(is);
      v = {re, im};
    }
  d.sets.assign(num_sets, std::vector<mimo::UeId>(d.users_per_set));
  for (auto& s : d.sets)
    for (auto& i : s) {
      i = io::get<std::uint32_t>(is);
      if (i >= pool_size) throw FormatError("SNCH: set index out of range");
    }
  return d;
}

}  // namespace selfnom::channel
