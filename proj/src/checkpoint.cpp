// SPDX-License-Identifier: Apache-2.0

#include "selfnom/checkpoint.hpp"

#include <fstream>

#include "selfnom/binary_io.hpp"
#include "selfnom/errors.hpp"

namespace selfnom {
namespace {

constexpr char kMagic[5] = "SNCK";
constexpr std::uint32_t kVersion = 1;

template <typename E>
E enum_from(std::uint32_t v, std::uint32_t max, const char* what) {
  if (v > max) throw FormatError(std::string("checkpoint: bad ") + what);
  return static_cast<E>(v);
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  io::put_magic(os, kMagic);
  io::put<std::uint32_t>(os, kVersion);
  nn::write_network(os, ckpt.network);
  io::put<double>(os, ckpt.lambda);
  io::put<double>(os, ckpt.policy.gamma);
  io::put<std::uint64_t>(os, ckpt.epoch);
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.method));
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.policy.input_mode));
  io::put<std::uint32_t>(os, ckpt.policy.pf_aware ? 1 : 0);
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.scheduler));
  io::put<double>(os, ckpt.feature_scale);
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.optimizer));
  io::put<std::uint64_t>(os, ckpt.optimizer_steps);
  io::put<std::uint64_t>(os, static_cast<std::uint64_t>(ckpt.optimizer_m.size()));
  for (double v : ckpt.optimizer_m) io::put<double>(os, v);
  for (double v : ckpt.optimizer_v) io::put<double>(os, v);
  if (!os) throw Error("write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingCheckpoint("checkpoint not found: " + path.string());
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingCheckpoint("cannot open checkpoint: " + path.string());
  io::expect_magic(is, kMagic);
  if (io::get<std::uint32_t>(is) != kVersion) throw FormatError("checkpoint: unsupported version");
  Checkpoint c;
  c.network = nn::read_network(is);
  c.lambda = io::get<double>(is);
  c.policy.gamma = io::get<double>(is);
  c.epoch = io::get<std::uint64_t>(is);
  c.method = enum_from<TrainMethod>(io::get<std::uint32_t>(is), 1, "method");
  c.policy.input_mode = enum_from<policy::InputMode>(io::get<std::uint32_t>(is), 1, "input mode");
  c.policy.pf_aware = io::get<std::uint32_t>(is) != 0;
  c.scheduler = enum_from<sched::SchedulerKind>(io::get<std::uint32_t>(is), 3, "scheduler");
  c.feature_scale = io::get<double>(is);
  c.optimizer = enum_from<nn::OptimizerKind>(io::get<std::uint32_t>(is), 2, "optimizer");
  c.optimizer_steps = io::get<std::uint64_t>(is);
  const auto n = io::get<std::uint64_t>(is);
  if (n != 0 && n != static_cast<std::uint64_t>(c.network.parameters().size()))
    throw FormatError("checkpoint: optimizer state size mismatch");
  c.optimizer_m.resize(static_cast<Eigen::Index>(n));
  c.optimizer_v.resize(static_cast<Eigen::Index>(n));
  for (auto& v : c.optimizer_m) v = io::get<double>(is);
  for (auto& v : c.optimizer_v) v = io::get<double>(is);
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("checkpoint: trailing bytes");
  c.policy.validate();
  return c;
}

}  // namespace selfnom
