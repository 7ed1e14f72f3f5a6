// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>

#include "selfnom/micronet.hpp"
#include "selfnom/policy.hpp"
#include "selfnom/scheduling.hpp"

namespace selfnom {

enum class TrainMethod : std::uint32_t { Do = 0, Pg = 1 };

struct Checkpoint {
  nn::Network network{nn::NetSpec{1, 0, {}, {nn::LayerSpec::dense(1, 1)}}};
  policy::PolicyConfig policy;
  double lambda = 0.0;
  double feature_scale = 1.0;
  std::uint64_t epoch = 0;
  TrainMethod method = TrainMethod::Do;
  sched::SchedulerKind scheduler = sched::SchedulerKind::Random;
  nn::OptimizerKind optimizer = nn::OptimizerKind::Sgd;
  std::uint64_t optimizer_steps = 0;
  Eigen::VectorXd optimizer_m;
  Eigen::VectorXd optimizer_v;
};

// "SNCK", u32 version, network (architecture, parameters, running mean and
// variance), f64 lambda, f64 gamma, then u64 epoch, u32 method, u32
// input_mode, u32 pf_aware, u32 scheduler, f64 feature_scale, u32 optimizer,
// u64 optimizer steps, u64 n, n f64 first moments, n f64 second moments.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws MissingCheckpoint if the file does not exist, FormatError if it is
// malformed.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace selfnom
