// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "selfnom/checkpoint.hpp"
#include "selfnom/errors.hpp"

using namespace selfnom;

namespace {

std::filesystem::path tmp(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("selfnom_ckpt_" + name);
}

Checkpoint sample() {
  Checkpoint c;
  c.policy.gamma = 7.5;
  c.policy.input_mode = policy::InputMode::FullCsi;
  c.policy.pf_aware = true;
  c.network = nn::Network::initialized(policy::default_architecture(c.policy, 4), 12);
  Eigen::VectorXd mean = c.network.running_mean(), var = c.network.running_var();
  mean.setConstant(0.25);
  var.setConstant(1.75);
  c.network.set_running_stats(mean, var);
  c.lambda = 0.125;
  c.feature_scale = 0.3;
  c.epoch = 17;
  c.method = TrainMethod::Pg;
  c.scheduler = sched::SchedulerKind::Sus;
  c.optimizer = nn::OptimizerKind::Adam;
  c.optimizer_steps = 99;
  c.optimizer_m = Eigen::VectorXd::LinSpaced(c.network.parameters().size(), -1.0, 1.0);
  c.optimizer_v = c.optimizer_m.cwiseAbs();
  return c;
}

}  // namespace

TEST_CASE("checkpoint round trip") {
  const Checkpoint c = sample();
  const auto path = tmp("rt.snck");
  write_checkpoint(path, c);
  const Checkpoint b = read_checkpoint(path);
  CHECK(b.network.spec() == c.network.spec());
  CHECK(b.network.parameters() == c.network.parameters());
  CHECK(b.network.running_mean() == c.network.running_mean());
  CHECK(b.network.running_var() == c.network.running_var());
  CHECK(b.policy.gamma == c.policy.gamma);
  CHECK(b.policy.input_mode == c.policy.input_mode);
  CHECK(b.policy.pf_aware == c.policy.pf_aware);
  CHECK(b.lambda == c.lambda);
  CHECK(b.feature_scale == c.feature_scale);
  CHECK(b.epoch == c.epoch);
  CHECK(b.method == c.method);
  CHECK(b.scheduler == c.scheduler);
  CHECK(b.optimizer == c.optimizer);
  CHECK(b.optimizer_steps == c.optimizer_steps);
  CHECK(b.optimizer_m == c.optimizer_m);
  CHECK(b.optimizer_v == c.optimizer_v);
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint errors") {
  CHECK_THROWS_AS(read_checkpoint(tmp("does_not_exist.snck")), MissingCheckpoint);
  const auto path = tmp("bad.snck");
  {
    std::ofstream os(path, std::ios::binary);
    os << "SNCHxxxxxxxx";
  }
  CHECK_THROWS_AS(read_checkpoint(path), FormatError);
  write_checkpoint(path, sample());
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 3);
  CHECK_THROWS_AS(read_checkpoint(path), FormatError);
  {
    std::ofstream os(path, std::ios::binary | std::ios::app);
    os << "trailing garbage";
  }
  CHECK_THROWS_AS(read_checkpoint(path), FormatError);
  std::filesystem::remove(path);
}
