// SPDX-License-Identifier: Apache-2.0
//
// Primal-dual training of the shared self-nomination network under an
// average feedback budget: direct optimization through a straight-through
// threshold, or a Bernoulli policy trained with the log-derivative estimator.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "selfnom/checkpoint.hpp"
#include "selfnom/dataset.hpp"
#include "selfnom/micronet.hpp"
#include "selfnom/policy.hpp"
#include "selfnom/scheduling.hpp"

namespace selfnom::train {

using mimo::ChannelVector;

struct TrainConfig {
  double n_fb = 1.0;
  std::size_t m_max = 1;
  std::size_t total_ues = 1;
  TrainMethod method = TrainMethod::Do;
  sched::SchedulerKind scheduler = sched::SchedulerKind::Random;
  double sus_alpha = sched::kDefaultSusAlpha;
  policy::PolicyConfig policy;  // policy.pf_aware: PF training with U[0, 1] weights
  double alpha_p = 1e-3;
  double alpha_d = 1e-2;
  std::size_t batch_size = 128;
  std::size_t epochs = 1;
  double total_power = 1.0;
  double noise_power = 1.0;
  std::uint64_t seed = 0;
  bool baseline = false;  // subtract the batch-mean score (PG only)
  nn::OptimizerKind optimizer = nn::OptimizerKind::Sgd;
  double lambda0 = 0.0;

  void validate() const;
};

struct MetricsRow {
  std::uint64_t epoch = 0;
  std::uint64_t batch = 0;
  double rate_term = 0.0;
  double constraint_term = 0.0;
  double mean_feedback_count = 0.0;
  double lambda = 0.0;
  double wall_time_ms = 0.0;
};

struct TrainerState {
  TrainerState(nn::Network net, nn::Optimizer opt) : network(std::move(net)), optimizer(std::move(opt)) {}

  nn::Network network;
  nn::Optimizer optimizer;
  double lambda = 0.0;
  double feature_scale = 1.0;
  std::uint64_t epoch = 0;  // completed epochs
  std::uint64_t batches = 0;
  std::uint64_t rank_deficient_batches = 0;
  std::vector<MetricsRow> history;
};

// DO training starts with this final dense bias so that every UE nominates
// itself; with no nominations the rate term has no gradient.
inline constexpr double kInitialOutputBias = 1.0;

TrainerState initial_state(const TrainConfig& config, int num_antennas, double feature_scale);
// Throws ConfigMismatch if the checkpoint's policy, method or architecture
// disagrees with the config.
TrainerState resume_state(const Checkpoint& ckpt, const TrainConfig& config, int num_antennas);
Checkpoint to_checkpoint(const TrainerState& state, const TrainConfig& config);

struct LagrangianTerms {
  double rate_term = 0.0;        // batch mean weighted sum rate
  double constraint_term = 0.0;  // batch mean of sum_k a_k - n_fb
  double value = 0.0;            // rate_term - lambda * constraint_term
};
LagrangianTerms lagrangian_terms(std::span<const double> sum_rates,
                                 std::span<const double> feedback_counts, double lambda,
                                 double n_fb);

// One mini-batch of channel sets. weights[s] holds per-UE weights of sample
// s, or is empty for unit weights. (epoch, index) address the random streams.
struct TrainBatch {
  std::vector<std::vector<ChannelVector>> channels;
  std::vector<std::vector<double>> weights;
  std::uint64_t epoch = 0;
  std::uint64_t index = 0;
  std::size_t size() const { return channels.size(); }
};

struct SampleOutcome {
  std::vector<mimo::UeId> nominated;
  sched::Schedule schedule;
  mimo::RateReport rates;  // aligned with schedule.selected
  double weighted_sum_rate = 0.0;
  bool rank_deficient = false;
};

// BS side for one channel set: nominated ids -> scheduler -> ZF -> rates.
// A rank-deficient schedule scores 0.
SampleOutcome evaluate_sample(std::span<const ChannelVector> channels, std::span<const int> a,
                              std::span<const double> weights_by_ue, const TrainConfig& config,
                              RngStream& scheduler_rng);

// Network inputs for a batch: one column per (sample, UE), sample-major.
Eigen::MatrixXd batch_features(const TrainBatch& batch, const policy::PolicyConfig& policy,
                               double feature_scale);
Eigen::MatrixXd batch_side(const TrainBatch& batch);

struct StepResult {
  LagrangianTerms terms;
  double mean_feedback_count = 0.0;
  std::size_t rank_deficient = 0;  // samples
  nn::Gradient gradient;           // ascent direction of the Lagrangian
};

// Deterministic decisions; rate gradient through scheduled users only,
// constraint gradient through every UE, both via the straight-through
// derivative. Takes one descent step on lambda * constraint - rate.
StepResult primal_step_do(TrainerState& state, const TrainBatch& batch, const TrainConfig& config,
                          std::size_t workers = 1);
// One sampled joint action per channel set; ascent step on the
// score-weighted sum of log-probability gradients.
StepResult primal_step_pg(TrainerState& state, const TrainBatch& batch, const TrainConfig& config,
                          std::size_t workers = 1);

// max(0, lambda + alpha_d (mean_count - n_fb))
double dual_step(double lambda, double mean_feedback_count, double n_fb, double alpha_d);

// Mean feedback count of the current parameters on a batch (train-mode
// statistics, decisions sampled for PG). Leaves the network in train mode.
double batch_feedback_count(TrainerState& state, const TrainBatch& batch,
                            const TrainConfig& config);

// Re-estimates the batch-norm running statistics at the current parameters
// from train-mode passes over the training sets, in dataset order. Parameters
// are untouched. train() calls this at the end of every epoch.
void refresh_batch_statistics(TrainerState& state, const TrainConfig& config,
                              const channel::Dataset& dataset);

struct TrainOptions {
  std::size_t workers = 1;
  bool record_wall_time = false;
};

// Runs epochs [state.epoch, config.epochs). Throws ConfigMismatch when the
// dataset does not match the config.
void train(TrainerState& state, const TrainConfig& config, const channel::Dataset& dataset,
           const TrainOptions& options = {});

}  // namespace selfnom::train
