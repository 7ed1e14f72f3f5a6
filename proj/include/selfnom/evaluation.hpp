// SPDX-License-Identifier: Apache-2.0
//
// Test-split evaluation of feedback policy + scheduler + ZF combinations.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "selfnom/checkpoint.hpp"
#include "selfnom/dataset.hpp"
#include "selfnom/scheduling.hpp"

namespace selfnom::eval {

using mimo::ChannelVector;

enum class FeedbackKind { All, Random, LimitedAll, SelfNomination };
std::string_view to_string(FeedbackKind k);
FeedbackKind feedback_from_string(std::string_view s);

struct FeedbackPolicy {
  FeedbackKind kind = FeedbackKind::All;
  double prob = 0.5;        // Random
  std::size_t n_fb = 0;     // LimitedAll
  std::shared_ptr<const Checkpoint> checkpoint;  // SelfNomination

  static FeedbackPolicy all() { return {}; }
  static FeedbackPolicy random(double prob) { return {FeedbackKind::Random, prob, 0, nullptr}; }
  static FeedbackPolicy limited_all(std::size_t n_fb) { return {FeedbackKind::LimitedAll, 0.5, n_fb, nullptr}; }
  static FeedbackPolicy self_nomination(std::shared_ptr<const Checkpoint> ckpt) {
    return {FeedbackKind::SelfNomination, 0.5, 0, std::move(ckpt)};
  }
};

// Per-UE feedback bits for one channel set. Self-nomination runs the network
// in eval mode; a PG-trained network samples its Bernoulli policy from `rng`,
// a DO-trained one thresholds. `weights` must be given iff the network is
// pf-aware (throws MissingWeight otherwise).
std::vector<int> decide_feedback(const FeedbackPolicy& policy, std::span<const ChannelVector> channels,
                                 std::span<const double> weights, RngStream& rng);

struct EvalSetup {
  sched::SchedulerParams scheduler;
  std::uint64_t seed = 0;
};

struct EvalResult {
  std::size_t num_sets = 0;
  double sum_rate_mean = 0.0;
  double sum_rate_ci95 = 0.0;  // half-width, normal approximation
  double feedback_count_mean = 0.0;
  // Mean of cond(H) over sets with a non-empty schedule and finite
  // condition number.
  double condition_number_mean = 0.0;
  std::size_t rank_deficient = 0;
};

// Set j uses feedback stream (seed, kFeedback, j) and scheduler stream
// (seed, kScheduler, j).
EvalResult evaluate(const channel::Dataset& dataset, std::span<const std::vector<mimo::UeId>> sets,
                    const FeedbackPolicy& policy, const EvalSetup& setup, std::size_t workers = 1);

}  // namespace selfnom::eval
