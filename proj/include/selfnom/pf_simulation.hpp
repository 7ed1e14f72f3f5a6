// SPDX-License-Identifier: Apache-2.0
//
// Time-slotted proportional-fair loop: per slot fresh block-fading channels,
// UE feedback decisions, greedy PF scheduling, ZF rates and running-average
// weight updates.
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "selfnom/channel_gen.hpp"
#include "selfnom/evaluation.hpp"
#include "selfnom/scheduling.hpp"

namespace selfnom::pf {

using mimo::ChannelVector;
using mimo::UeId;

struct PfRunConfig {
  std::size_t slots = 100;  // T
  double epsilon = 10.0;
  std::size_t layouts = 1;
  std::size_t m_max = 1;
  double total_power = 1.0;
  double noise_power = 1.0;
  std::uint64_t seed = 0;
  bool keep_trace = false;
  void validate() const;
};

class ChannelSource {
 public:
  virtual ~ChannelSource() = default;
  virtual std::size_t num_ues() const = 0;
  virtual int num_antennas() const = 0;
  // Channels of all UEs in `layout` during slot t. Must be a pure function
  // of (layout, t).
  virtual std::vector<ChannelVector> slot(std::size_t layout, std::uint64_t t) const = 0;
};

// UE positions drawn once per layout with stream (seed, kLayout, layout, k);
// cluster gains redrawn each slot with stream (seed, kSmallScale, layout, t, k).
class LayoutChannelSource : public ChannelSource {
 public:
  LayoutChannelSource(channel::ChannelModel model, std::size_t num_ues, std::size_t num_layouts,
                      std::uint64_t seed);
  std::size_t num_ues() const override { return num_ues_; }
  int num_antennas() const override { return model_.geometry().num_antennas(); }
  std::vector<ChannelVector> slot(std::size_t layout, std::uint64_t t) const override;

 private:
  channel::ChannelModel model_;
  std::size_t num_ues_;
  std::uint64_t seed_;
  std::vector<std::vector<channel::UeLayout>> layouts_;
};

// The same channels in every slot and layout.
class StaticChannelSource : public ChannelSource {
 public:
  explicit StaticChannelSource(std::vector<ChannelVector> channels);
  std::size_t num_ues() const override { return channels_.size(); }
  int num_antennas() const override;
  std::vector<ChannelVector> slot(std::size_t, std::uint64_t) const override { return channels_; }

 private:
  std::vector<ChannelVector> channels_;
};

struct SlotTrace {
  std::vector<UeId> nominated;
  std::vector<UeId> scheduled;
  std::vector<double> rates;  // per UE, 0 when unscheduled
};

struct PfRunReport {
  std::vector<std::vector<double>> mean_rate;             // [layout][ue], (1/T) sum_t R_k[t]
  std::vector<std::vector<std::uint64_t>> times_scheduled;  // [layout][ue]
  double mean_feedback_count = 0.0;                       // per slot, over layouts
  std::vector<std::vector<SlotTrace>> trace;              // [layout][t] if keep_trace
};

// Layouts run in parallel; feedback draws use stream (seed, kFeedback, layout, t).
// Throws CheckpointMismatch when a self-nomination policy has no weight branch.
PfRunReport run_pf(const PfRunConfig& config, const ChannelSource& source,
                   const eval::FeedbackPolicy& policy, std::size_t workers = 1);

// Empirical CDF over all UEs and layouts: sorted (rate, fraction <= rate).
std::vector<std::pair<double, double>> rate_cdf(const PfRunReport& report);

struct LogUtility {
  double value = 0.0;  // mean over layouts of sum_k ln mean_rate; -inf if starved
  bool starved = false;
  std::vector<std::pair<std::size_t, UeId>> starved_ues;  // (layout, ue)
};
LogUtility log_utility(const PfRunReport& report);

}  // namespace selfnom::pf
