// SPDX-License-Identifier: Apache-2.0
//
// BS-side user selection over the self-nominated set, and the PF running
// average that produces per-UE weights.
#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "selfnom/mimo_core.hpp"
#include "selfnom/rng.hpp"

namespace selfnom::sched {

using mimo::ChannelVector;
using mimo::UeId;

enum class SchedulerKind { Random, Opportunistic, Sus, Pf };

std::string_view to_string(SchedulerKind k);
SchedulerKind scheduler_from_string(std::string_view s);

struct Schedule {
  std::vector<UeId> selected;
  SchedulerKind method = SchedulerKind::Random;
};

inline constexpr double kDefaultSusAlpha = 0.3;

// All schedulers take the nominated ids `candidates` and the full channel
// array of the instance, indexed by UE id.

// Uniform M-subset when |K| > M, otherwise K (in candidate order).
Schedule random_schedule(std::span<const UeId> candidates, std::size_t m_max, RngStream& rng);

// The M largest |h|^2, ties to the lower id, returned strongest first.
Schedule opportunistic_schedule(std::span<const UeId> candidates,
                                std::span<const ChannelVector> channels, std::size_t m_max);

// Semi-orthogonal user selection: repeatedly take the candidate with the
// largest component orthogonal to the span of the selected channels, then
// drop candidates whose normalized correlation with it exceeds alpha.
Schedule sus_schedule(std::span<const UeId> candidates, std::span<const ChannelVector> channels,
                      std::size_t m_max, double alpha = kDefaultSusAlpha);

// Greedy weighted sum-rate: grow the set one user at a time while the best
// addition strictly improves sum_m w_m R_m under ZF. A rank-deficient
// tentative set counts as no improvement. `weights` is indexed by UE id.
Schedule pf_schedule(std::span<const UeId> candidates, std::span<const ChannelVector> channels,
                     std::size_t m_max, std::span<const double> weights, double total_power,
                     double noise_power);

struct SchedulerParams {
  SchedulerKind kind = SchedulerKind::Random;
  std::size_t m_max = 1;
  double sus_alpha = kDefaultSusAlpha;
  double total_power = 1.0;  // used by Pf
  double noise_power = 1.0;  // used by Pf
};

// Dispatch on params.kind. `weights` (by UE id) is only read by Pf and `rng`
// only by Random.
Schedule run_scheduler(const SchedulerParams& params, std::span<const UeId> candidates,
                       std::span<const ChannelVector> channels, std::span<const double> weights,
                       RngStream& rng);

// Weight given to a UE whose running average has decayed to (numerically)
// zero, which happens with epsilon = 1 after a single unscheduled slot.
inline constexpr double kMaxPfWeight = 1e9;

struct PfState {
  std::vector<double> rbar;  // running average spectral efficiency per UE
  double epsilon = 1.0;      // memory length, >= 1
  std::uint64_t t = 1;

  static PfState initial(std::size_t num_ues, double epsilon, double rbar0 = 1.0);
  // w_k = 1 / rbar_k, capped at kMaxPfWeight.
  std::vector<double> weights() const;
};

// rbar <- (1 - 1/eps) rbar + (1/eps) R; unscheduled users pass R = 0.
PfState update_running_avg(PfState state, std::span<const double> rates);

}  // namespace selfnom::sched
