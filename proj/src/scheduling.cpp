// SPDX-License-Identifier: Apache-2.0

#include "selfnom/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "selfnom/errors.hpp"

namespace selfnom::sched {

std::string_view to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::Random: return "random";
    case SchedulerKind::Opportunistic: return "opportunistic";
    case SchedulerKind::Sus: return "sus";
    case SchedulerKind::Pf: return "pf";
  }
  return "?";
}

SchedulerKind scheduler_from_string(std::string_view s) {
  if (s == "random") return SchedulerKind::Random;
  if (s == "opportunistic") return SchedulerKind::Opportunistic;
  if (s == "sus") return SchedulerKind::Sus;
  if (s == "pf") return SchedulerKind::Pf;
  throw std::invalid_argument("unknown scheduler: " + std::string(s));
}

Schedule random_schedule(std::span<const UeId> candidates, std::size_t m_max, RngStream& rng) {
  Schedule s{{candidates.begin(), candidates.end()}, SchedulerKind::Random};
  if (s.selected.size() <= m_max) return s;
  for (std::size_t i = 0; i < m_max; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, s.selected.size() - 1);
    std::swap(s.selected[i], s.selected[pick(rng)]);
  }
  s.selected.resize(m_max);
  return s;
}

Schedule opportunistic_schedule(std::span<const UeId> candidates,
                                std::span<const ChannelVector> channels, std::size_t m_max) {
  std::vector<std::pair<double, UeId>> order;
  order.reserve(candidates.size());
  for (UeId k : candidates) order.emplace_back(channels[k].squaredNorm(), k);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  Schedule s{{}, SchedulerKind::Opportunistic};
  for (std::size_t i = 0; i < std::min(m_max, order.size()); ++i) s.selected.push_back(order[i].second);
  return s;
}

Schedule sus_schedule(std::span<const UeId> candidates, std::span<const ChannelVector> channels,
                      std::size_t m_max, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("sus_schedule: alpha must be in (0, 1)");
  Schedule s{{}, SchedulerKind::Sus};
  std::vector<UeId> pool(candidates.begin(), candidates.end());
  std::sort(pool.begin(), pool.end());
  std::vector<ChannelVector> basis;  // orthonormal basis of selected channels
  while (s.selected.size() < m_max && !pool.empty()) {
    double best = -1.0;
    std::size_t best_i = 0;
    ChannelVector best_g;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      ChannelVector g = channels[pool[i]];
      for (const auto& q : basis) g -= q * q.dot(g);
      const double nrm = g.norm();
      if (nrm > best) {
        best = nrm;
        best_i = i;
        best_g = std::move(g);
      }
    }
    if (!(best > 0.0)) break;
    const UeId chosen = pool[best_i];
    s.selected.push_back(chosen);
    basis.push_back(best_g / best);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best_i));

    const ChannelVector& hc = channels[chosen];
    const double nc = hc.norm();
    std::erase_if(pool, [&](UeId k) {
      const double nk = channels[k].norm();
      if (nk == 0.0) return true;
      return std::abs(channels[k].dot(hc)) / (nk * nc) > alpha;
    });
  }
  return s;
}

Schedule pf_schedule(std::span<const UeId> candidates, std::span<const ChannelVector> channels,
                     std::size_t m_max, std::span<const double> weights, double total_power,
                     double noise_power) {
  Schedule s{{}, SchedulerKind::Pf};
  std::vector<UeId> pool(candidates.begin(), candidates.end());
  std::sort(pool.begin(), pool.end());
  const std::size_t n_ant = channels.empty() ? 0 : static_cast<std::size_t>(channels[0].size());
  double current = 0.0;
  std::vector<UeId> trial;
  while (s.selected.size() < std::min(m_max, n_ant) && !pool.empty()) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_i = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      trial = s.selected;
      trial.push_back(pool[i]);
      double value;
      try {
        value = mimo::evaluate_selection(channels, trial, total_power, noise_power, weights)
                    .weighted_sum_rate;
      } catch (const RankDeficient&) {
        continue;
      }
      if (value > best) {  // strict: ties keep the lower id
        best = value;
        best_i = i;
      }
    }
    if (best_i == pool.size() || !(best > current)) break;
    current = best;
    s.selected.push_back(pool[best_i]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best_i));
  }
  return s;
}

PfState PfState::initial(std::size_t num_ues, double epsilon, double rbar0) {
  if (!(epsilon >= 1.0)) throw std::invalid_argument("PfState: epsilon must be >= 1");
  return PfState{std::vector<double>(num_ues, rbar0), epsilon, 1};
}

std::vector<double> PfState::weights() const {
  std::vector<double> w(rbar.size());
  for (std::size_t k = 0; k < w.size(); ++k)
    w[k] = rbar[k] > 1.0 / kMaxPfWeight ? 1.0 / rbar[k] : kMaxPfWeight;
  return w;
}

PfState update_running_avg(PfState state, std::span<const double> rates) {
  if (rates.size() != state.rbar.size()) throw ShapeMismatch("update_running_avg: size mismatch");
  const double keep = 1.0 - 1.0 / state.epsilon;
  const double take = 1.0 / state.epsilon;
  for (std::size_t k = 0; k < rates.size(); ++k) state.rbar[k] = keep * state.rbar[k] + take * rates[k];
  ++state.t;
  return state;
}

Schedule run_scheduler(const SchedulerParams& params, std::span<const UeId> candidates,
                       std::span<const ChannelVector> channels, std::span<const double> weights,
                       RngStream& rng) {
  switch (params.kind) {
    case SchedulerKind::Random: return random_schedule(candidates, params.m_max, rng);
    case SchedulerKind::Opportunistic: return opportunistic_schedule(candidates, channels, params.m_max);
    case SchedulerKind::Sus: return sus_schedule(candidates, channels, params.m_max, params.sus_alpha);
    case SchedulerKind::Pf:
      return pf_schedule(candidates, channels, params.m_max, weights, params.total_power,
                         params.noise_power);
  }
  throw std::invalid_argument("unknown scheduler");
}

}  // namespace selfnom::sched
