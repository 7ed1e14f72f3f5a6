// SPDX-License-Identifier: Apache-2.0

#include "selfnom/pf_simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "selfnom/errors.hpp"
#include "selfnom/parallel.hpp"

namespace selfnom::pf {

void PfRunConfig::validate() const {
  if (slots < 1) throw std::invalid_argument("T must be >= 1");
  if (!(epsilon >= 1.0)) throw std::invalid_argument("epsilon must be >= 1");
  if (layouts < 1) throw std::invalid_argument("need at least one layout");
  if (m_max < 1) throw std::invalid_argument("m_max must be >= 1");
  if (!(total_power > 0.0) || !(noise_power > 0.0)) throw std::invalid_argument("power and noise must be > 0");
}

LayoutChannelSource::LayoutChannelSource(channel::ChannelModel model, std::size_t num_ues,
                                         std::size_t num_layouts, std::uint64_t seed)
    : model_(std::move(model)), num_ues_(num_ues), seed_(seed), layouts_(num_layouts) {
  for (std::size_t l = 0; l < num_layouts; ++l) {
    layouts_[l].reserve(num_ues);
    for (std::size_t k = 0; k < num_ues; ++k) {
      RngStream rng = make_stream(seed, {stream_tag::kLayout, l, k});
      layouts_[l].push_back(model_.draw_layout(rng));
    }
  }
}

std::vector<ChannelVector> LayoutChannelSource::slot(std::size_t layout, std::uint64_t t) const {
  std::vector<ChannelVector> h;
  h.reserve(num_ues_);
  for (std::size_t k = 0; k < num_ues_; ++k) {
    RngStream rng = make_stream(seed_, {stream_tag::kSmallScale, layout, t, k});
    h.push_back(model_.realize(layouts_.at(layout)[k], rng));
  }
  return h;
}

StaticChannelSource::StaticChannelSource(std::vector<ChannelVector> channels)
    : channels_(std::move(channels)) {
  if (channels_.empty()) throw std::invalid_argument("static source without channels");
}

int StaticChannelSource::num_antennas() const { return static_cast<int>(channels_.front().size()); }

PfRunReport run_pf(const PfRunConfig& config, const ChannelSource& source,
                   const eval::FeedbackPolicy& policy, std::size_t workers) {
  config.validate();
  const bool sn = policy.kind == eval::FeedbackKind::SelfNomination;
  if (sn) {
    if (!policy.checkpoint) throw MissingCheckpoint("self-nomination policy without a checkpoint");
    if (!policy.checkpoint->policy.pf_aware)
      throw CheckpointMismatch("PF simulation needs a network trained with pf_training");
  }
  const std::size_t k = source.num_ues();
  if (config.m_max > static_cast<std::size_t>(source.num_antennas()))
    throw std::invalid_argument("m_max exceeds the number of antennas");
  const std::size_t layouts = config.layouts;
  PfRunReport report;
  report.mean_rate.assign(layouts, std::vector<double>(k, 0.0));
  report.times_scheduled.assign(layouts, std::vector<std::uint64_t>(k, 0));
  if (config.keep_trace) report.trace.assign(layouts, {});
  std::vector<double> fb_total(layouts, 0.0);
  const std::vector<double> ones(k, 1.0);

  parallel_for(layouts, workers, [&](std::size_t l) {
    sched::PfState state = sched::PfState::initial(k, config.epsilon);
    std::vector<double> total(k, 0.0);
    for (std::uint64_t t = 0; t < config.slots; ++t) {
      const std::vector<ChannelVector> h = source.slot(l, t);
      const std::vector<double> w = state.weights();
      RngStream frng = make_stream(config.seed, {stream_tag::kFeedback, l, t});
      const std::vector<int> a =
          eval::decide_feedback(policy, h, sn ? std::span<const double>(w) : std::span<const double>{}, frng);
      std::vector<UeId> nominated;
      for (std::size_t i = 0; i < k; ++i)
        if (a[i]) nominated.push_back(static_cast<UeId>(i));
      fb_total[l] += static_cast<double>(nominated.size());
      const sched::Schedule s =
          sched::pf_schedule(nominated, h, config.m_max, w, config.total_power, config.noise_power);
      std::vector<double> rates(k, 0.0);
      if (!s.selected.empty()) {
        try {
          const mimo::RateReport rr =
              mimo::evaluate_selection(h, s.selected, config.total_power, config.noise_power, ones);
          for (std::size_t m = 0; m < s.selected.size(); ++m) {
            rates[s.selected[m]] = rr.spectral_efficiency[m];
            ++report.times_scheduled[l][s.selected[m]];
          }
        } catch (const RankDeficient&) {
        }
      }
      for (std::size_t i = 0; i < k; ++i) total[i] += rates[i];
      state = sched::update_running_avg(std::move(state), rates);
      if (config.keep_trace) report.trace[l].push_back({nominated, s.selected, rates});
    }
    for (std::size_t i = 0; i < k; ++i) report.mean_rate[l][i] = total[i] / static_cast<double>(config.slots);
  });

  report.mean_feedback_count = std::accumulate(fb_total.begin(), fb_total.end(), 0.0) /
                               static_cast<double>(layouts * config.slots);
  return report;
}

std::vector<std::pair<double, double>> rate_cdf(const PfRunReport& report) {
  std::vector<double> r;
  for (const auto& l : report.mean_rate) r.insert(r.end(), l.begin(), l.end());
  std::sort(r.begin(), r.end());
  std::vector<std::pair<double, double>> cdf;
  const double n = static_cast<double>(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i + 1 < r.size() && r[i + 1] == r[i]) continue;
    cdf.emplace_back(r[i], static_cast<double>(i + 1) / n);
  }
  return cdf;
}

LogUtility log_utility(const PfRunReport& report) {
  LogUtility u;
  if (report.mean_rate.empty()) throw std::invalid_argument("log_utility of an empty report");
  double sum = 0.0;
  for (std::size_t l = 0; l < report.mean_rate.size(); ++l)
    for (std::size_t k = 0; k < report.mean_rate[l].size(); ++k) {
      const double r = report.mean_rate[l][k];
      if (r > 0.0) {
        sum += std::log(r);
      } else {
        u.starved = true;
        u.starved_ues.emplace_back(l, static_cast<UeId>(k));
      }
    }
  u.value = u.starved ? -std::numeric_limits<double>::infinity()
                      : sum / static_cast<double>(report.mean_rate.size());
  return u;
}

}  // namespace selfnom::pf
