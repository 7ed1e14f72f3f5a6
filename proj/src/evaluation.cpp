// SPDX-License-Identifier: Apache-2.0

#include "selfnom/evaluation.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "selfnom/errors.hpp"
#include "selfnom/parallel.hpp"
#include "selfnom/policy.hpp"

namespace selfnom::eval {

std::string_view to_string(FeedbackKind k) {
  switch (k) {
    case FeedbackKind::All: return "all";
    case FeedbackKind::Random: return "random";
    case FeedbackKind::LimitedAll: return "limited_all";
    case FeedbackKind::SelfNomination: return "sn";
  }
  return "?";
}

FeedbackKind feedback_from_string(std::string_view s) {
  if (s == "all") return FeedbackKind::All;
  if (s == "random") return FeedbackKind::Random;
  if (s == "limited_all") return FeedbackKind::LimitedAll;
  if (s == "sn") return FeedbackKind::SelfNomination;
  throw std::invalid_argument("unknown feedback policy '" + std::string(s) + "'");
}

std::vector<int> decide_feedback(const FeedbackPolicy& policy, std::span<const ChannelVector> channels,
                                 std::span<const double> weights, RngStream& rng) {
  const std::size_t k = channels.size();
  std::vector<int> a(k, 0);
  switch (policy.kind) {
    case FeedbackKind::All:
      std::fill(a.begin(), a.end(), 1);
      break;
    case FeedbackKind::Random:
      if (!(policy.prob >= 0.0 && policy.prob <= 1.0)) throw std::invalid_argument("feedback prob outside [0, 1]");
      for (auto& v : a) v = uniform01(rng) < policy.prob ? 1 : 0;
      break;
    case FeedbackKind::LimitedAll: {
      std::vector<mimo::UeId> ids(k);
      std::iota(ids.begin(), ids.end(), mimo::UeId{0});
      for (auto id : sched::random_schedule(ids, policy.n_fb, rng).selected) a[id] = 1;
      break;
    }
    case FeedbackKind::SelfNomination: {
      if (!policy.checkpoint) throw MissingCheckpoint("self-nomination policy without a checkpoint");
      const Checkpoint& ck = *policy.checkpoint;
      if (ck.policy.pf_aware != !weights.empty())
        throw MissingWeight(ck.policy.pf_aware ? "pf-aware network needs per-UE weights"
                                               : "weights given to a network without a weight branch");
      std::optional<nn::Network> eval_copy;
      if (ck.network.mode() != nn::Mode::Eval) {
        eval_copy.emplace(ck.network);
        eval_copy->set_mode(nn::Mode::Eval);
      }
      const nn::Network& net = eval_copy ? *eval_copy : ck.network;
      const Eigen::MatrixXd x = policy::feature_matrix(channels, ck.policy.input_mode, ck.feature_scale);
      nn::ForwardPass fp;
      if (ck.policy.pf_aware) {
        if (weights.size() != k) throw ShapeMismatch("decide_feedback: weights length");
        const Eigen::MatrixXd side =
            Eigen::Map<const Eigen::RowVectorXd>(weights.data(), static_cast<Eigen::Index>(k));
        fp = net.batch_forward(x, &side);
      } else {
        fp = net.batch_forward(x);
      }
      const Eigen::VectorXd& c = fp.outputs();
      for (std::size_t i = 0; i < k; ++i) {
        const double ci = c[static_cast<Eigen::Index>(i)];
        a[i] = ck.method == TrainMethod::Pg ? policy::decide_stochastic(ci, ck.policy.gamma, rng).a
                                            : policy::decide_deterministic(ci, ck.policy.gamma).a;
      }
      break;
    }
  }
  return a;
}

EvalResult evaluate(const channel::Dataset& dataset, std::span<const std::vector<mimo::UeId>> sets,
                    const FeedbackPolicy& policy, const EvalSetup& setup, std::size_t workers) {
  const std::size_t n = sets.size();
  if (n == 0) throw std::invalid_argument("evaluate: no channel sets");
  if (policy.kind == FeedbackKind::SelfNomination && policy.checkpoint && policy.checkpoint->policy.pf_aware)
    throw CheckpointMismatch("sum-rate evaluation needs a network without a weight branch");
  std::vector<double> rate(n, 0.0), count(n, 0.0), cond(n, 0.0);
  std::vector<std::uint8_t> cond_ok(n, 0), deficient(n, 0);
  parallel_for(n, workers, [&](std::size_t j) {
    const std::vector<ChannelVector> ch = dataset.gather(sets[j]);
    RngStream frng = make_stream(setup.seed, {stream_tag::kFeedback, j});
    const std::vector<int> a = decide_feedback(policy, ch, {}, frng);
    std::vector<mimo::UeId> nominated;
    for (std::size_t k = 0; k < a.size(); ++k)
      if (a[k]) nominated.push_back(static_cast<mimo::UeId>(k));
    count[j] = static_cast<double>(nominated.size());
    const std::vector<double> ones(ch.size(), 1.0);
    RngStream srng = make_stream(setup.seed, {stream_tag::kScheduler, j});
    const sched::Schedule s = sched::run_scheduler(setup.scheduler, nominated, ch, ones, srng);
    if (s.selected.empty()) return;
    const Eigen::MatrixXcd h = mimo::stack_channels(ch, s.selected);
    const double kappa = mimo::condition_number(h);
    if (std::isfinite(kappa)) {
      cond[j] = kappa;
      cond_ok[j] = 1;
    }
    try {
      rate[j] = mimo::evaluate_selection(ch, s.selected, setup.scheduler.total_power,
                                         setup.scheduler.noise_power, ones)
                    .weighted_sum_rate;
    } catch (const RankDeficient&) {
      deficient[j] = 1;
    }
  });

  EvalResult r;
  r.num_sets = n;
  const double dn = static_cast<double>(n);
  r.sum_rate_mean = std::accumulate(rate.begin(), rate.end(), 0.0) / dn;
  r.feedback_count_mean = std::accumulate(count.begin(), count.end(), 0.0) / dn;
  if (n > 1) {
    double ss = 0.0;
    for (double v : rate) ss += (v - r.sum_rate_mean) * (v - r.sum_rate_mean);
    r.sum_rate_ci95 = 1.96 * std::sqrt(ss / (dn - 1.0) / dn);
  }
  double cs = 0.0;
  std::size_t cn = 0;
  for (std::size_t j = 0; j < n; ++j)
    if (cond_ok[j]) {
      cs += cond[j];
      ++cn;
    }
  r.condition_number_mean = cn > 0 ? cs / static_cast<double>(cn) : 0.0;
  for (auto d : deficient) r.rank_deficient += d;
  return r;
}

}  // namespace selfnom::eval
