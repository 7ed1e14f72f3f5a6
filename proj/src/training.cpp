// SPDX-License-Identifier: Apache-2.0

#include "selfnom/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "selfnom/errors.hpp"
#include "selfnom/parallel.hpp"

namespace selfnom::train {
namespace {

void check_network_fits(const nn::Network& net, const TrainConfig& config, int num_antennas) {
  const auto& spec = net.spec();
  if (spec.input_width != policy::feature_width(config.policy.input_mode, num_antennas))
    throw ConfigMismatch("network input width does not match the input mode and array size");
  if ((spec.side_width > 0) != config.policy.pf_aware)
    throw ConfigMismatch("network weight branch does not match pf_training");
}

std::vector<int> sample_decisions(const Eigen::VectorXd& c, std::size_t offset, std::size_t k,
                                  double gamma, RngStream& rng) {
  std::vector<int> a(k);
  for (std::size_t i = 0; i < k; ++i)
    a[i] = policy::decide_stochastic(c[static_cast<Eigen::Index>(offset + i)], gamma, rng).a;
  return a;
}

std::vector<int> threshold_decisions(const Eigen::VectorXd& c, std::size_t offset, std::size_t k) {
  std::vector<int> a(k);
  for (std::size_t i = 0; i < k; ++i) a[i] = c[static_cast<Eigen::Index>(offset + i)] >= 0.0 ? 1 : 0;
  return a;
}

std::vector<double> sample_weights(const TrainBatch& batch, std::size_t s, std::size_t k) {
  if (batch.weights.empty()) return std::vector<double>(k, 1.0);
  if (batch.weights[s].size() != k) throw ShapeMismatch("batch weights: wrong length");
  return batch.weights[s];
}

nn::ForwardPass train_forward(nn::Network& net, const TrainBatch& batch, const TrainConfig& config,
                              double feature_scale) {
  net.set_mode(nn::Mode::Train);
  const Eigen::MatrixXd x = batch_features(batch, config.policy, feature_scale);
  if (config.policy.pf_aware) {
    const Eigen::MatrixXd side = batch_side(batch);
    return net.batch_forward(x, &side);
  }
  return net.batch_forward(x);
}

std::size_t check_batch(const TrainBatch& batch, const TrainConfig& config) {
  if (batch.size() == 0) throw ShapeMismatch("empty training batch");
  for (const auto& set : batch.channels)
    if (set.size() != config.total_ues) throw ConfigMismatch("channel set size differs from total_ues");
  if (config.policy.pf_aware && batch.weights.size() != batch.size())
    throw MissingWeight("pf training batch without per-UE weights");
  return config.total_ues;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(n_fb > 0.0)) throw std::invalid_argument("n_fb must be > 0");
  if (!(alpha_p > 0.0) || !(alpha_d > 0.0)) throw std::invalid_argument("learning rates must be > 0");
  if (m_max < 1 || m_max > total_ues) throw std::invalid_argument("need 1 <= m_max <= total_ues");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(total_power > 0.0) || !(noise_power > 0.0))
    throw std::invalid_argument("power and noise must be > 0");
  if (lambda0 < 0.0) throw std::invalid_argument("lambda0 must be >= 0");
  policy.validate();
}

TrainerState initial_state(const TrainConfig& config, int num_antennas, double feature_scale) {
  config.validate();
  nn::Network net =
      nn::Network::initialized(policy::default_architecture(config.policy, num_antennas), config.seed);
  if (config.method == TrainMethod::Do) net.mutable_parameters()[net.parameters().size() - 1] = kInitialOutputBias;
  TrainerState st(std::move(net), nn::Optimizer(config.optimizer, config.alpha_p));
  st.lambda = config.lambda0;
  st.feature_scale = feature_scale;
  return st;
}

TrainerState resume_state(const Checkpoint& ckpt, const TrainConfig& config, int num_antennas) {
  config.validate();
  if (ckpt.policy.input_mode != config.policy.input_mode || ckpt.policy.pf_aware != config.policy.pf_aware ||
      ckpt.policy.gamma != config.policy.gamma)
    throw ConfigMismatch("checkpoint policy differs from the training config");
  if (ckpt.method != config.method) throw ConfigMismatch("checkpoint was trained with another method");
  if (ckpt.optimizer != config.optimizer) throw ConfigMismatch("checkpoint optimizer differs");
  check_network_fits(ckpt.network, config, num_antennas);
  TrainerState st(ckpt.network, nn::Optimizer(config.optimizer, config.alpha_p));
  st.optimizer.restore(ckpt.optimizer_steps, ckpt.optimizer_m, ckpt.optimizer_v);
  st.lambda = ckpt.lambda;
  st.feature_scale = ckpt.feature_scale;
  st.epoch = ckpt.epoch;
  return st;
}

Checkpoint to_checkpoint(const TrainerState& state, const TrainConfig& config) {
  Checkpoint c;
  c.network = state.network;
  c.policy = config.policy;
  c.lambda = state.lambda;
  c.feature_scale = state.feature_scale;
  c.epoch = state.epoch;
  c.method = config.method;
  c.scheduler = config.scheduler;
  c.optimizer = config.optimizer;
  c.optimizer_steps = state.optimizer.steps();
  c.optimizer_m = state.optimizer.first_moment();
  c.optimizer_v = state.optimizer.second_moment();
  return c;
}

LagrangianTerms lagrangian_terms(std::span<const double> sum_rates,
                                 std::span<const double> feedback_counts, double lambda,
                                 double n_fb) {
  if (sum_rates.size() != feedback_counts.size() || sum_rates.empty())
    throw ShapeMismatch("lagrangian_terms: inconsistent batch");
  const double b = static_cast<double>(sum_rates.size());
  LagrangianTerms t;
  for (double r : sum_rates) t.rate_term += r;
  for (double c : feedback_counts) t.constraint_term += c;
  t.rate_term /= b;
  t.constraint_term = t.constraint_term / b - n_fb;
  t.value = t.rate_term - lambda * t.constraint_term;
  return t;
}

SampleOutcome evaluate_sample(std::span<const ChannelVector> channels, std::span<const int> a,
                              std::span<const double> weights_by_ue, const TrainConfig& config,
                              RngStream& scheduler_rng) {
  if (a.size() != channels.size() || weights_by_ue.size() != channels.size())
    throw ShapeMismatch("evaluate_sample: decisions, weights and channels differ in length");
  SampleOutcome out;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k]) out.nominated.push_back(static_cast<mimo::UeId>(k));
  const sched::SchedulerParams params{config.scheduler, config.m_max, config.sus_alpha,
                                     config.total_power, config.noise_power};
  out.schedule = sched::run_scheduler(params, out.nominated, channels, weights_by_ue, scheduler_rng);
  if (out.schedule.selected.empty()) return out;
  try {
    out.rates = mimo::evaluate_selection(channels, out.schedule.selected, config.total_power,
                                         config.noise_power, weights_by_ue);
    out.weighted_sum_rate = out.rates.weighted_sum_rate;
  } catch (const RankDeficient&) {
    out.rank_deficient = true;
    out.rates = {};
  }
  return out;
}

Eigen::MatrixXd batch_features(const TrainBatch& batch, const policy::PolicyConfig& policy,
                               double feature_scale) {
  std::vector<ChannelVector> flat;
  for (const auto& set : batch.channels) flat.insert(flat.end(), set.begin(), set.end());
  return policy::feature_matrix(flat, policy.input_mode, feature_scale);
}

Eigen::MatrixXd batch_side(const TrainBatch& batch) {
  std::size_t n = 0;
  for (const auto& w : batch.weights) n += w.size();
  Eigen::MatrixXd side(1, static_cast<Eigen::Index>(n));
  Eigen::Index col = 0;
  for (const auto& w : batch.weights)
    for (double v : w) side(0, col++) = v;
  return side;
}

StepResult primal_step_do(TrainerState& state, const TrainBatch& batch, const TrainConfig& config,
                          std::size_t workers) {
  if (config.method != TrainMethod::Do) throw ConfigMismatch("primal_step_do needs method DO");
  const std::size_t k = check_batch(batch, config);
  const std::size_t bsz = batch.size();
  const double gamma = config.policy.gamma;
  const nn::ForwardPass fp = train_forward(state.network, batch, config, state.feature_scale);
  const Eigen::VectorXd& c = fp.outputs();

  std::vector<double> rates(bsz), counts(bsz);
  std::vector<std::uint8_t> deficient(bsz, 0);
  Eigen::VectorXd upstream(c.size());
  const double inv_b = 1.0 / static_cast<double>(bsz);
  parallel_for(bsz, workers, [&](std::size_t s) {
    const std::size_t off = s * k;
    const std::vector<int> a = threshold_decisions(c, off, k);
    const std::vector<double> w = sample_weights(batch, s, k);
    RngStream rng = make_stream(config.seed, {stream_tag::kScheduler, batch.epoch, batch.index, s});
    const SampleOutcome out = evaluate_sample(batch.channels[s], a, w, config, rng);
    rates[s] = out.weighted_sum_rate;
    counts[s] = static_cast<double>(out.nominated.size());
    deficient[s] = out.rank_deficient;
    std::vector<double> sens(k, 0.0);
    if (!out.rank_deficient && !out.schedule.selected.empty()) {
      std::vector<double> sel_w;
      for (auto id : out.schedule.selected) sel_w.push_back(w[id]);
      const std::vector<double> g = mimo::rate_scale_sensitivity(out.rates, config.noise_power, sel_w);
      for (std::size_t m = 0; m < g.size(); ++m) sens[out.schedule.selected[m]] = g[m];
    }
    for (std::size_t i = 0; i < k; ++i) {
      const auto col = static_cast<Eigen::Index>(off + i);
      upstream[col] = inv_b * (state.lambda - sens[i]) * policy::ste_derivative(c[col], gamma);
    }
  });

  StepResult r;
  r.terms = lagrangian_terms(rates, counts, state.lambda, config.n_fb);
  r.mean_feedback_count = r.terms.constraint_term + config.n_fb;
  r.rank_deficient = static_cast<std::size_t>(std::count(deficient.begin(), deficient.end(), 1));
  const nn::Gradient loss_grad = state.network.backward(fp, upstream);
  r.gradient = -loss_grad;
  state.optimizer.step(state.network, loss_grad, nn::Direction::Descend);
  state.network.absorb_batch_statistics(fp);
  return r;
}

StepResult primal_step_pg(TrainerState& state, const TrainBatch& batch, const TrainConfig& config,
                          std::size_t workers) {
  if (config.method != TrainMethod::Pg) throw ConfigMismatch("primal_step_pg needs method PG");
  const std::size_t k = check_batch(batch, config);
  const std::size_t bsz = batch.size();
  const double gamma = config.policy.gamma;
  const nn::ForwardPass fp = train_forward(state.network, batch, config, state.feature_scale);
  const Eigen::VectorXd& c = fp.outputs();

  std::vector<double> rates(bsz), counts(bsz), scores(bsz);
  std::vector<std::uint8_t> deficient(bsz, 0);
  std::vector<std::vector<int>> actions(bsz);
  parallel_for(bsz, workers, [&](std::size_t s) {
    const std::size_t off = s * k;
    RngStream drng = make_stream(config.seed, {stream_tag::kDecision, batch.epoch, batch.index, s});
    actions[s] = sample_decisions(c, off, k, gamma, drng);
    const std::vector<double> w = sample_weights(batch, s, k);
    RngStream rng = make_stream(config.seed, {stream_tag::kScheduler, batch.epoch, batch.index, s});
    const SampleOutcome out = evaluate_sample(batch.channels[s], actions[s], w, config, rng);
    rates[s] = out.weighted_sum_rate;
    counts[s] = static_cast<double>(out.nominated.size());
    deficient[s] = out.rank_deficient;
    scores[s] = rates[s] - state.lambda * (counts[s] - config.n_fb);
  });

  double b = 0.0;
  if (config.baseline) b = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(bsz);
  Eigen::VectorXd upstream(c.size());
  const double inv_b = 1.0 / static_cast<double>(bsz);
  for (std::size_t s = 0; s < bsz; ++s) {
    for (std::size_t i = 0; i < k; ++i) {
      const auto col = static_cast<Eigen::Index>(s * k + i);
      const double p = policy::sigmoid(gamma * c[col]);
      upstream[col] = inv_b * (scores[s] - b) * policy::grad_logprob_wrt_c(actions[s][i], p, gamma);
    }
  }

  StepResult r;
  r.terms = lagrangian_terms(rates, counts, state.lambda, config.n_fb);
  r.mean_feedback_count = r.terms.constraint_term + config.n_fb;
  r.rank_deficient = static_cast<std::size_t>(std::count(deficient.begin(), deficient.end(), 1));
  r.gradient = state.network.backward(fp, upstream);
  state.optimizer.step(state.network, r.gradient, nn::Direction::Ascend);
  state.network.absorb_batch_statistics(fp);
  return r;
}

double dual_step(double lambda, double mean_feedback_count, double n_fb, double alpha_d) {
  if (!(alpha_d > 0.0)) throw std::invalid_argument("alpha_d must be > 0");
  return std::max(0.0, lambda + alpha_d * (mean_feedback_count - n_fb));
}

double batch_feedback_count(TrainerState& state, const TrainBatch& batch,
                            const TrainConfig& config) {
  const std::size_t k = check_batch(batch, config);
  const nn::ForwardPass fp = train_forward(state.network, batch, config, state.feature_scale);
  const Eigen::VectorXd& c = fp.outputs();
  double total = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    std::vector<int> a;
    if (config.method == TrainMethod::Pg) {
      RngStream rng = make_stream(config.seed, {stream_tag::kDualDecision, batch.epoch, batch.index, s});
      a = sample_decisions(c, s * k, k, config.policy.gamma, rng);
    } else {
      a = threshold_decisions(c, s * k, k);
    }
    total += std::accumulate(a.begin(), a.end(), 0.0);
  }
  return total / static_cast<double>(batch.size());
}

namespace {

TrainBatch assemble_batch(const channel::Dataset& dataset, const TrainConfig& config,
                          std::span<const std::size_t> order, std::uint64_t epoch, std::size_t bi,
                          std::uint64_t weight_tag) {
  const auto train_sets = dataset.train_sets();
  TrainBatch batch;
  batch.epoch = epoch;
  batch.index = bi;
  const std::size_t lo = bi * config.batch_size;
  const std::size_t hi = std::min(order.size(), lo + config.batch_size);
  for (std::size_t j = lo; j < hi; ++j) {
    batch.channels.push_back(dataset.gather(train_sets[order[j]]));
    if (config.policy.pf_aware) {
      RngStream wr = make_stream(config.seed, {weight_tag, epoch, bi, j - lo});
      std::vector<double> w(config.total_ues);
      for (auto& v : w) v = uniform01(wr);
      batch.weights.push_back(std::move(w));
    }
  }
  return batch;
}

}  // namespace

void refresh_batch_statistics(TrainerState& state, const TrainConfig& config,
                              const channel::Dataset& dataset) {
  if (!state.network.has_batchnorm()) return;
  std::vector<std::size_t> order(dataset.train_sets().size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t num_batches = (order.size() + config.batch_size - 1) / config.batch_size;
  for (std::size_t bi = 0; bi < num_batches; ++bi) {
    const TrainBatch batch = assemble_batch(dataset, config, order, state.epoch, bi, stream_tag::kStatsWeight);
    if (batch.size() * config.total_ues < 2) continue;
    const nn::ForwardPass fp = train_forward(state.network, batch, config, state.feature_scale);
    state.network.absorb_batch_statistics(fp);
  }
}

void train(TrainerState& state, const TrainConfig& config, const channel::Dataset& dataset,
           const TrainOptions& options) {
  config.validate();
  if (dataset.users_per_set != config.total_ues)
    throw ConfigMismatch("dataset has " + std::to_string(dataset.users_per_set) +
                         " users per set, config total_ues is " + std::to_string(config.total_ues));
  if (config.m_max > static_cast<std::size_t>(dataset.num_antennas))
    throw ConfigMismatch("m_max exceeds the number of antennas");
  check_network_fits(state.network, config, dataset.num_antennas);
  const auto train_sets = dataset.train_sets();
  const std::size_t n = train_sets.size();
  if (n == 0 && state.epoch < config.epochs) throw ConfigMismatch("dataset has no training sets");
  const auto t0 = std::chrono::steady_clock::now();

  for (std::uint64_t epoch = state.epoch; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream shuffle = make_stream(config.seed, {stream_tag::kShuffle, epoch});
    std::shuffle(order.begin(), order.end(), shuffle);
    const std::size_t num_batches = (n + config.batch_size - 1) / config.batch_size;
    for (std::size_t bi = 0; bi < num_batches; ++bi) {
      const TrainBatch batch = assemble_batch(dataset, config, order, epoch, bi, stream_tag::kPfWeight);
      const StepResult r = config.method == TrainMethod::Do
                               ? primal_step_do(state, batch, config, options.workers)
                               : primal_step_pg(state, batch, config, options.workers);
      const double count = batch_feedback_count(state, batch, config);
      state.lambda = dual_step(state.lambda, count, config.n_fb, config.alpha_d);
      ++state.batches;
      if (r.rank_deficient > 0) ++state.rank_deficient_batches;
      MetricsRow row;
      row.epoch = epoch;
      row.batch = bi;
      row.rate_term = r.terms.rate_term;
      row.constraint_term = r.terms.constraint_term;
      row.mean_feedback_count = r.mean_feedback_count;
      row.lambda = state.lambda;
      if (options.record_wall_time)
        row.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      state.history.push_back(row);
    }
    refresh_batch_statistics(state, config, dataset);
    state.epoch = epoch + 1;
  }
  state.network.set_mode(nn::Mode::Eval);
}

}  // namespace selfnom::train
