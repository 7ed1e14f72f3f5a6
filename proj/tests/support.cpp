// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <lapacke.h>

#include <stdexcept>

#include "selfnom/policy.hpp"
#include "selfnom/training.hpp"

namespace testing {

std::vector<double> lapack_singular_values(const Eigen::MatrixXcd& a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  std::vector<lapack_complex_double> buf(static_cast<std::size_t>(m * n));
  for (lapack_int c = 0; c < n; ++c)
    for (lapack_int r = 0; r < m; ++r) {
      const cd v = a(r, c);
      buf[static_cast<std::size_t>(c * m + r)] = lapack_make_complex_double(v.real(), v.imag());
    }
  std::vector<double> s(static_cast<std::size_t>(std::min(m, n)));
  std::vector<double> superb(s.size() + 1);
  const lapack_int info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'N', 'N', m, n, buf.data(), m, s.data(),
                                         nullptr, 1, nullptr, 1, superb.data());
  if (info != 0) throw std::runtime_error("zgesvd failed");
  return s;
}

selfnom::nn::NetSpec random_spec(std::mt19937_64& rng, int max_layers, bool allow_side) {
  using selfnom::nn::LayerSpec;
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> width(1, 6);
  selfnom::nn::NetSpec s;
  const bool side = allow_side && coin(rng);
  std::size_t branch_w = 0;
  if (side) {
    s.side_width = static_cast<std::size_t>(width(rng));
    branch_w = static_cast<std::size_t>(width(rng));
    s.branch = {LayerSpec::dense(s.side_width, branch_w), LayerSpec::tanh(branch_w)};
  }
  const int layers = std::uniform_int_distribution<int>(1, max_layers)(rng);
  if (coin(rng))
    s.input_width = 2 * static_cast<std::size_t>(std::uniform_int_distribution<int>(2, 8)(rng));
  else
    s.input_width = static_cast<std::size_t>(width(rng));
  std::size_t w = s.input_width;
  bool concatenated = !side;
  int placed = 0;
  // (length, channels) view of the activations while only conv/tanh layers
  // have been placed
  bool conv_allowed = s.input_width % 2 == 0 && s.input_width >= 4;
  std::size_t len = s.input_width / 2, ch = 2;
  while (placed < layers) {
    const bool last = placed == layers - 1;
    if (!concatenated && (last || coin(rng))) {
      s.trunk.push_back(LayerSpec::concat_branch(w, branch_w));
      w += branch_w;
      concatenated = true;
      conv_allowed = false;
    }
    if (last) {
      s.trunk.push_back(LayerSpec::dense(w, 1));
      if (coin(rng)) s.trunk.push_back(LayerSpec::tanh(1));
      break;
    }
    const int kind = std::uniform_int_distribution<int>(0, 2)(rng);
    if (kind == 0 && conv_allowed && len >= 2) {
      const int kmax = static_cast<int>(std::min<std::size_t>(3, len));
      const auto k = static_cast<std::size_t>(std::uniform_int_distribution<int>(1, kmax)(rng));
      const auto cout = static_cast<std::size_t>(std::uniform_int_distribution<int>(1, 3)(rng));
      s.trunk.push_back(LayerSpec::conv1d(len, ch, cout, k));
      len = len - k + 1;
      ch = cout;
      w = s.trunk.back().out_width;
    } else if (kind == 1) {
      s.trunk.push_back(LayerSpec::batchnorm(w));
      conv_allowed = false;
    } else {
      const auto out = static_cast<std::size_t>(width(rng));
      s.trunk.push_back(LayerSpec::dense(w, out));
      w = out;
      conv_allowed = false;
    }
    if (coin(rng)) s.trunk.push_back(LayerSpec::tanh(w));
    ++placed;
  }
  s.validate();
  return s;
}

PgInstance make_pg_instance(std::uint64_t seed, std::size_t num_ues, int num_antennas) {
  using selfnom::nn::LayerSpec;
  std::mt19937_64 rng(seed);
  PgInstance inst;
  inst.channels = random_channels(rng, num_ues, num_antennas);
  const auto in = static_cast<std::size_t>(2 * num_antennas);
  inst.net = selfnom::nn::Network::initialized(
      selfnom::nn::NetSpec{in, 0, {}, {LayerSpec::dense(in, 3), LayerSpec::tanh(3), LayerSpec::dense(3, 1), LayerSpec::tanh(1)}},
      seed + 1);
  inst.gamma = 2.0;
  inst.lambda = 0.4;
  inst.n_fb = 1.0;
  inst.m_max = 2;
  inst.total_power = 10.0;
  inst.noise_power = 1.0;
  return inst;
}

double pg_expected_lagrangian(const PgInstance& inst, const Eigen::VectorXd& theta) {
  selfnom::nn::Network net = inst.net;
  net.set_parameters(theta);
  const std::size_t k = inst.channels.size();
  std::vector<double> p(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> x;
    for (auto v : inst.channels[i]) {
      x.push_back(v.real());
      x.push_back(v.imag());
    }
    const double c = net.forward(x).outputs()[0];
    p[i] = 1.0 / (1.0 + std::exp(-inst.gamma * c));
  }
  double j = 0.0;
  for_each_subset(k, 0, k, [&](const std::vector<UeId>& nominated) {
    double prob = 1.0;
    std::vector<bool> on(k, false);
    for (auto i : nominated) on[i] = true;
    for (std::size_t i = 0; i < k; ++i) prob *= on[i] ? p[i] : 1.0 - p[i];
    std::vector<UeId> order = nominated;
    std::stable_sort(order.begin(), order.end(), [&](UeId a, UeId b) {
      return inst.channels[a].squaredNorm() > inst.channels[b].squaredNorm();
    });
    if (order.size() > inst.m_max) order.resize(inst.m_max);
    double rate = 0.0;
    if (!order.empty()) {
      const Eigen::MatrixXcd h = oracle_stack(inst.channels, order);
      rate = oracle_rates(h, oracle_zf(h, inst.total_power), inst.noise_power,
                          std::vector<double>(order.size(), 1.0))
                 .weighted_sum_rate;
    }
    j += prob * (rate - inst.lambda * (static_cast<double>(nominated.size()) - inst.n_fb));
  });
  return j;
}

Eigen::VectorXd pg_exact_gradient(const PgInstance& inst) {
  return central_diff([&](const Eigen::VectorXd& th) { return pg_expected_lagrangian(inst, th); },
                      inst.net.parameters(), 1e-5);
}

McGradient pg_monte_carlo(const PgInstance& inst, std::size_t samples, std::size_t batch,
                          std::uint64_t seed) {
  namespace tr = selfnom::train;
  tr::TrainConfig cfg;
  cfg.method = selfnom::TrainMethod::Pg;
  cfg.scheduler = selfnom::sched::SchedulerKind::Opportunistic;
  cfg.policy.gamma = inst.gamma;
  cfg.n_fb = inst.n_fb;
  cfg.m_max = inst.m_max;
  cfg.total_ues = inst.channels.size();
  cfg.total_power = inst.total_power;
  cfg.noise_power = inst.noise_power;
  cfg.seed = seed;
  tr::TrainBatch tb;
  tb.channels.assign(batch, inst.channels);
  const std::size_t rounds = samples / batch;
  std::vector<Eigen::VectorXd> means;
  for (std::size_t r = 0; r < rounds; ++r) {
    tr::TrainerState st(inst.net, selfnom::nn::Optimizer(selfnom::nn::OptimizerKind::Sgd, 1e-3));
    st.lambda = inst.lambda;
    st.feature_scale = 1.0;
    tb.index = r;
    means.push_back(tr::primal_step_pg(st, tb, cfg).gradient);
  }
  McGradient out;
  out.mean = Eigen::VectorXd::Zero(inst.net.parameters().size());
  for (const auto& m : means) out.mean += m;
  out.mean /= static_cast<double>(rounds);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(out.mean.size());
  for (const auto& m : means) var += (m - out.mean).cwiseAbs2();
  var /= static_cast<double>(rounds - 1);
  out.std_error = (var / static_cast<double>(rounds)).cwiseSqrt();
  return out;
}

}  // namespace testing
