// SPDX-License-Identifier: Apache-2.0

#include "selfnom/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "selfnom/errors.hpp"

namespace selfnom::policy {

std::string_view to_string(InputMode m) { return m == InputMode::FullCsi ? "full_csi" : "cqi"; }

InputMode input_mode_from_string(std::string_view s) {
  if (s == "full_csi") return InputMode::FullCsi;
  if (s == "cqi") return InputMode::Cqi;
  throw std::invalid_argument("unknown input mode '" + std::string(s) + "'");
}

void PolicyConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be > 0");
}

std::size_t feature_width(InputMode mode, int num_antennas) {
  return mode == InputMode::FullCsi ? 2 * static_cast<std::size_t>(num_antennas) : 1;
}

Features featurize(const ChannelVector& h, const PolicyConfig& config, double scale,
                   std::optional<double> weight) {
  if (config.pf_aware && !weight) throw MissingWeight("pf-aware policy needs a weight input");
  if (!config.pf_aware && weight) throw MissingWeight("weight given to a policy without a weight branch");
  Features f;
  f.weight = weight;
  if (config.input_mode == InputMode::Cqi) {
    f.x = {h.norm() * scale};
    return f;
  }
  f.x.resize(2 * static_cast<std::size_t>(h.size()));
  for (Eigen::Index n = 0; n < h.size(); ++n) {
    f.x[2 * n] = h[n].real() * scale;
    f.x[2 * n + 1] = h[n].imag() * scale;
  }
  return f;
}

Eigen::MatrixXd feature_matrix(std::span<const ChannelVector> channels, InputMode mode,
                               double scale) {
  if (channels.empty()) return {};
  const auto n = channels.front().size();
  const auto width = static_cast<Eigen::Index>(feature_width(mode, static_cast<int>(n)));
  Eigen::MatrixXd x(width, static_cast<Eigen::Index>(channels.size()));
  for (std::size_t k = 0; k < channels.size(); ++k) {
    const auto& h = channels[k];
    if (h.size() != n) throw ShapeMismatch("feature_matrix: channels differ in length");
    const auto col = static_cast<Eigen::Index>(k);
    if (mode == InputMode::Cqi) {
      x(0, col) = h.norm() * scale;
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        x(2 * i, col) = h[i].real() * scale;
        x(2 * i + 1, col) = h[i].imag() * scale;
      }
    }
  }
  return x;
}

double feature_scale_from_pool(std::span<const ChannelVector> pool) {
  if (pool.empty()) throw std::invalid_argument("feature scale of an empty pool");
  std::vector<double> norms;
  norms.reserve(pool.size());
  for (const auto& h : pool) norms.push_back(h.norm());
  const auto mid = norms.begin() + static_cast<std::ptrdiff_t>(norms.size() / 2);
  std::nth_element(norms.begin(), mid, norms.end());
  double med = *mid;
  if (norms.size() % 2 == 0) med = 0.5 * (med + *std::max_element(norms.begin(), mid));
  if (!(med > 0.0)) throw std::invalid_argument("feature scale: median channel norm is zero");
  return 1.0 / med;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

FeedbackDecision decide_deterministic(double c, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  return {c >= 0.0 ? 1 : 0, sigmoid(gamma * c), c, DecisionMode::Deterministic};
}

double ste_derivative(double c, double gamma) {
  const double s = sigmoid(gamma * c);
  return gamma * s * (1.0 - s);
}

FeedbackDecision decide_stochastic(double c, double gamma, RngStream& rng) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  const double p = sigmoid(gamma * c);
  return {uniform01(rng) < p ? 1 : 0, p, c, DecisionMode::Stochastic};
}

double log_prob(int a, double p) {
  p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return a ? std::log(p) : std::log1p(-p);
}

double grad_logprob_wrt_c(int a, double p, double gamma) { return (a - p) * gamma; }

nn::NetSpec default_architecture(const PolicyConfig& config, int num_antennas) {
  using nn::LayerSpec;
  config.validate();
  if (num_antennas < 1) throw ShapeMismatch("default_architecture: no antennas");
  nn::NetSpec s;
  s.input_width = feature_width(config.input_mode, num_antennas);
  constexpr std::size_t kBranchWidth = 8;
  if (config.pf_aware) {
    s.side_width = 1;
    s.branch = {LayerSpec::dense(1, kBranchWidth), LayerSpec::tanh(kBranchWidth)};
  }
  std::size_t width = s.input_width;
  std::size_t hidden = 32;
  if (config.input_mode == InputMode::FullCsi) {
    const auto n = static_cast<std::size_t>(num_antennas);
    const std::size_t kernel = std::min<std::size_t>(5, (n + 1) / 2);
    constexpr std::size_t kChannels = 8;
    s.trunk.push_back(LayerSpec::conv1d(n, 2, kChannels, kernel));
    s.trunk.push_back(LayerSpec::tanh(s.trunk.back().out_width));
    s.trunk.push_back(LayerSpec::conv1d(n - kernel + 1, kChannels, kChannels, kernel));
    s.trunk.push_back(LayerSpec::tanh(s.trunk.back().out_width));
    width = s.trunk.back().out_width;
    hidden = 64;
  }
  if (config.pf_aware) {
    s.trunk.push_back(LayerSpec::concat_branch(width, kBranchWidth));
    width += kBranchWidth;
  }
  s.trunk.push_back(LayerSpec::dense(width, hidden));
  s.trunk.push_back(LayerSpec::batchnorm(hidden));
  s.trunk.push_back(LayerSpec::tanh(hidden));
  s.trunk.push_back(LayerSpec::dense(hidden, 32));
  s.trunk.push_back(LayerSpec::batchnorm(32));
  s.trunk.push_back(LayerSpec::tanh(32));
  s.trunk.push_back(LayerSpec::dense(32, 1));
  s.trunk.push_back(LayerSpec::tanh(1));
  s.validate();
  return s;
}

}  // namespace selfnom::policy
