// SPDX-License-Identifier: Apache-2.0
//
// UE-side self-nomination: featurization of local observations and the
// mapping from network score c to a feedback bit.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "selfnom/micronet.hpp"
#include "selfnom/mimo_core.hpp"
#include "selfnom/rng.hpp"

namespace selfnom::policy {

using mimo::ChannelVector;

enum class InputMode : std::uint32_t { FullCsi = 0, Cqi = 1 };
std::string_view to_string(InputMode m);
InputMode input_mode_from_string(std::string_view s);

struct PolicyConfig {
  double gamma = 10.0;
  InputMode input_mode = InputMode::FullCsi;
  bool pf_aware = false;
  void validate() const;
};

enum class DecisionMode { Deterministic, Stochastic };

struct FeedbackDecision {
  int a = 0;
  double p = 0.5;
  double c = 0.0;
  DecisionMode mode = DecisionMode::Deterministic;
};

// full_csi: (Re h_1, Im h_1, Re h_2, ...) * scale; cqi: |h|_2 * scale.
// Throws MissingWeight if weight is given iff !pf_aware is violated.
struct Features {
  std::vector<double> x;
  std::optional<double> weight;
};
Features featurize(const ChannelVector& h, const PolicyConfig& config, double scale,
                   std::optional<double> weight = std::nullopt);

std::size_t feature_width(InputMode mode, int num_antennas);

// One column per UE, columns in the order of `channels`.
Eigen::MatrixXd feature_matrix(std::span<const ChannelVector> channels, InputMode mode,
                               double scale);

// 1 / median |h| over the pool.
double feature_scale_from_pool(std::span<const ChannelVector> pool);

double sigmoid(double x);

// a = 1 iff c >= 0, p = sigmoid(gamma c).
FeedbackDecision decide_deterministic(double c, double gamma);
// Straight-through surrogate for da/dc: gamma s (1 - s), s = sigmoid(gamma c).
double ste_derivative(double c, double gamma);
FeedbackDecision decide_stochastic(double c, double gamma, RngStream& rng);

inline constexpr double kProbClamp = 1e-12;
// a log p + (1 - a) log(1 - p), p clamped to [kProbClamp, 1 - kProbClamp].
double log_prob(int a, double p);
// d log_prob(a, sigmoid(gamma c)) / dc = (a - p) gamma
double grad_logprob_wrt_c(int a, double p, double gamma);

// Default network for the given input mode and array size. full_csi runs two
// tanh conv stages over the N (re, im) pairs; the weight branch of a
// pf_aware policy is concatenated after the conv features (full_csi) or with
// the CQI input (cqi).
nn::NetSpec default_architecture(const PolicyConfig& config, int num_antennas);

}  // namespace selfnom::policy
