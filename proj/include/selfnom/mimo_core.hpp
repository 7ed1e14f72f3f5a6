// SPDX-License-Identifier: Apache-2.0
//
// Zero-forcing precoding, SINR/rate evaluation and conditioning diagnostics
// for a single-cell MU-MIMO downlink with single-antenna users.
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace selfnom::mimo {

using UeId = std::uint32_t;
using ChannelVector = Eigen::VectorXcd;

// Gram matrices with condition number above this are rejected by zf_precoder.
inline constexpr double kMaxGramCondition = 1e12;
// Singular values below this fraction of the largest flag the matrix singular.
inline constexpr double kSingularRatio = 1e-14;

struct PrecodingMatrix {
  Eigen::MatrixXcd columns;  // N x |M|, column m serves the m-th stacked user
  double total_power = 0.0;
};

struct RateReport {
  std::vector<double> sinr;
  std::vector<double> spectral_efficiency;  // log2(1 + sinr)
  std::vector<double> signal_power;         // |h_m^H f_m|^2
  std::vector<double> interference_power;   // sum_{n != m} |h_m^H f_n|^2
  double weighted_sum_rate = 0.0;
};

// Stacks the channels of `ids` into H with row m equal to h_{ids[m]}^H.
Eigen::MatrixXcd stack_channels(std::span<const ChannelVector> channels,
                                std::span<const UeId> ids);

// F = H^H (H H^H)^{-1}, columns rescaled to power P/|M| each.
// Throws RankDeficient when cond(H H^H) > kMaxGramCondition.
PrecodingMatrix zf_precoder(const Eigen::MatrixXcd& h, double total_power);

// Per-user SINR with interference summed explicitly. `weights` is aligned
// with the rows of h.
RateReport compute_rates(const Eigen::MatrixXcd& h, const PrecodingMatrix& f,
                         double noise_power, std::span<const double> weights);

// sigma_max / sigma_min of h; +infinity when sigma_min < kSingularRatio * sigma_max.
double condition_number(const Eigen::MatrixXcd& h);

// d(sum_m w_m R_m)/d(a_m) at a = 1 when every scheduled row h_m is scaled by a
// gain a_m both at the precoder input and on the air. ZF column
// normalization makes F invariant to row scaling, so only the received
// signal and interference terms depend on a_m.
std::vector<double> rate_scale_sensitivity(const RateReport& report, double noise_power,
                                           std::span<const double> weights);

// Convenience: ZF + rates for the users `ids` out of a channel set. Weights
// are indexed by UE id. Throws RankDeficient like zf_precoder.
RateReport evaluate_selection(std::span<const ChannelVector> channels,
                              std::span<const UeId> ids, double total_power,
                              double noise_power, std::span<const double> weights_by_ue);

}  // namespace selfnom::mimo
