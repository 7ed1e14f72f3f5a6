// SPDX-License-Identifier: Apache-2.0

#include "selfnom/mimo_core.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "selfnom/errors.hpp"

namespace selfnom::mimo {

Eigen::MatrixXcd stack_channels(std::span<const ChannelVector> channels,
                                std::span<const UeId> ids) {
  if (ids.empty()) return Eigen::MatrixXcd(0, channels.empty() ? 0 : channels[0].size());
  const Eigen::Index n = channels[ids[0]].size();
  Eigen::MatrixXcd h(static_cast<Eigen::Index>(ids.size()), n);
  for (std::size_t m = 0; m < ids.size(); ++m) {
    const auto& v = channels[ids[m]];
    if (v.size() != n) throw ShapeMismatch("stack_channels: inconsistent antenna count");
    h.row(static_cast<Eigen::Index>(m)) = v.adjoint();
  }
  return h;
}

PrecodingMatrix zf_precoder(const Eigen::MatrixXcd& h, double total_power) {
  const Eigen::Index users = h.rows();
  if (users < 1 || users > h.cols())
    throw ShapeMismatch("zf_precoder: need 1 <= |M| <= N, got |M|=" + std::to_string(users) +
                        " N=" + std::to_string(h.cols()));
  // H^H = Q R, so H H^H = R^H R and F~ = Q R^{-H}. Working on R keeps the
  // error proportional to cond(H) instead of cond(H)^2.
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(h.adjoint());
  const Eigen::MatrixXcd r =
      qr.matrixQR().topRows(users).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r);
  const double hi = svd.singularValues()(0);
  const double lo = svd.singularValues()(users - 1);
  const double gram_condition = (hi / lo) * (hi / lo);
  if (!(lo > 0.0) || !(gram_condition <= kMaxGramCondition))
    throw RankDeficient("zf_precoder: Gram condition exceeds limit");

  const Eigen::MatrixXcd q =
      qr.householderQ() * Eigen::MatrixXcd::Identity(h.cols(), users);
  // R F~^H = Q^H
  const Eigen::MatrixXcd ft_adj =
      r.triangularView<Eigen::Upper>().solve(q.adjoint());
  PrecodingMatrix out;
  out.total_power = total_power;
  out.columns = ft_adj.adjoint();
  const double per_user = std::sqrt(total_power / static_cast<double>(users));
  for (Eigen::Index m = 0; m < users; ++m) {
    const double nrm = out.columns.col(m).norm();
    out.columns.col(m) *= per_user / nrm;
  }
  return out;
}

RateReport compute_rates(const Eigen::MatrixXcd& h, const PrecodingMatrix& f,
                         double noise_power, std::span<const double> weights) {
  const Eigen::Index users = h.rows();
  if (f.columns.cols() != users || f.columns.rows() != h.cols() ||
      weights.size() != static_cast<std::size_t>(users))
    throw ShapeMismatch("compute_rates: dimension mismatch");
  const Eigen::MatrixXcd gain = h * f.columns;  // gain(m, n) = h_m^H f_n
  RateReport r;
  r.sinr.resize(users);
  r.spectral_efficiency.resize(users);
  r.signal_power.resize(users);
  r.interference_power.resize(users);
  for (Eigen::Index m = 0; m < users; ++m) {
    double interference = 0.0;
    for (Eigen::Index n = 0; n < users; ++n)
      if (n != m) interference += std::norm(gain(m, n));
    const double signal = std::norm(gain(m, m));
    const double sinr = signal / (noise_power + interference);
    r.signal_power[m] = signal;
    r.interference_power[m] = interference;
    r.sinr[m] = sinr;
    r.spectral_efficiency[m] = std::log2(1.0 + sinr);
    r.weighted_sum_rate += weights[m] * r.spectral_efficiency[m];
  }
  return r;
}

double condition_number(const Eigen::MatrixXcd& h) {
  if (h.rows() == 0) throw ShapeMismatch("condition_number: empty matrix");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h);
  const auto& s = svd.singularValues();
  const double hi = s.maxCoeff();
  const double lo = s.minCoeff();
  if (!(hi > 0.0) || lo < kSingularRatio * hi) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

std::vector<double> rate_scale_sensitivity(const RateReport& report, double noise_power,
                                           std::span<const double> weights) {
  // R_m(a) = log2(s2 + a^2 (S+I)) - log2(s2 + a^2 I); derivative at a = 1.
  std::vector<double> d(report.sinr.size());
  for (std::size_t m = 0; m < d.size(); ++m) {
    const double s = report.signal_power[m];
    const double i = report.interference_power[m];
    d[m] = weights[m] * 2.0 / std::numbers::ln2 *
           ((s + i) / (noise_power + s + i) - i / (noise_power + i));
  }
  return d;
}

RateReport evaluate_selection(std::span<const ChannelVector> channels,
                              std::span<const UeId> ids, double total_power,
                              double noise_power, std::span<const double> weights_by_ue) {
  const Eigen::MatrixXcd h = stack_channels(channels, ids);
  const PrecodingMatrix f = zf_precoder(h, total_power);
  std::vector<double> w(ids.size());
  for (std::size_t m = 0; m < ids.size(); ++m) w[m] = weights_by_ue[ids[m]];
  return compute_rates(h, f, noise_power, w);
}

}  // namespace selfnom::mimo
