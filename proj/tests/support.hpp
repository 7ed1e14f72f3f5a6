// SPDX-License-Identifier: Apache-2.0
//
// Random instance generators and independent reference implementations used
// by the unit and acceptance tests. The reference implementations do not
// call the library routines they are compared against.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "selfnom/micronet.hpp"
#include "selfnom/mimo_core.hpp"

namespace testing {

using cd = std::complex<double>;
using selfnom::mimo::ChannelVector;
using selfnom::mimo::UeId;

inline cd cgauss(std::mt19937_64& rng, double var = 1.0) {
  std::normal_distribution<double> n(0.0, std::sqrt(var / 2.0));
  return {n(rng), n(rng)};
}

inline ChannelVector random_channel(std::mt19937_64& rng, int n, double var = 1.0) {
  ChannelVector h(n);
  for (auto& v : h) v = cgauss(rng, var);
  return h;
}

inline std::vector<ChannelVector> random_channels(std::mt19937_64& rng, std::size_t k, int n,
                                                  double var = 1.0) {
  std::vector<ChannelVector> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(random_channel(rng, n, var));
  return out;
}

inline Eigen::MatrixXcd random_matrix(std::mt19937_64& rng, int rows, int cols) {
  Eigen::MatrixXcd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = cgauss(rng);
  return m;
}

// Singular values in decreasing order via LAPACK zgesvd.
std::vector<double> lapack_singular_values(const Eigen::MatrixXcd& a);

// Unnormalized ZF precoder H^H (H H^H)^{-1} from the textbook formula with
// an explicit partial-pivot LU solve, columns rescaled to P/|M|.
inline Eigen::MatrixXcd oracle_zf(const Eigen::MatrixXcd& h, double p) {
  const Eigen::MatrixXcd gram = h * h.adjoint();
  Eigen::MatrixXcd f = h.adjoint() * gram.partialPivLu().solve(
                                         Eigen::MatrixXcd::Identity(h.rows(), h.rows()));
  const double per = p / static_cast<double>(h.rows());
  for (Eigen::Index m = 0; m < f.cols(); ++m) f.col(m) *= std::sqrt(per) / f.col(m).norm();
  return f;
}

struct OracleRates {
  std::vector<double> sinr;
  double weighted_sum_rate = 0.0;
};

// Term-by-term scalar loops: SINR_m = |h_m^H f_m|^2 / (sigma2 + sum_{n != m} |h_m^H f_n|^2).
inline OracleRates oracle_rates(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& f, double sigma2,
                                const std::vector<double>& w) {
  OracleRates r;
  for (Eigen::Index m = 0; m < h.rows(); ++m) {
    double sig = 0.0, intf = 0.0;
    for (Eigen::Index n = 0; n < f.cols(); ++n) {
      cd acc = 0.0;
      for (Eigen::Index i = 0; i < h.cols(); ++i) acc += h(m, i) * f(i, n);
      if (n == m) sig = std::norm(acc);
      else intf += std::norm(acc);
    }
    const double s = sig / (sigma2 + intf);
    r.sinr.push_back(s);
    r.weighted_sum_rate += w[static_cast<std::size_t>(m)] * std::log2(1.0 + s);
  }
  return r;
}

inline Eigen::MatrixXcd oracle_stack(const std::vector<ChannelVector>& ch, const std::vector<UeId>& ids) {
  Eigen::MatrixXcd h(static_cast<Eigen::Index>(ids.size()), ch.front().size());
  for (std::size_t m = 0; m < ids.size(); ++m)
    for (Eigen::Index i = 0; i < h.cols(); ++i) h(static_cast<Eigen::Index>(m), i) = std::conj(ch[ids[m]][i]);
  return h;
}

// Weighted ZF sum rate of a user subset; -inf when the Gram matrix is singular
// to working precision.
inline double oracle_subset_value(const std::vector<ChannelVector>& ch, const std::vector<UeId>& ids,
                                  const std::vector<double>& w_by_ue, double p, double sigma2) {
  if (ids.empty()) return 0.0;
  const Eigen::MatrixXcd h = oracle_stack(ch, ids);
  const std::vector<double> sv = lapack_singular_values(h);
  if (sv.back() < 1e-6 * sv.front()) return -std::numeric_limits<double>::infinity();
  std::vector<double> w;
  for (auto id : ids) w.push_back(w_by_ue[id]);
  return oracle_rates(h, oracle_zf(h, p), sigma2, w).weighted_sum_rate;
}

// Calls fn on every subset of {0..n-1} with size in [lo, hi].
inline void for_each_subset(std::size_t n, std::size_t lo, std::size_t hi,
                            const std::function<void(const std::vector<UeId>&)>& fn) {
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    const auto c = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (c < lo || c > hi) continue;
    std::vector<UeId> s;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s.push_back(static_cast<UeId>(i));
    fn(s);
  }
}

// Central differences of f around x, coordinate by coordinate.
inline Eigen::VectorXd central_diff(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = xp[i];
    xp[i] = orig + step;
    const double fp = f(xp);
    xp[i] = orig - step;
    const double fm = f(xp);
    xp[i] = orig;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

// Random valid network spec with up to `max_layers` parametrized layers
// (conv, dense, batchnorm) interleaved with tanh, optionally with a side branch.
selfnom::nn::NetSpec random_spec(std::mt19937_64& rng, int max_layers, bool allow_side);

// Fixed-channel policy-gradient instance: full-CSI features with unit scale,
// opportunistic scheduling over the nominated UEs, unit weights.
struct PgInstance {
  std::vector<ChannelVector> channels;
  selfnom::nn::Network net{selfnom::nn::NetSpec{1, 0, {}, {selfnom::nn::LayerSpec::dense(1, 1)}}};
  double gamma = 1.0;
  double lambda = 0.0;
  double n_fb = 1.0;
  std::size_t m_max = 1;
  double total_power = 1.0;
  double noise_power = 1.0;
};

PgInstance make_pg_instance(std::uint64_t seed, std::size_t num_ues = 3, int num_antennas = 2);

// Expected Lagrangian sum_a pi(a; theta) L(a) by enumerating every joint action.
double pg_expected_lagrangian(const PgInstance& inst, const Eigen::VectorXd& theta);
Eigen::VectorXd pg_exact_gradient(const PgInstance& inst);

struct McGradient {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_error;
};
// Library estimator averaged over `samples` sampled actions, drawn in
// batches of `batch` (std_error from the spread of the batch means).
McGradient pg_monte_carlo(const PgInstance& inst, std::size_t samples, std::size_t batch,
                          std::uint64_t seed);

}  // namespace testing
