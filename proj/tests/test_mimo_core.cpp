// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "selfnom/errors.hpp"
#include "selfnom/mimo_core.hpp"
#include "support.hpp"

using namespace selfnom;
using namespace selfnom::mimo;
using testing::cd;

namespace {

double max_residual(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& f) {
  double worst = 0.0;
  for (Eigen::Index m = 0; m < h.rows(); ++m)
    for (Eigen::Index n = 0; n < f.cols(); ++n) {
      if (n == m) continue;
      const double r = std::abs(h.row(m).dot(f.col(n).conjugate())) / (h.row(m).norm() * f.col(n).norm());
      worst = std::max(worst, r);
    }
  return worst;
}

}  // namespace

TEST_CASE("zf: single user along antenna 1") {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(1, 4);
  h(0, 0) = 1.0;
  const PrecodingMatrix f = zf_precoder(h, 1.0);
  CHECK(std::abs(f.columns(0, 0) - cd(1.0, 0.0)) < 1e-14);
  CHECK(f.columns.col(0).squaredNorm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("zf: orthonormal rows give their conjugates") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXcd q = testing::random_matrix(rng, 6, 6).householderQr().householderQ();
  const Eigen::MatrixXcd h = q.topRows(2);
  const PrecodingMatrix f = zf_precoder(h, 2.0);
  for (Eigen::Index m = 0; m < 2; ++m) {
    CHECK((f.columns.col(m) - h.row(m).adjoint()).norm() < 1e-12);
    CHECK(f.columns.col(m).squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("zf: residuals and column power on random instances") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 16)(rng);
    const int m = std::uniform_int_distribution<int>(1, n)(rng);
    const Eigen::MatrixXcd h = testing::random_matrix(rng, m, n);
    const double p = 0.5 + 3.0 * testing::cgauss(rng).real() * testing::cgauss(rng).real();
    const double pw = std::abs(p) + 0.1;
    const PrecodingMatrix f = zf_precoder(h, pw);
    CHECK(max_residual(h, f.columns) <= 1e-9);
    for (Eigen::Index c = 0; c < m; ++c)
      CHECK(std::abs(f.columns.col(c).squaredNorm() - pw / m) <= 1e-10 * pw / m);
    CHECK(std::abs(f.columns.squaredNorm() - pw) <= 1e-10 * pw);
  }
}

TEST_CASE("zf: agrees with the explicit-inverse formula") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXcd h = testing::random_matrix(rng, 4, 8);
    const PrecodingMatrix f = zf_precoder(h, 3.0);
    const Eigen::MatrixXcd ref = testing::oracle_zf(h, 3.0);
    CHECK((f.columns - ref).norm() <= 1e-10 * ref.norm());
  }
}

TEST_CASE("zf: condition up to 1e6 keeps residuals below 1e-8") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 16, m = 8;
    const Eigen::MatrixXcd u = testing::random_matrix(rng, m, m).householderQr().householderQ();
    const Eigen::MatrixXcd v = testing::random_matrix(rng, n, n).householderQr().householderQ();
    Eigen::VectorXd s(m);
    const double kappa = std::pow(10.0, 3.0 + 2.999 * trial / 49.0);
    for (int i = 0; i < m; ++i) s[i] = std::pow(kappa, -static_cast<double>(i) / (m - 1));
    const Eigen::MatrixXcd h = u * s.asDiagonal() * v.leftCols(m).adjoint();
    const PrecodingMatrix f = zf_precoder(h, 1.0);
    CHECK(max_residual(h, f.columns) <= 1e-8);
  }
}

TEST_CASE("zf: errors") {
  std::mt19937_64 rng(14);
  Eigen::MatrixXcd h = testing::random_matrix(rng, 2, 4);
  h.row(1) = h.row(0);
  CHECK_THROWS_AS(zf_precoder(h, 1.0), RankDeficient);
  CHECK_THROWS_AS(zf_precoder(testing::random_matrix(rng, 5, 4), 1.0), ShapeMismatch);
  CHECK_THROWS_AS(zf_precoder(Eigen::MatrixXcd(0, 4), 1.0), ShapeMismatch);
}

TEST_CASE("compute_rates: orthonormal users") {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 4);
  h(0, 0) = 1.0;
  h(1, 2) = cd(0.0, 1.0);
  const PrecodingMatrix f = zf_precoder(h, 2.0);
  const std::vector<double> w{1.0, 1.0};
  const RateReport r = compute_rates(h, f, 1.0, w);
  CHECK(r.sinr[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.sinr[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.weighted_sum_rate == doctest::Approx(2.0).epsilon(1e-12));
  const std::vector<double> zero{0.0, 0.0};
  CHECK(compute_rates(h, f, 1.0, zero).weighted_sum_rate == 0.0);
}

TEST_CASE("compute_rates: scalar oracle with a non-ZF precoder") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXcd h = testing::random_matrix(rng, 3, 6);
    PrecodingMatrix f;
    f.columns = testing::random_matrix(rng, 6, 3);
    f.total_power = f.columns.squaredNorm();
    const std::vector<double> w{0.3, 1.0, 2.5};
    const RateReport r = compute_rates(h, f, 0.7, w);
    const testing::OracleRates o = testing::oracle_rates(h, f.columns, 0.7, w);
    for (int m = 0; m < 3; ++m) {
      CHECK(std::abs(r.sinr[m] - o.sinr[m]) <= 1e-12 * std::max(1.0, o.sinr[m]));
      CHECK(r.spectral_efficiency[m] == doctest::Approx(std::log2(1.0 + r.sinr[m])).epsilon(1e-15));
      // interference only lowers the SINR below the interference-free value
      CHECK(r.sinr[m] <= r.signal_power[m] / 0.7 + 1e-15);
    }
    CHECK(std::abs(r.weighted_sum_rate - o.weighted_sum_rate) <= 1e-12 * std::max(1.0, o.weighted_sum_rate));
  }
}

TEST_CASE("compute_rates: common phase rotation leaves SINR unchanged") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXcd h = testing::random_matrix(rng, 4, 8);
    const cd phase = std::polar(1.0, 2.0 * M_PI * testing::cgauss(rng).real());
    const Eigen::MatrixXcd hr = phase * h;
    const std::vector<double> w(4, 1.0);
    const RateReport a = compute_rates(h, zf_precoder(h, 1.0), 0.1, w);
    const RateReport b = compute_rates(hr, zf_precoder(hr, 1.0), 0.1, w);
    for (int m = 0; m < 4; ++m) CHECK(std::abs(a.sinr[m] - b.sinr[m]) <= 1e-10 * a.sinr[m]);
  }
}

TEST_CASE("condition_number") {
  std::mt19937_64 rng(17);
  const Eigen::MatrixXcd q = testing::random_matrix(rng, 5, 5).householderQr().householderQ();
  CHECK(condition_number(q.topRows(3)) == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::MatrixXcd dup = testing::random_matrix(rng, 2, 5);
  dup.row(1) = dup.row(0);
  CHECK(std::isinf(condition_number(dup)));
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXcd h = testing::random_matrix(rng, 5, 8);
    const std::vector<double> sv = testing::lapack_singular_values(h);
    const double ref = sv.front() / sv.back();
    CHECK(std::abs(condition_number(h) - ref) <= 1e-8 * ref);
  }
}

TEST_CASE("rate_scale_sensitivity matches finite differences of the scaled pipeline") {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 6, m = 3;
    const Eigen::MatrixXcd h = testing::random_matrix(rng, m, n);
    const std::vector<double> w{0.5, 1.0, 2.0};
    const double p = 2.0, sigma2 = 0.3;
    const RateReport base = compute_rates(h, zf_precoder(h, p), sigma2, w);
    const std::vector<double> g = rate_scale_sensitivity(base, sigma2, w);
    for (int k = 0; k < m; ++k) {
      auto value = [&](double a) {
        Eigen::MatrixXcd hs = h;
        hs.row(k) *= a;
        return testing::oracle_rates(hs, testing::oracle_zf(hs, p), sigma2, w).weighted_sum_rate;
      };
      const double step = 1e-6;
      const double fd = (value(1.0 + step) - value(1.0 - step)) / (2.0 * step);
      CHECK(std::abs(g[k] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("evaluate_selection uses weights indexed by UE id") {
  std::mt19937_64 rng(19);
  const auto ch = testing::random_channels(rng, 5, 8);
  const std::vector<UeId> ids{3, 1};
  const std::vector<double> w{0.0, 2.0, 0.0, 0.5, 0.0};
  const RateReport r = evaluate_selection(ch, ids, 1.0, 0.1, w);
  const Eigen::MatrixXcd h = testing::oracle_stack(ch, ids);
  const double ref = testing::oracle_rates(h, testing::oracle_zf(h, 1.0), 0.1, {0.5, 2.0}).weighted_sum_rate;
  CHECK(r.weighted_sum_rate == doctest::Approx(ref).epsilon(1e-12));
}
