// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "selfnom/scheduling.hpp"
#include "support.hpp"

using namespace selfnom;
using namespace selfnom::sched;
using testing::cd;

namespace {

std::vector<UeId> iota_ids(std::size_t n) {
  std::vector<UeId> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<UeId>(i);
  return v;
}

bool is_subset(const std::vector<UeId>& sel, const std::vector<UeId>& cand) {
  std::set<UeId> c(cand.begin(), cand.end());
  std::set<UeId> s(sel.begin(), sel.end());
  return s.size() == sel.size() && std::all_of(sel.begin(), sel.end(), [&](UeId k) { return c.count(k) > 0; });
}

double corr(const ChannelVector& a, const ChannelVector& b) {
  return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

}  // namespace

TEST_CASE("random_schedule: small sets pass through, large sets are uniform") {
  RngStream rng = make_stream(1, {0});
  const std::vector<UeId> three{4, 1, 7};
  CHECK(random_schedule(three, 5, rng).selected == three);
  const std::vector<UeId> five = iota_ids(5);
  const Schedule s = random_schedule(five, 3, rng);
  CHECK(s.selected.size() == 3);
  CHECK(is_subset(s.selected, five));

  const std::vector<UeId> four = iota_ids(4);
  std::map<std::pair<UeId, UeId>, int> freq;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    std::vector<UeId> sel = random_schedule(four, 2, rng).selected;
    std::sort(sel.begin(), sel.end());
    ++freq[{sel[0], sel[1]}];
  }
  CHECK(freq.size() == 6);
  const double p = 1.0 / 6.0, sd = std::sqrt(n * p * (1 - p));
  for (const auto& [k, c] : freq) CHECK(std::abs(c - n * p) <= 3.0 * sd);
}

TEST_CASE("opportunistic_schedule examples") {
  std::vector<ChannelVector> ch;
  for (double nrm : {3.0, 1.0, 2.0, 5.0}) {
    ChannelVector h = ChannelVector::Zero(2);
    h[0] = std::sqrt(nrm);
    ch.push_back(h);
  }
  const std::vector<UeId> all = iota_ids(4);
  CHECK(opportunistic_schedule(all, ch, 2).selected == std::vector<UeId>{3, 0});
  CHECK(opportunistic_schedule(all, ch, 4).selected.size() == 4);
  ch[1] = ch[0];
  CHECK(opportunistic_schedule(all, ch, 2).selected == std::vector<UeId>{3, 0});
}

TEST_CASE("opportunistic_schedule equals the exhaustive norm-sum maximizer") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 1 + rng() % 10, m = 1 + rng() % 4;
    const auto ch = testing::random_channels(rng, k, 4);
    const double scale = 0.1 + (rng() % 100);
    std::vector<ChannelVector> scaled;
    for (const auto& h : ch) scaled.push_back(h * std::sqrt(scale));
    const std::vector<UeId> ids = iota_ids(k);
    double best = -1.0;
    std::vector<UeId> arg;
    testing::for_each_subset(k, std::min(k, m), std::min(k, m), [&](const std::vector<UeId>& s) {
      double v = 0.0;
      for (auto i : s) v += ch[i].squaredNorm();
      if (v > best) best = v, arg = s;
    });
    std::vector<UeId> got = opportunistic_schedule(ids, ch, m).selected;
    std::vector<UeId> got_scaled = opportunistic_schedule(ids, scaled, m).selected;
    CHECK(got == got_scaled);
    std::sort(got.begin(), got.end());
    CHECK(got == arg);
  }
}

TEST_CASE("sus_schedule examples and pairwise threshold") {
  std::vector<ChannelVector> orth;
  for (int i = 0; i < 4; ++i) {
    ChannelVector h = ChannelVector::Zero(4);
    h[i] = 1.0 + i;
    orth.push_back(h);
  }
  CHECK(sus_schedule(iota_ids(4), orth, 4).selected == std::vector<UeId>{3, 2, 1, 0});
  std::vector<ChannelVector> twins{orth[1], orth[1]};
  CHECK(sus_schedule(iota_ids(2), twins, 2, 0.5).selected.size() == 1);
  CHECK_THROWS_AS(sus_schedule(iota_ids(2), twins, 2, 1.5), std::invalid_argument);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ch = testing::random_channels(rng, 12, 8);
    const double alpha = 0.2 + 0.05 * (trial % 10);
    const std::vector<UeId> ids = iota_ids(12);
    const Schedule s = sus_schedule(ids, ch, 6, alpha);
    CHECK(!s.selected.empty());
    CHECK(s.selected.size() <= 6);
    CHECK(is_subset(s.selected, ids));
    for (std::size_t a = 0; a < s.selected.size(); ++a)
      for (std::size_t b = a + 1; b < s.selected.size(); ++b)
        CHECK(corr(ch[s.selected[a]], ch[s.selected[b]]) <= alpha + 1e-12);
  }
}

TEST_CASE("pf_schedule examples") {
  std::mt19937_64 rng(5);
  const auto one = testing::random_channels(rng, 1, 4);
  const std::vector<double> w1{0.3};
  CHECK(pf_schedule(iota_ids(1), one, 2, w1, 10.0, 1.0).selected == std::vector<UeId>{0});

  std::vector<ChannelVector> orth{ChannelVector::Zero(2), ChannelVector::Zero(2)};
  orth[0][0] = 1.0;
  orth[1][1] = 1.0;
  const std::vector<double> w2{1.0, 1.0};
  const Schedule s = pf_schedule(iota_ids(2), orth, 2, w2, 10.0, 1.0);
  CHECK(s.selected.size() == 2);
  std::vector<ChannelVector> twins{orth[0], orth[0]};
  CHECK(pf_schedule(iota_ids(2), twins, 2, w2, 10.0, 1.0).selected.size() == 1);
}

TEST_CASE("pf_schedule greedy vs exhaustive optimum") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uw(0.1, 2.0);
  int exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto ch = testing::random_channels(rng, 6, 4);
    std::vector<double> w(6);
    for (auto& x : w) x = uw(rng);
    double best = 0.0;
    testing::for_each_subset(6, 1, 3, [&](const std::vector<UeId>& s) {
      best = std::max(best, testing::oracle_subset_value(ch, s, w, 10.0, 1.0));
    });
    const Schedule g = pf_schedule(iota_ids(6), ch, 3, w, 10.0, 1.0);
    CHECK(g.selected.size() <= 3);
    const double v = testing::oracle_subset_value(ch, g.selected, w, 10.0, 1.0);
    CHECK(v >= 0.5 * best);
    if (v >= best * (1 - 1e-9)) ++exact;
  }
  CHECK(exact >= 80);
}

TEST_CASE("every scheduler returns a subset of size at most M") {
  std::mt19937_64 rng(8);
  RngStream r = make_stream(8, {1});
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + rng() % 12, m = 1 + rng() % 5;
    const auto ch = testing::random_channels(rng, 16, 4);
    std::vector<UeId> cand;
    for (UeId i = 0; i < 16 && cand.size() < k; i += 1 + static_cast<UeId>(rng() % 2)) cand.push_back(i);
    const std::vector<double> w(16, 1.0);
    for (auto kind : {SchedulerKind::Random, SchedulerKind::Opportunistic, SchedulerKind::Sus, SchedulerKind::Pf}) {
      const Schedule s = run_scheduler({kind, m, 0.3, 10.0, 1.0}, cand, ch, w, r);
      CHECK(s.method == kind);
      CHECK(s.selected.size() <= m);
      CHECK(is_subset(s.selected, cand));
    }
  }
}

TEST_CASE("running average") {
  PfState s = PfState::initial(3, 1.0);
  const std::vector<double> r{0.5, 2.0, 3.0};
  CHECK(update_running_avg(s, r).rbar == r);

  PfState slow = PfState::initial(1, 1000.0);
  const std::vector<double> zero{0.0};
  for (int t = 0; t < 1000; ++t) slow = update_running_avg(slow, zero);
  CHECK(slow.weights()[0] == doctest::Approx(2.7196).epsilon(0.0005 / 2.7196));
  CHECK(slow.t == 1001);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 5.0), ue(1.0, 50.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double eps = ue(rng);
    PfState st = PfState::initial(4, eps);
    std::vector<double> oracle(4, 1.0);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> rt(4);
      for (auto& x : rt) x = (rng() % 3 == 0) ? 0.0 : u(rng);
      st = update_running_avg(st, rt);
      for (int k = 0; k < 4; ++k) oracle[k] = (1 - 1 / eps) * oracle[k] + rt[k] / eps;
      for (int k = 0; k < 4; ++k) CHECK(st.rbar[k] > 0.0);
    }
    for (int k = 0; k < 4; ++k) CHECK(std::abs(st.rbar[k] - oracle[k]) <= 1e-12);
  }

  PfState starved = PfState::initial(1, 1.0);
  starved = update_running_avg(starved, zero);
  CHECK(starved.weights()[0] == kMaxPfWeight);
}
