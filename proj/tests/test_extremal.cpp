// Extremal quadruples and the events built on them.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "evlab/engine.hpp"
#include "evlab/extremal.hpp"

using namespace evlab;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Draw {
  std::vector<double> x;
  std::vector<std::uint8_t> e;
};

Draw random_draw(std::mt19937_64& rng, std::size_t n, double p) {
  std::normal_distribution<double> z;
  std::bernoulli_distribution b(p);
  Draw d;
  for (std::size_t i = 0; i < n; ++i) {
    d.x.push_back(z(rng));
    d.e.push_back(b(rng));
  }
  return d;
}

}  // namespace

TEST(Quadruple, SmallExample) {
  const auto nc = gaussian_norming(3);
  const auto q = compute_quadruple(std::vector<double>{1.0, -2.0, 0.5}, std::vector<std::uint8_t>{0, 1, 1}, nc);
  EXPECT_EQ(q.max_eps, 0.5);
  EXPECT_EQ(q.min_eps, -2.0);
  EXPECT_EQ(q.max, 1.0);
  EXPECT_EQ(q.min, -2.0);
  EXPECT_EQ(q.s_n, 2u);
  ASSERT_TRUE(q.normalized.has_value());
  EXPECT_DOUBLE_EQ(q.normalized->max, (1.0 - nc.b) / nc.a);
  EXPECT_DOUBLE_EQ(q.normalized->min_eps, normalize_min(nc, -2.0));
}

TEST(Quadruple, AllObservedCoincides) {
  std::mt19937_64 rng(1);
  const auto d = random_draw(rng, 500, 1.0);
  const auto q = compute_quadruple(d.x, d.e, gaussian_norming(500));
  EXPECT_EQ(q.max_eps, q.max);
  EXPECT_EQ(q.min_eps, q.min);
  EXPECT_EQ(q.s_n, 500u);
}

TEST(Quadruple, NothingObservedUsesSentinels) {
  const std::vector<double> x{0.3, -0.1, 2.0};
  const std::vector<std::uint8_t> e(3, 0);
  const auto q = compute_quadruple(x, e, gaussian_norming(3));
  EXPECT_EQ(q.s_n, 0u);
  EXPECT_FALSE(q.observed_any());
  EXPECT_EQ(q.max_eps, -inf);
  EXPECT_EQ(q.min_eps, inf);
  EXPECT_EQ(q.max, 2.0);

  const auto bounded = compute_quadruple(x, e, gaussian_norming(3), Support{-5.0, 5.0});
  EXPECT_EQ(bounded.max_eps, -5.0);
  EXPECT_EQ(bounded.min_eps, 5.0);

  // the observed constraint is vacuous, only the outer one counts
  const RawThresholds t{-10.0, 10.0, 2.5, -1.0};
  EXPECT_TRUE(event_holds(q, t));
  EXPECT_FALSE(event_holds(q, {0.0, 0.0, 1.0, -1.0}));
}

TEST(Quadruple, RejectsBadInput) {
  const auto nc = gaussian_norming(3);
  EXPECT_THROW(compute_quadruple(std::vector<double>{1, 2, 3}, std::vector<std::uint8_t>{1, 1}, nc), InputError);
  EXPECT_THROW(compute_quadruple(std::vector<double>{1, 2}, std::vector<std::uint8_t>{1, 1}, nc), InputError);
}

TEST(Quadruple, OrderingAndFlipMonotonicity) {
  std::mt19937_64 rng(2);
  const auto nc = gaussian_norming(40);
  for (int r = 0; r < 2000; ++r) {
    auto d = random_draw(rng, 40, 0.3);
    const auto q = compute_quadruple(d.x, d.e, nc);
    if (q.s_n > 0) {
      ASSERT_LE(q.min, q.min_eps);
      ASSERT_LE(q.min_eps, q.max_eps);
      ASSERT_LE(q.max_eps, q.max);
    }
    const std::size_t i = rng() % 40;
    if (d.e[i]) continue;
    d.e[i] = 1;
    const auto q2 = compute_quadruple(d.x, d.e, nc);
    ASSERT_GE(q2.max_eps, q.max_eps);
    ASSERT_LE(q2.min_eps, q.min_eps);
    ASSERT_EQ(q2.max, q.max);
    ASSERT_EQ(q2.min, q.min);
  }
}

TEST(Quadruple, NegationSwapsMaxAndMin) {
  std::mt19937_64 rng(3);
  const auto nc = gaussian_norming(60);
  for (int r = 0; r < 500; ++r) {
    auto d = random_draw(rng, 60, 0.5);
    const auto q = compute_quadruple(d.x, d.e, nc);
    for (double& v : d.x) v = -v;
    const auto n = compute_quadruple(d.x, d.e, nc);
    ASSERT_EQ(n.max, -q.min);
    ASSERT_EQ(n.min, -q.max);
    ASSERT_EQ(n.max_eps, -q.min_eps);
    ASSERT_EQ(n.min_eps, -q.max_eps);
    ASSERT_DOUBLE_EQ(n.normalized->max, q.normalized->min);
  }
}

TEST(Events, RawAndNormalizedFormsAgree) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> lvl(-1.5, 3.0);
  const std::size_t n = 200;
  const auto nc = gaussian_norming(n);
  int hits = 0;
  for (int r = 0; r < 3000; ++r) {
    const auto d = random_draw(rng, n, 0.5);
    const auto q = compute_quadruple(d.x, d.e, nc);
    double x2 = lvl(rng), x1 = lvl(rng);
    if (x2 > x1) std::swap(x2, x1);
    const ThresholdQuad quad{x2, lvl(rng), x1, lvl(rng)};
    const auto& z = *q.normalized;
    // v_n(y) = -c y - d, so m > v_n(y) reads (-m - d)/c < y
    const bool normalized = z.max <= quad.x1 && z.min < quad.y1 && z.max_eps <= quad.x2 && z.min_eps < quad.y2;
    const bool raw = event_holds(q, raw_thresholds(nc, quad));
    ASSERT_EQ(raw, normalized) << r;
    hits += raw;
    ASSERT_EQ(raw, max_event_holds(q, raw_thresholds(nc, quad)) && min_event_holds(q, raw_thresholds(nc, quad)));
  }
  EXPECT_GT(hits, 100);
}

TEST(Events, WiderThresholdsOnlyAddHits) {
  std::mt19937_64 rng(5);
  const auto nc = gaussian_norming(100);
  for (int r = 0; r < 1000; ++r) {
    const auto d = random_draw(rng, 100, 0.4);
    const auto q = compute_quadruple(d.x, d.e, nc);
    const auto t = raw_thresholds(nc, {0.0, 1.0, 1.0, 0.0});
    const auto wide = raw_thresholds(nc, {0.5, 1.5, 1.5, 0.5});
    if (event_holds(q, t)) {
      ASSERT_TRUE(event_holds(q, wide));
    }
  }
}
