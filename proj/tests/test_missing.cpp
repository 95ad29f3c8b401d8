// Indicator mechanisms, the law of P and the Ky Fan estimate.

#include <cmath>
#include <map>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "evlab/genpath.hpp"
#include "evlab/missing.hpp"

using namespace evlab;

TEST(DrawIndicators, PointMassOneObservesEverything) {
  const auto draw = draw_indicators(MissingnessModel::exchangeable(PDistribution::point_mass(1.0)), 500, {1, 0});
  EXPECT_EQ(draw.s_n, 500u);
  ASSERT_TRUE(draw.realized_p.has_value());
  EXPECT_EQ(*draw.realized_p, 1.0);
}

TEST(DrawIndicators, BernoulliFraction) {
  const std::size_t n = 1'000'000;
  const auto draw = draw_indicators(MissingnessModel::iid_bernoulli(0.5), n, {2, 0});
  EXPECT_NEAR(double(draw.s_n) / n, 0.5, 0.0015);
  EXPECT_FALSE(draw.realized_p.has_value());
  std::size_t ones = 0;
  for (auto e : draw.indicators) ones += e;
  EXPECT_EQ(ones, draw.s_n);
}

TEST(DrawIndicators, ExchangeableConcentratesAroundRealizedP) {
  const std::size_t n = 100'000;
  const auto model = MissingnessModel::exchangeable(PDistribution::uniform(0.0, 1.0));
  int inside = 0;
  const int reps = 300;
  for (int r = 0; r < reps; ++r) {
    const auto draw = draw_indicators(model, n, {3, std::uint64_t(r)});
    const double p = *draw.realized_p;
    if (std::abs(double(draw.s_n) / n - p) <= 3.0 * std::sqrt(p * (1 - p) / n)) ++inside;
  }
  EXPECT_GE(inside, int(0.99 * reps));
}

TEST(DrawIndicators, MarkovChainIsStationary) {
  const auto model = MissingnessModel::two_state_markov(0.1, 0.3);
  EXPECT_DOUBLE_EQ(model.stationary_probability(), 0.25);
  const std::size_t n = 1'000'000;
  const auto draw = draw_indicators(model, n, {4, 0});
  // chain eigenvalue 0.6 inflates the variance by 1.6/0.4: se ~ 0.0009
  EXPECT_NEAR(double(draw.s_n) / n, 0.25, 0.006);
  std::size_t from1 = 0, to0 = 0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (draw.indicators[i] == 1) {
      ++from1;
      to0 += draw.indicators[i + 1] == 0;
    }
  EXPECT_NEAR(double(to0) / from1, 0.3, 0.005);
  EXPECT_EQ(model.limit_distribution(n), PDistribution::point_mass(0.25));
}

TEST(DrawIndicators, PatternsCycleByReplicate) {
  const auto model = MissingnessModel::deterministic_pattern({{1, 0, 1, 1}, {0, 0, 0, 1}});
  EXPECT_EQ(draw_indicators(model, 4, {0, 0}).s_n, 3u);
  EXPECT_EQ(draw_indicators(model, 4, {0, 1}).s_n, 1u);
  EXPECT_EQ(draw_indicators(model, 3, {0, 2}).indicators, (std::vector<std::uint8_t>{1, 0, 1}));
  EXPECT_THROW(draw_indicators(model, 5, {0, 0}), InputError);
  const auto pd = model.limit_distribution(4);
  ASSERT_EQ(pd.kind, PDistribution::Kind::discrete);
  EXPECT_DOUBLE_EQ(pd.atoms[0].value, 0.75);
  EXPECT_DOUBLE_EQ(pd.atoms[1].value, 0.25);
}

TEST(DrawIndicators, ExchangeablePointMassMatchesBernoulliInLaw) {
  const std::size_t n = 20;
  const int reps = 10'000;
  std::map<std::size_t, std::pair<double, double>> counts;
  for (int r = 0; r < reps; ++r) {
    counts[draw_indicators(MissingnessModel::iid_bernoulli(0.3), n, {5, std::uint64_t(r)}).s_n].first += 1;
    counts[draw_indicators(MissingnessModel::exchangeable(PDistribution::point_mass(0.3)), n, {6, std::uint64_t(r)})
               .s_n]
        .second += 1;
  }
  // two-sample homogeneity test, pooling cells with expected count < 5
  double chi2 = 0.0;
  int cells = 0;
  double pa = 0, pb = 0;
  auto flush = [&](double a, double b) {
    const double e = (a + b) / 2.0;
    chi2 += (a - e) * (a - e) / e + (b - e) * (b - e) / e;
    ++cells;
  };
  for (const auto& [s, ab] : counts) {
    pa += ab.first;
    pb += ab.second;
    if ((pa + pb) / 2.0 >= 5.0) {
      flush(pa, pb);
      pa = pb = 0;
    }
  }
  if (pa + pb > 0) flush(pa, pb);
  const boost::math::chi_squared dist(cells - 1);
  EXPECT_LT(chi2, boost::math::quantile(dist, 0.99));
}

TEST(DrawIndicators, IndependentOfPathStream) {
  const std::size_t n = 1'000'000;
  const SeedInfo seed{7, 3};
  const auto path = generate_iid(n, seed);
  const auto draw = draw_indicators(MissingnessModel::iid_bernoulli(0.5), n, seed);
  double sx = 0, se = 0, sxx = 0, see = 0, sxe = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = path.values[i], e = draw.indicators[i];
    sx += x;
    se += e;
    sxx += x * x;
    see += e * e;
    sxe += x * e;
  }
  const double N = double(n);
  const double cov = sxe / N - (sx / N) * (se / N);
  const double corr = cov / std::sqrt((sxx / N - sx * sx / N / N) * (see / N - se * se / N / N));
  EXPECT_NEAR(corr, 0.0, 0.003);
}

TEST(PDistribution, Validation) {
  EXPECT_THROW(PDistribution::point_mass(1.5), InputError);
  EXPECT_THROW(PDistribution::uniform(0.5, 0.5), InputError);
  EXPECT_THROW(PDistribution::beta_distribution(0.0, 1.0), InputError);
  EXPECT_THROW(PDistribution::discrete({{0.2, 0.5}, {0.4, 0.4}}), InputError);
  EXPECT_THROW(PDistribution::discrete({}), InputError);
  EXPECT_NO_THROW(PDistribution::discrete({{0.2, 0.5}, {0.4, 0.5}}));
  EXPECT_THROW(MissingnessModel::two_state_markov(0.0, 0.0), InputError);
  EXPECT_THROW(MissingnessModel::deterministic_pattern({{1, 2}}), InputError);
}

TEST(PDistribution, BetaSamplesHaveBetaMoments) {
  const auto pd = PDistribution::beta_distribution(2.0, 5.0);
  Engine engine = make_engine({8, 0}, Stream::auxiliary);
  const int m = 200'000;
  double s = 0, ss = 0;
  for (int i = 0; i < m; ++i) {
    const double p = pd.sample(engine);
    ASSERT_GE(p, 0.0);
    ASSERT_LE(p, 1.0);
    s += p;
    ss += p * p;
  }
  const double mean = s / m, var = ss / m - mean * mean;
  const double true_var = 2.0 * 5.0 / (49.0 * 8.0);
  EXPECT_NEAR(mean, 2.0 / 7.0, 5 * std::sqrt(true_var / m));
  EXPECT_NEAR(var, true_var, 0.001);
  EXPECT_DOUBLE_EQ(pd.mean(), 2.0 / 7.0);
}

TEST(KyFan, BernoulliConcentrates) {
  EXPECT_LE(kyfan_estimate(MissingnessModel::iid_bernoulli(0.4), 1'000'000, 100, 9), 0.01);
  EXPECT_THROW(kyfan_estimate(MissingnessModel::iid_bernoulli(0.4), 100, 99, 9), InputError);
}

TEST(KyFan, AlternatingPattern) {
  const std::size_t n = 1001;
  std::vector<std::uint8_t> alt(n);
  for (std::size_t i = 0; i < n; ++i) alt[i] = i % 2 == 0;
  // reference P = 0.5 via a pattern whose full line has half ones
  std::vector<std::uint8_t> line = alt;
  line.push_back(0);
  const auto model = MissingnessModel::deterministic_pattern({line});
  EXPECT_LE(kyfan_estimate(model, n, 100, 0), 1.0 / n + 0.001);
}

TEST(KyFan, BetaMixtureDecreasesWithN) {
  const auto model = MissingnessModel::exchangeable(PDistribution::beta_distribution(2.0, 2.0));
  const double k2 = kyfan_estimate(model, 100, 2000, 10);
  const double k3 = kyfan_estimate(model, 1000, 2000, 10);
  const double k4 = kyfan_estimate(model, 10000, 2000, 10);
  EXPECT_GT(k2, k3);
  EXPECT_GT(k3, k4);
}

TEST(KyFan, NonincreasingInNForShippedModels) {
  const MissingnessModel models[] = {
      MissingnessModel::iid_bernoulli(0.3), MissingnessModel::two_state_markov(0.2, 0.2),
      MissingnessModel::exchangeable(PDistribution::uniform(0.0, 1.0)),
      MissingnessModel::deterministic_pattern({std::vector<std::uint8_t>(4000, 1)})};
  for (const auto& m : models) {
    double prev = 1.0;
    for (std::size_t n : {100u, 400u, 1600u}) {
      const double k = kyfan_estimate(m, n, 400, 11);
      EXPECT_LE(k, prev + 0.001) << m.describe() << " n=" << n;
      prev = k;
    }
  }
}

TEST(Patterns, ReadAndReject) {
  std::istringstream good("0101\n\n 11 00 \n");
  const auto pats = read_patterns(good);
  ASSERT_EQ(pats.size(), 2u);
  EXPECT_EQ(pats[1], (std::vector<std::uint8_t>{1, 1, 0, 0}));
  std::istringstream bad("01x1\n");
  EXPECT_THROW(read_patterns(bad), InputError);
  std::istringstream empty("\n\n");
  EXPECT_THROW(read_patterns(empty), InputError);
  EXPECT_THROW(load_patterns("/nonexistent/patterns.txt"), InputError);
}
