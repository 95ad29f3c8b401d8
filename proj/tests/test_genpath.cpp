// Path samplers: marginal law, autocorrelation, cross-sampler agreement,
// determinism and embedding failures.

#include <cmath>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "evlab/genpath.hpp"

using namespace evlab;

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST(GenerateIid, WhiteNoise) {
  const std::size_t n = 1'000'000;
  const auto path = generate_iid(n, {1, 0});
  ASSERT_EQ(path.n(), n);
  EXPECT_NEAR(sample_autocorrelation(path.values, 1), 0.0, 3.0 / std::sqrt(double(n)));
  EXPECT_NEAR(variance_of(path.values), 1.0, 0.005);
  EXPECT_NEAR(mean_of(path.values), 0.0, 5.0 / std::sqrt(double(n)));
}

TEST(GenerateIid, BitIdenticalForSameSeed) {
  const auto a = generate_iid(1000, {99, 4});
  const auto b = generate_iid(1000, {99, 4});
  const auto c = generate_iid(1000, {99, 5});
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  EXPECT_THROW(generate_iid(0, {1, 0}), InputError);
}

TEST(GenerateAr1, Autocorrelations) {
  const std::size_t n = 1'000'000;
  const auto path = generate_ar1(n, 0.5, {2, 0});
  EXPECT_NEAR(sample_autocorrelation(path.values, 1), 0.5, 0.005);
  EXPECT_NEAR(sample_autocorrelation(path.values, 3), 0.125, 0.005);
  EXPECT_NEAR(variance_of(path.values), 1.0, 0.01);

  const auto white = generate_ar1(n, 0.0, {2, 1});
  EXPECT_NEAR(sample_autocorrelation(white.values, 1), 0.0, 3.0 / std::sqrt(double(n)));
}

TEST(GenerateCirculant, IidModelIsWhiteNoise) {
  const std::size_t n = 100'000;
  const auto path = generate_circulant(n, CorrelationModel::iid(), {3, 0});
  for (std::size_t lag : {1u, 2u, 5u, 17u})
    EXPECT_NEAR(sample_autocorrelation(path.values, lag), 0.0, 3.0 / std::sqrt(double(n))) << lag;
}

TEST(GenerateCirculant, MatchesAr1Recursion) {
  const std::size_t n = 1'000'000;
  const auto circ = generate_circulant(n, CorrelationModel::ar1(0.5), {4, 0});
  const auto rec = generate_ar1(n, 0.5, {4, 1});
  for (std::size_t k = 1; k <= 10; ++k) {
    const double target = std::pow(0.5, double(k));
    const double rc = sample_autocorrelation(circ.values, k);
    const double rr = sample_autocorrelation(rec.values, k);
    EXPECT_NEAR(rc, target, 0.005) << k;
    EXPECT_NEAR(rc, rr, 0.01) << k;
  }
}

TEST(GenerateCirculant, PowerDecayLagTen) {
  const std::size_t n = 100'000;
  // with c = 1 the spectral density at pi is 1 - 2 eta(0.75) < 0: no such process
  EXPECT_THROW(generate_circulant(n, CorrelationModel::power_decay(1.0, 0.75), {5, 0}), EmbeddingFailure);
  // one long-memory path has sd ~0.006 at lag 10; average 16 of them
  const PathSampler sampler(CorrelationModel::power_decay(0.7, 0.75), n, SamplerKind::circulant);
  std::vector<double> buf(n);
  double r10 = 0.0;
  for (std::uint64_t r = 0; r < 16; ++r) {
    sampler.sample({5, r}, buf);
    r10 += sample_autocorrelation(buf, 10) / 16.0;
  }
  // 0.7 * 10^-0.75
  EXPECT_NEAR(r10, 0.124479558702724596, 0.01);
}

TEST(GenerateCirculant, PooledMarginalIsStandard) {
  const auto model = CorrelationModel::power_decay(0.6, 1.2);
  const std::size_t n = 4096;
  const PathSampler sampler(model, n, SamplerKind::circulant);
  std::vector<double> pooled;
  std::vector<double> buf(n);
  for (std::uint64_t r = 0; r < 250; ++r) {
    sampler.sample({6, r}, buf);
    pooled.insert(pooled.end(), buf.begin(), buf.end());
  }
  // standard errors inflated by the within-path correlation
  double tau = 1.0, tau2 = 1.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double w = 1.0 - double(k) / double(n);
    tau += 2.0 * w * rho_at(model, k);
    tau2 += 2.0 * w * rho_at(model, k) * rho_at(model, k);
  }
  const double N = double(pooled.size());
  EXPECT_NEAR(mean_of(pooled), 0.0, 5 * std::sqrt(tau / N));
  EXPECT_NEAR(variance_of(pooled), 1.0, 5 * std::sqrt(2.0 * tau2 / N) + 5 * tau / N);
}

TEST(GenerateCirculant, EmbeddingFailureIsReported) {
  // rho_1 capped near 1, rho_k = 2/k beyond: not a valid covariance
  try {
    CirculantEmbedding emb(CorrelationModel::power_decay(2.0, 1.0), 64);
    FAIL() << "expected EmbeddingFailure";
  } catch (const EmbeddingFailure& e) {
    EXPECT_EQ(e.n(), 64u);
    EXPECT_LT(e.min_eigenvalue(), 0.0);
    EXPECT_NE(std::string(e.what()).find("power"), std::string::npos);
  }
  EXPECT_NO_THROW(CirculantEmbedding(CorrelationModel::ar1(0.9), 1000));
  EXPECT_EQ(CirculantEmbedding(CorrelationModel::ar1(0.9), 1000).size(), 2048u);
  EXPECT_EQ(CirculantEmbedding(CorrelationModel::ar1(0.9), 1025).size(), 2048u);
  EXPECT_EQ(CirculantEmbedding(CorrelationModel::ar1(0.9), 1026).size(), 4096u);
}

TEST(PathSampler, ConcurrentSamplingIsDeterministic) {
  const PathSampler sampler(CorrelationModel::log_decay(0.5), 2000);
  std::vector<std::vector<double>> serial(16, std::vector<double>(2000));
  for (std::uint64_t r = 0; r < 16; ++r) sampler.sample({11, r}, serial[r]);

  std::vector<std::vector<double>> parallel(16, std::vector<double>(2000));
  std::vector<std::thread> pool;
  for (int w = 0; w < 4; ++w)
    pool.emplace_back([&, w] {
      for (std::uint64_t r = 15 - w; r < 16; r -= 4) {
        sampler.sample({11, r}, parallel[r]);
        if (r < 4) break;
      }
    });
  for (auto& t : pool) t.join();
  EXPECT_EQ(serial, parallel);
}

TEST(PathSampler, KindChecks) {
  EXPECT_EQ(PathSampler(CorrelationModel::iid(), 10).kind(), SamplerKind::iid);
  EXPECT_EQ(PathSampler(CorrelationModel::ar1(0.2), 10).kind(), SamplerKind::ar1);
  EXPECT_EQ(PathSampler(CorrelationModel::log_decay(0.2), 10).kind(), SamplerKind::circulant);
  EXPECT_THROW(PathSampler(CorrelationModel::ar1(0.2), 10, SamplerKind::iid), InputError);
  EXPECT_THROW(PathSampler(CorrelationModel::iid(), 10, SamplerKind::ar1), InputError);
  std::vector<double> wrong(9);
  EXPECT_THROW(PathSampler(CorrelationModel::iid(), 10).sample({0, 0}, wrong), InputError);
}
