#ifndef EVLAB_GENPATH_HPP
#define EVLAB_GENPATH_HPP

/** @file
 * Exact samplers for finite paths of stationary standard Gaussian sequences.
 *
 * Three routes are provided: iid draws, the AR(1) recursion
 * X_{t+1} = phi X_t + sqrt(1 - phi^2) Z_t, and circulant embedding, which
 * handles any model whose circulant extension is nonnegative definite. The
 * AR(1) recursion and the circulant sampler are independent implementations
 * of the same law and are cross-checked in the tests.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <fftw3.h>

#include "evlab/dependence.hpp"
#include "evlab/error.hpp"
#include "evlab/rng.hpp"

namespace evlab {

/// A finite realisation X_1..X_n of a stationary standard Gaussian sequence.
struct SamplePath {
  std::vector<double> values;
  CorrelationModel model;
  SeedInfo seed;

  std::size_t n() const noexcept { return values.size(); }
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* plan) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
};

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline FftwBuffer fftw_buffer(std::size_t m) {
  return FftwBuffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m)));
}

}  // namespace detail

/**
 * Circulant embedding of rho_0..rho_{n-1} into a circulant matrix of size m,
 * the smallest power of two with m >= 2(n-1). First row:
 * c_j = rho_{min(j, m-j)}.
 *
 * Eigenvalues below -1e-8 * max are reported as EmbeddingFailure; those in
 * [-1e-8 * max, 0) are clipped to zero and counted in `clipped()`.
 *
 * One FFTW plan is created at construction (planner calls are serialized);
 * `sample` is const and may run concurrently from several threads.
 */
class CirculantEmbedding {
 public:
  static constexpr double kNegativeTolerance = 1e-8;

  CirculantEmbedding(const CorrelationModel& model, std::size_t n) : n_(n) {
    if (n == 0) throw InputError("circulant embedding: n must be positive");
    m_ = 2;
    while (m_ < 2 * (n - 1)) m_ *= 2;

    auto in = detail::fftw_buffer(m_);
    auto out = detail::fftw_buffer(m_);
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      plan_.reset(fftw_plan_dft_1d(static_cast<int>(m_), in.get(), out.get(), FFTW_FORWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED));
    }
    if (!plan_) throw std::runtime_error("circulant embedding: FFTW planning failed");

    for (std::size_t j = 0; j < m_; ++j) {
      in[j][0] = rho_at(model, std::min(j, m_ - j));
      in[j][1] = 0.0;
    }
    fftw_execute_dft(plan_.get(), in.get(), out.get());

    double max_eig = 0.0;
    double min_eig = 0.0;
    for (std::size_t j = 0; j < m_; ++j) {
      max_eig = std::max(max_eig, out[j][0]);
      min_eig = std::min(min_eig, out[j][0]);
    }
    min_eigenvalue_ = min_eig;
    if (min_eig < -kNegativeTolerance * max_eig) throw EmbeddingFailure(model.describe(), n, min_eig, max_eig);

    scale_.resize(m_);
    const double inv_m = 1.0 / static_cast<double>(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      double lambda = out[j][0];
      if (lambda < 0.0) {
        lambda = 0.0;
        ++clipped_;
      }
      scale_[j] = std::sqrt(lambda * inv_m);
    }
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return m_; }
  /// Number of slightly negative eigenvalues that were set to zero.
  std::size_t clipped() const noexcept { return clipped_; }
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

  /// Fill `out` (length n) with one exact draw: the real part of
  /// FFT(sqrt(lambda/m) * (a + ib)), a, b iid N(0,1).
  void sample(Engine& engine, std::span<double> out) const {
    if (out.size() != n_) throw InputError("circulant embedding: output length mismatch");
    auto in = detail::fftw_buffer(m_);
    auto fft = detail::fftw_buffer(m_);
    std::normal_distribution<double> normal;
    for (std::size_t j = 0; j < m_; ++j) {
      const double re = normal(engine);
      const double im = normal(engine);
      in[j][0] = scale_[j] * re;
      in[j][1] = scale_[j] * im;
    }
    fftw_execute_dft(plan_.get(), in.get(), fft.get());
    for (std::size_t j = 0; j < n_; ++j) out[j] = fft[j][0];
  }

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::size_t clipped_ = 0;
  double min_eigenvalue_ = 0.0;
  std::vector<double> scale_;
  std::unique_ptr<fftw_plan_s, detail::FftwPlanDeleter> plan_;
};

/// Which sampler produces the paths of a correlation model.
enum class SamplerKind { automatic, iid, ar1, circulant };

inline const char* to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::automatic: return "auto";
    case SamplerKind::iid: return "iid";
    case SamplerKind::ar1: return "ar1";
    case SamplerKind::circulant: return "circulant";
  }
  return "auto";
}

inline void fill_iid(Engine& engine, std::span<double> out) {
  std::normal_distribution<double> normal;
  for (double& x : out) x = normal(engine);
}

inline void fill_ar1(Engine& engine, double phi, std::span<double> out) {
  if (out.empty()) return;
  std::normal_distribution<double> normal;
  const double innovation = std::sqrt((1.0 - phi) * (1.0 + phi));
  double x = normal(engine);
  out[0] = x;
  for (std::size_t t = 1; t < out.size(); ++t) {
    x = phi * x + innovation * normal(engine);
    out[t] = x;
  }
}

/**
 * Reusable sampler for one (model, n). Construction does all validation
 * (and the embedding, when needed); `sample` depends only on its seed.
 * `automatic` picks iid for IID, the recursion for AR1 and circulant
 * embedding otherwise.
 */
class PathSampler {
 public:
  PathSampler(const CorrelationModel& model, std::size_t n, SamplerKind kind = SamplerKind::automatic)
      : model_(model), n_(n) {
    if (n == 0) throw InputError("path sampler: n must be positive");
    if (kind == SamplerKind::automatic) {
      switch (model.kind) {
        case CorrelationModel::Kind::iid: kind = SamplerKind::iid; break;
        case CorrelationModel::Kind::ar1: kind = SamplerKind::ar1; break;
        default: kind = SamplerKind::circulant; break;
      }
    }
    if (kind == SamplerKind::iid && model.kind != CorrelationModel::Kind::iid)
      throw InputError("path sampler: the iid sampler requires the iid model");
    if (kind == SamplerKind::ar1 && model.kind != CorrelationModel::Kind::ar1)
      throw InputError("path sampler: the ar1 sampler requires the ar1 model");
    kind_ = kind;
    if (kind_ == SamplerKind::circulant) embedding_ = std::make_shared<const CirculantEmbedding>(model, n);
  }

  SamplerKind kind() const noexcept { return kind_; }
  std::size_t n() const noexcept { return n_; }
  const CorrelationModel& model() const noexcept { return model_; }
  const CirculantEmbedding* embedding() const noexcept { return embedding_.get(); }

  void sample(const SeedInfo& seed, std::span<double> out) const {
    if (out.size() != n_) throw InputError("path sampler: output length mismatch");
    Engine engine = make_engine(seed, Stream::path);
    switch (kind_) {
      case SamplerKind::iid: fill_iid(engine, out); break;
      case SamplerKind::ar1: fill_ar1(engine, model_.phi, out); break;
      default: embedding_->sample(engine, out); break;
    }
  }

  SamplePath sample(const SeedInfo& seed) const {
    SamplePath path{std::vector<double>(n_), model_, seed};
    sample(seed, path.values);
    return path;
  }

 private:
  CorrelationModel model_;
  std::size_t n_;
  SamplerKind kind_ = SamplerKind::iid;
  std::shared_ptr<const CirculantEmbedding> embedding_;
};

/// n independent standard normal draws.
inline SamplePath generate_iid(std::size_t n, const SeedInfo& seed) {
  return PathSampler(CorrelationModel::iid(), n, SamplerKind::iid).sample(seed);
}

/// Stationary AR(1) path with rho_k = phi^k.
inline SamplePath generate_ar1(std::size_t n, double phi, const SeedInfo& seed) {
  return PathSampler(CorrelationModel::ar1(phi), n, SamplerKind::ar1).sample(seed);
}

/// Exact stationary path for any embeddable model.
inline SamplePath generate_circulant(std::size_t n, const CorrelationModel& model, const SeedInfo& seed) {
  return PathSampler(model, n, SamplerKind::circulant).sample(seed);
}

/// Sample autocorrelation at lag k (mean-centred, biased normalisation).
inline double sample_autocorrelation(std::span<const double> x, std::size_t lag) {
  const std::size_t n = x.size();
  if (lag >= n) throw InputError("sample_autocorrelation: lag must be below the path length");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double denom = 0.0;
  for (double v : x) denom += (v - mean) * (v - mean);
  double num = 0.0;
  for (std::size_t t = 0; t + lag < n; ++t) num += (x[t] - mean) * (x[t + lag] - mean);
  return num / denom;
}

}  // namespace evlab

#endif  // EVLAB_GENPATH_HPP
