#ifndef EVLAB_QUADRATURE_HPP
#define EVLAB_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>

namespace evlab {

/// Fixed-order Gauss-Legendre rule on [-1, 1]. Nodes are Newton-refined roots
/// of P_N from Tricomi's initial guess; weights from the derivative identity.
template <std::size_t N>
class GaussLegendre {
  static_assert(N >= 2);

 public:
  GaussLegendre() {
    for (std::size_t i = 0; i < (N + 1) / 2; ++i) {
      const double k = static_cast<double>(i + 1);
      const double n = static_cast<double>(N);
      double x = std::cos(std::numbers::pi * (4.0 * k - 1.0) / (4.0 * n + 2.0)) *
                 (1.0 - 1.0 / (8.0 * n * n) + 1.0 / (8.0 * n * n * n));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        auto [p, d] = legendre(x);
        dp = d;
        const double step = p / d;
        x -= step;
        if (std::abs(step) < 1e-16) break;
      }
      dp = legendre(x).second;
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nodes_[i] = -x;
      weights_[i] = w;
      nodes_[N - 1 - i] = x;
      weights_[N - 1 - i] = w;
    }
  }

  const std::array<double, N>& nodes() const noexcept { return nodes_; }
  const std::array<double, N>& weights() const noexcept { return weights_; }

  /// Integral of f over [a, b].
  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) sum += weights_[i] * f(mid + half * nodes_[i]);
    return half * sum;
  }

 private:
  // (P_N(x), P_N'(x))
  static std::pair<double, double> legendre(double x) {
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t j = 2; j <= N; ++j) {
      const double jj = static_cast<double>(j);
      const double p2 = ((2.0 * jj - 1.0) * x * p1 - (jj - 1.0) * p0) / jj;
      p0 = p1;
      p1 = p2;
    }
    const double d = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
    return {p1, d};
  }

  std::array<double, N> nodes_{};
  std::array<double, N> weights_{};
};

/// The 64-point rule shared by the limit-law expectations.
inline const GaussLegendre<64>& gauss_legendre_64() {
  static const GaussLegendre<64> rule;
  return rule;
}

}  // namespace evlab

#endif  // EVLAB_QUADRATURE_HPP
