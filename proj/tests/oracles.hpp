#pragma once

// Reference computations used by the tests. Nothing here calls into the
// library's numerics, so a bug there cannot hide behind a shared helper.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle {

/// Student-t density.
inline double t_density(double x, double df) {
  const double log_c = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) - 0.5 * std::log(df * std::numbers::pi);
  return std::exp(log_c - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

/// P(0 <= X <= x) by composite 8-point Gauss-Legendre quadrature.
inline double t_half_mass(double x, double df, int panels = 4000) {
  static constexpr std::array<double, 4> node{0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                              0.9602898564975363};
  static constexpr std::array<double, 4> weight{0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                                0.1012285362903763};
  // Integrate in u = atan(x) so heavy tails stay well resolved.
  const double top = std::atan(x);
  const double h = top / panels;
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double mid = (i + 0.5) * h;
    for (std::size_t k = 0; k < node.size(); ++k) {
      for (double sgn : {-1.0, 1.0}) {
        const double u = mid + sgn * node[k] * h / 2.0;
        const double t = std::tan(u);
        sum += weight[k] * t_density(t, df) * (1.0 + t * t);
      }
    }
  }
  return sum * h / 2.0;
}

inline double t_cdf(double x, double df) {
  return x >= 0.0 ? 0.5 + t_half_mass(x, df) : 0.5 - t_half_mass(-x, df);
}

/// Inverts the quadrature CDF by bisection.
inline double t_quantile(double p, double df) {
  double lo = -1e4, hi = 1e4;
  for (int i = 0; i < 200 && hi - lo > 1e-11; ++i) {
    const double mid = 0.5 * (lo + hi);
    (t_cdf(mid, df) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Plain two-pass sample mean and unbiased variance.
struct MeanVar {
  double mean;
  double var;
};

inline MeanVar mean_var(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, ss / static_cast<double>(x.size() - 1)};
}

}  // namespace oracle
