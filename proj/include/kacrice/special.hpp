#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

#include "kacrice/estimate.hpp"

namespace kacrice {

/// A real number stored as sign * exp(log_magnitude).
///
/// Used for every quantity involving Gamma(m/2), sphere areas or 2^(m/2), which
/// overflow jointly once m reaches a few hundred.
struct LogValue {
  double log_magnitude = -std::numeric_limits<double>::infinity();
  int sign = 0;

  static LogValue from(double x);
  static LogValue from_log(double log_magnitude, int sign = 1) { return {log_magnitude, sign}; }
  static LogValue zero() { return {}; }

  double value() const;
  bool is_zero() const { return sign == 0; }

  friend LogValue operator*(LogValue a, LogValue b);
  friend LogValue operator/(LogValue a, LogValue b);
};

/// ln Gamma(x) for x > 0.
double log_gamma(double x);

/// Standard normal CDF, via erfc.
double normal_cdf(double x);

/// E||xi|| for xi standard normal in R^k.
double chi_mean(int k);

/// Area of the unit sphere S^{m-1} in R^m: 2 pi^{m/2} / Gamma(m/2).
LogValue sphere_area(int m);

/// Product of chi_mean(j) for j = 1..m, accumulated factor by factor.
LogValue l_m(int m);

/// Closed form of l_m: 2^{(m+1)/2} Gamma((m+1)/2) / sqrt(2 pi).
LogValue l_m_closed_form(int m);

/// gamma_k(c) = E||xi + c||, xi standard normal in R^k, c of norm `c`.
/// Exact for k = 1; Monte Carlo with `samples` draws otherwise.
McValue gamma_shifted(int k, double c, std::size_t samples = 100000, std::uint64_t seed = 0x6A5EEDull);

/// Monte Carlo gamma_k(c) for any k. The draws depend only on (k, seed), so calls
/// with different c share common random numbers.
McValue gamma_shifted_mc(int k, double c, std::size_t samples, std::uint64_t seed);

/// Exact one-dimensional gamma: sqrt(2/pi) exp(-c^2/2) + c (2 Phi(c) - 1).
double gamma_shifted_1d(double c);

/// E|s xi + a| for xi standard normal; stays finite as s -> 0.
double abs_shifted_normal_mean(double s, double a);

/// Upper envelope gamma_k(0) (1 + c^2 / (2k)).
double gamma_bound(int k, double c);

/// Central second difference of gamma_k at 0 with step `step`, from common
/// random numbers; estimates the curvature gamma_k''(0).
McValue gamma_shifted_curvature(int k, double step, std::size_t samples, std::uint64_t seed);

}  // namespace kacrice
