#include "kacrice/special.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "kacrice/errors.hpp"
#include "kacrice/rng.hpp"

namespace kacrice {

std::string to_string(CountMethod method) {
  switch (method) {
    case CountMethod::sturm: return "sturm";
    case CountMethod::companion: return "companion";
    case CountMethod::subdivision: return "subdivision";
    case CountMethod::radial_rice: return "radial_rice";
  }
  return "unknown";
}

McValue summarize(std::span<const double> sample) {
  McValue out;
  out.samples = sample.size();
  if (sample.empty()) return out;
  double sum = 0.0;
  for (double x : sample) sum += x;
  const double mean = sum / static_cast<double>(sample.size());
  double ss = 0.0;
  for (double x : sample) ss += (x - mean) * (x - mean);
  out.value = mean;
  if (sample.size() > 1) {
    const double var = ss / static_cast<double>(sample.size() - 1);
    out.std_error = std::sqrt(var / static_cast<double>(sample.size()));
  }
  return out;
}

LogValue LogValue::from(double x) {
  if (x == 0.0) return zero();
  return {std::log(std::abs(x)), x > 0 ? 1 : -1};
}

double LogValue::value() const {
  if (sign == 0) return 0.0;
  return sign * std::exp(log_magnitude);
}

LogValue operator*(LogValue a, LogValue b) {
  if (a.sign == 0 || b.sign == 0) return LogValue::zero();
  return {a.log_magnitude + b.log_magnitude, a.sign * b.sign};
}

LogValue operator/(LogValue a, LogValue b) {
  if (b.sign == 0) throw DomainError("LogValue division by zero");
  if (a.sign == 0) return LogValue::zero();
  return {a.log_magnitude - b.log_magnitude, a.sign * b.sign};
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive, got " + std::to_string(x));
  return boost::math::lgamma(x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double chi_mean(int k) {
  if (k < 1) throw DomainError("chi_mean: dimension must be >= 1");
  return std::numbers::sqrt2 * std::exp(log_gamma(0.5 * (k + 1)) - log_gamma(0.5 * k));
}

LogValue sphere_area(int m) {
  if (m < 1) throw DomainError("sphere_area: dimension must be >= 1");
  return LogValue::from_log(std::log(2.0) + 0.5 * m * std::log(std::numbers::pi) - log_gamma(0.5 * m));
}

LogValue l_m(int m) {
  if (m < 1) throw DomainError("l_m: dimension must be >= 1");
  double log_sum = 0.0;
  for (int j = 1; j <= m; ++j) log_sum += std::log(chi_mean(j));
  return LogValue::from_log(log_sum);
}

LogValue l_m_closed_form(int m) {
  if (m < 1) throw DomainError("l_m: dimension must be >= 1");
  return LogValue::from_log(0.5 * (m + 1) * std::log(2.0) + log_gamma(0.5 * (m + 1)) -
                            0.5 * std::log(2.0 * std::numbers::pi));
}

double gamma_shifted_1d(double c) {
  if (c < 0.0) throw DomainError("gamma_shifted: shift norm must be >= 0");
  return std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * c * c) + c * std::erf(c / std::numbers::sqrt2);
}

double abs_shifted_normal_mean(double s, double a) {
  a = std::abs(a);
  if (s <= 0.0) return a;
  const double z = a / s;
  return s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * z * z) + a * std::erf(z / std::numbers::sqrt2);
}

namespace {

void check_gamma_args(int k, double c) {
  if (k < 1) throw DomainError("gamma_shifted: dimension must be >= 1");
  if (c < 0.0 || !std::isfinite(c)) throw DomainError("gamma_shifted: shift norm must be finite and >= 0");
}

}  // namespace

McValue gamma_shifted_mc(int k, double c, std::size_t samples, std::uint64_t seed) {
  check_gamma_args(k, c);
  if (samples < 2) throw DomainError("gamma_shifted: need at least 2 samples");
  const KeyedStream stream(seed, {0x67616D6D61ull, static_cast<std::uint64_t>(k)});
  std::vector<double> norms(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::uint64_t base = static_cast<std::uint64_t>(s) * k;
    const double x0 = stream.normal(base) + c;
    double sq = x0 * x0;
    for (int i = 1; i < k; ++i) {
      const double x = stream.normal(base + i);
      sq += x * x;
    }
    norms[s] = std::sqrt(sq);
  }
  return summarize(norms);
}

McValue gamma_shifted(int k, double c, std::size_t samples, std::uint64_t seed) {
  check_gamma_args(k, c);
  if (k == 1) return {gamma_shifted_1d(c), 0.0, 0};
  return gamma_shifted_mc(k, c, samples, seed);
}

double gamma_bound(int k, double c) {
  check_gamma_args(k, c);
  return chi_mean(k) * (1.0 + c * c / (2.0 * k));
}

McValue gamma_shifted_curvature(int k, double step, std::size_t samples, std::uint64_t seed) {
  check_gamma_args(k, 0.0);
  if (!(step > 0.0)) throw DomainError("gamma_shifted_curvature: step must be positive");
  const KeyedStream stream(seed, {0x67616D6D61ull, static_cast<std::uint64_t>(k)});
  std::vector<double> diffs(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::uint64_t base = static_cast<std::uint64_t>(s) * k;
    const double x0 = stream.normal(base);
    double rest = 0.0;
    for (int i = 1; i < k; ++i) {
      const double x = stream.normal(base + i);
      rest += x * x;
    }
    const double plus = std::sqrt((x0 + step) * (x0 + step) + rest);
    const double zero = std::sqrt(x0 * x0 + rest);
    const double minus = std::sqrt((x0 - step) * (x0 - step) + rest);
    diffs[s] = (plus - 2.0 * zero + minus) / (step * step);
  }
  return summarize(diffs);
}

}  // namespace kacrice
