#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

namespace kacrice {

/// Monte Carlo mean with its standard error.
struct McValue {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

enum class CountMethod { sturm, companion, subdivision, radial_rice };

std::string to_string(CountMethod method);

/// Replicated Monte Carlo estimate with seed provenance.
/// Invariant: std_error = sample standard deviation / sqrt(n_replicates).
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_replicates = 0;
  std::uint64_t seed = 0;
  CountMethod method = CountMethod::sturm;

  double lower(double z = 1.96) const { return mean - z * std_error; }
  double upper(double z = 1.96) const { return mean + z * std_error; }
};

/// Mean and standard error of a sample, accumulated in index order.
McValue summarize(std::span<const double> sample);

}  // namespace kacrice
