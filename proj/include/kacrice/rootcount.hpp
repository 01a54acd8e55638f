#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "kacrice/covariance.hpp"
#include "kacrice/ensemble.hpp"
#include "kacrice/estimate.hpp"
#include "kacrice/signal.hpp"

namespace kacrice {

/// Distinct real roots of a univariate polynomial (lowest degree first) by a
/// Sturm sequence in exact rational arithmetic. Trailing coefficients with
/// magnitude <= 1e-300 are trimmed; the zero polynomial is rejected.
int count_roots_1d(std::span<const double> coeffs);

/// Same count from companion-matrix eigenvalues with |Im| <= imag_tol (1 + |Re|).
int count_roots_1d_companion(std::span<const double> coeffs, double imag_tol = 1e-8);

struct Count2dSettings {
  double box_R = 0.0;     // roots with max(|t1|, |t2|) > box_R are rejected
  double tol = 1e-10;     // residual relative to the absolute-value evaluation
  int grid_k = 0;         // seeds per axis; 0 selects 24 max(d_i)
  int max_newton = 60;
};

struct Count2dResult {
  int count = 0;
  std::vector<std::array<double, 2>> roots;
  int seeds = 0;
  int stalled = 0;        // seeds that came close to a root but exhausted the iteration budget
  bool warning = false;   // stalled > 1% of seeds
};

/// Real solutions of f_1 = f_2 = 0 in the box, from projective Newton iterations
/// seeded on a k x k grid of t = tan(pi a / 2), a in (-1, 1)^2.
Count2dResult count_roots_2d(const SampledPolynomial& f1, const SampledPolynomial& f2, const Count2dSettings& s);

/// Noise draw plus signal, then count_roots_2d.
Count2dResult count_roots_2d(const SampledSystem& noise, const SignalSpec& signal, const Count2dSettings& s);

struct McOptions {
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  CountMethod method_1d = CountMethod::sturm;  // or companion
  double box_R = 0.0;                          // m = 2; 0 selects twice the 1e-3 tail radius
};

struct McRun {
  McEstimate estimate;
  std::vector<int> counts;
  std::vector<std::uint64_t> seeds;
  double box_R = 0.0;
  int warnings = 0;
};

/// Seed of replicate r; a pure function of (seed, r).
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r);

/// Monte Carlo E(N^{P+X}) for m in {1, 2}. Replicates are independent and
/// aggregated in index order, so the result does not depend on `threads`.
McRun mc_expected_roots(const NoiseModel& model, const SignalSpec& signal, const McOptions& opt);

}  // namespace kacrice
