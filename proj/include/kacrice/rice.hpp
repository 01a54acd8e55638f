#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "kacrice/covariance.hpp"
#include "kacrice/estimate.hpp"
#include "kacrice/signal.hpp"
#include "kacrice/special.hpp"

namespace kacrice {

struct QuadratureSettings {
  enum class Cutoff { tail_mass, fixed };

  double abs_tol = 1e-14;
  double rel_tol = 1e-10;
  int max_subdivisions = 15;  // depth of adaptive Gauss-Kronrod bisection
  Cutoff cutoff = Cutoff::tail_mass;
  double cutoff_radius = 0.0;  // for Cutoff::fixed
  double tail_mass = 1e-9;     // for Cutoff::tail_mass; the substitution rho = tan(theta) integrates the full range
  std::size_t eh_samples = 10000;
  std::uint64_t seed = 0x51CE;
  unsigned threads = 1;

  void validate() const;
};

/// Quadrature value with its error estimate. `std_error` is nonzero only when
/// the integrand carries Monte Carlo noise (non-identical h across equations).
struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  double std_error = 0.0;
  bool monte_carlo = false;
};

/// Normalization Gamma(m/2) / (sqrt(2) pi^{(m+1)/2}) of the centered formula.
LogValue centered_normalization(int m);

/// E(N^X) for the centered system:
///   A_m sigma_{m-1} int_0^inf rho^{m-1} [prod q_i(rho^2)]^{1/2} E_h(rho^2) drho.
QuadratureResult centered_expectation(const NoiseModel& model, const QuadratureSettings& s = {});

/// Same integral restricted to rho in [r_lo, r_hi].
QuadratureResult centered_expectation_between(const NoiseModel& model, double r_lo, double r_hi,
                                              const QuadratureSettings& s = {});

/// Radius R with at most `mass` of the centered expected count outside ||t|| <= R.
double centered_tail_radius(const NoiseModel& model, double mass, const QuadratureSettings& s = {});

/// int_a^b rho^{m-1} / (1 + rho^2)^{(m+1)/2} drho, as int sin^{m-1}(theta) over [atan a, atan b].
double radial_kernel_integral(int m, double a = 0.0, double b = std::numeric_limits<double>::infinity());

/// sqrt(pi) Gamma(m/2) / (2 Gamma((m+1)/2)): the full-range kernel integral.
double radial_kernel_closed_form(int m);

/// Exact expected root count for m = 1 with a deterministic signal:
///   int_R sqrt(q) E|sqrt(h) xi + alpha| phi(P / sqrt(Q)) dt,  alpha = (P / sqrt(Q))' / sqrt(q).
QuadratureResult perturbed_exact_1d(const SignalComponent& signal, const CovarianceQ& q,
                                    const QuadratureSettings& s = {});

/// Monte Carlo Rice evaluation for radial signals at any m: Gauss-Legendre panels
/// in theta = atan(rho), E|det T| by `det_samples` draws shared across nodes.
McEstimate perturbed_radial_mc(const SignalSpec& signal, const NoiseModel& model, int node_budget,
                               std::size_t det_samples, std::uint64_t seed, unsigned threads = 1);

enum class Damping { exact_radial, separable_dual_bound, none };
std::string to_string(Damping d);

/// Lower bound on min over ||t|| = rho of sum_i T_i(t_{a_i})^2 / Q_i(rho^2) for separable signals.
double separable_sphere_min(const SignalSpec& signal, const NoiseModel& model, double rho);

/// Computable quantities of the perturbed upper bound E(N^{P+X}) <= s_m H_m.
struct BoundChain {
  int m = 0;
  double r0 = 0.0;
  double ell = 0.0;
  double s_m = 0.0;          // (hbar/hlow)^{1/2} exp((m A_m / qlow + m B_m / (hlow qlow)) / 2)
  double H_m = 0.0;          // damped centered integral
  double H1_part = 0.0;      // H_m restricted to ||t|| <= r0
  double H2_part = 0.0;      // H_m restricted to ||t|| > r0
  double H2_bound = 0.0;     // exp(-ell m / 2) E(N^X)
  double H1_bound = 0.0;     // exponential dropped, (H2) bounds, kernel integral on [0, r0]
  double H1_bound_closed = 0.0;  // same with the kernel integral bounded by (pi/2) (r0^2 / (1 + r0^2))^{(m-1)/2}
  double H1_bound_C1 = 0.0;  // C1 sqrt(m) (r0^2 / (r0^2 + 1/2))^{m/2} E(N^X); valid for m >= m0
  double C1 = 0.0;
  double centered = 0.0;
  double final_bound = 0.0;  // s_m H_m
  double std_error = 0.0;    // from Monte Carlo E_h, when present
  Damping damping = Damping::none;
};

/// Requires (H1) and (H2) from `hyp`; throws PreconditionError naming the failing one.
BoundChain bound_chain(const SignalSpec& signal, const NoiseModel& model, const SnrReport& snr,
                       const HypothesisReport& hyp, const QuadratureSettings& s = {});

}  // namespace kacrice
