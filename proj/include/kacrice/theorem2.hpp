#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kacrice/covariance.hpp"
#include "kacrice/signal.hpp"
#include "kacrice/special.hpp"

namespace kacrice {

/// m -> (A_m, B_m).
using AggregateProvider = std::function<std::pair<double, double>(int m)>;

/// Every equation has the same H and K: A_m = H^2 Harm(m) / m, B_m = K^2 Harm(m) / m.
AggregateProvider uniform_aggregates(double H, double K);

/// Aggregates from reports at selected m; between and beyond them the value at
/// the nearest smaller supplied m is carried forward (the first one below it).
AggregateProvider carried_aggregates(const std::map<int, SnrReport>& reports);

struct BoundConstants {
  double r0 = 0.0;
  double ell = 0.0;
  double theta1 = 0.0;
  double theta = 0.0;
  bool theta1_radius_branch = false;  // theta1 = r0 / sqrt(r0^2 + 1/2)
  double F_bar = 0.0;                 // max_i E_i / D_i
  double F_bar_ceiling = 0.0;         // Ebar / qlow; F_bar never exceeds it
  double tau = 0.0;
  int m0 = 0;
  int m0_half_pi = 0;                 // second m0 condition with pi/2 in place of pi
  std::optional<int> m0_worked;       // e^{c1} m^{c1 + 1/2} <= kappa^m, c1 = 8 Dbar^2, kappa = theta / theta1
  double C = 0.0;                     // 30 (hbar / hlow) sqrt(1 + r0^2) / r0
  double C_sqrt_ratio = 0.0;          // same with (hbar / hlow)^{1/2}
  double h_ratio = 1.0;               // hbar / hlow
  double q_lower = 0.0;
  double h_lower = 0.0;
  bool aggregates_carried = false;
  std::optional<std::string> theta_symbolic;
  std::optional<std::string> C_symbolic;
};

struct ConstantOptions {
  int m_scan_limit = 1000000;
  double tau_start = 1e-3;
  double tau_factor = 1.1;
  bool worked_example = false;  // also compute m0_worked
};

/// Strict tail condition on tau: F / (1 + tau^2 r0^2) < (1/2) / (1 + r0^2).
bool tau_condition(double F_bar, double tau, double r0);

/// The two conditions defining m0 at a given m, with prefactor `pi_factor` in the second.
std::pair<bool, bool> m0_conditions(const BoundConstants& c, int m, const AggregateProvider& agg,
                                    double pi_factor = 3.14159265358979323846);

BoundConstants compute_constants(const HypothesisReport& hyp, double ell, double r0, const AggregateProvider& agg,
                                 const ConstantOptions& opt = {});

/// ell is the smallest ell among the reports; r0 must be at least every report's r0.
BoundConstants compute_constants(const HypothesisReport& hyp, const std::map<int, SnrReport>& reports, double r0,
                                 const ConstantOptions& opt = {});

struct BoundValue {
  LogValue value;  // C theta^m centered
  bool valid_for_m = false;
};

BoundValue bound_value(const BoundConstants& c, int m, LogValue centered);
BoundValue bound_value(const BoundConstants& c, int m, double centered);

struct DecayRow {
  int m = 0;
  LogValue centered;
  LogValue bound;
  LogValue ratio;  // C theta^m
  bool valid = false;
  std::optional<LogValue> n_p;  // roots of the signal system alone; +inf marks a continuum
  bool n_p_infinite = false;
};

enum class SignalRoots { none, continuum, product_of_degrees };

/// One row per m: centered E(N^X), the bound and its ratio C theta^m, computed by
/// repeated multiplication so consecutive ratios differ by exactly one factor theta.
std::vector<DecayRow> decay_table(const BoundConstants& c, const std::function<LogValue(int)>& centered,
                                  const std::vector<int>& m_list, SignalRoots roots = SignalRoots::none,
                                  int signal_degree = 0);

}  // namespace kacrice
