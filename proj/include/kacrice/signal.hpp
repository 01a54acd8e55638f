#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kacrice/covariance.hpp"
#include "kacrice/ensemble.hpp"
#include "kacrice/univariate.hpp"

namespace kacrice {

struct ZeroSignal {
  bool operator==(const ZeroSignal&) const = default;
};

/// ||t||^d - r^d with d even.
struct RadialPower {
  int d = 2;
  double r = 1.0;
  double scale = 1.0;  // multiplies the whole component
  bool operator==(const RadialPower&) const = default;
};

/// T(t_axis) for a univariate polynomial T.
struct SeparableSignal {
  poly::Coeffs T;
  int axis = 0;
};

/// Arbitrary polynomial given by its coefficients on the multi-index basis.
struct DenseSignal {
  SampledPolynomial p;
};

using SignalComponent = std::variant<ZeroSignal, RadialPower, SeparableSignal, DenseSignal>;

std::string variant_name(const SignalComponent& c);
int signal_degree(const SignalComponent& c);
bool is_radial(const SignalComponent& c);  // zero or RadialPower

double signal_value(const SignalComponent& c, std::span<const double> t);
std::vector<double> signal_gradient(const SignalComponent& c, std::span<const double> t);

/// Coefficients on the degree-`degree` multi-index basis in m variables.
SampledPolynomial to_polynomial(const SignalComponent& c, int m, int degree);

/// The deterministic system P_1..P_m.
class SignalSpec {
 public:
  SignalSpec(int m, std::vector<SignalComponent> components);

  static SignalSpec zero(int m);
  /// P_i = ||t||^{d_i} - r^{d_i}.
  static SignalSpec radial(std::vector<int> degrees, double r);
  static SignalSpec radial(int m, int d, double r) { return radial(std::vector<int>(static_cast<std::size_t>(m), d), r); }
  /// P_i(t) = T(t_i).
  static SignalSpec separable(int m, const poly::Coeffs& T);

  int m() const { return m_; }
  const SignalComponent& operator[](int i) const { return components_.at(static_cast<std::size_t>(i)); }
  const std::vector<SignalComponent>& components() const { return components_; }
  bool all_radial() const;
  bool all_zero() const;

  /// lambda * P.
  SignalSpec scaled(double lambda) const;

 private:
  int m_;
  std::vector<SignalComponent> components_;
};

/// Radial signal component against one covariance, as functions of rho = ||t||:
///   g(rho) = P / sqrt(Q(rho^2)), its derivative, and P^2 / Q.
class RadialSignalProfile {
 public:
  RadialSignalProfile(const SignalComponent& c, const CovarianceQ& q);

  double slope(double rho) const;        // g'(rho)
  double ratio_sq(double rho) const;     // P(rho)^2 / Q(rho^2)
  double ratio_sq_limit() const;         // as rho -> inf
  /// Smallest rho with P(rho) = 0, if any.
  std::optional<double> root_radius() const { return root_; }

 private:
  bool zero_ = false;
  poly::Coeffs Qrho_;     // Q(rho^2) as a polynomial in rho
  poly::Coeffs slope_num_;
  poly::Coeffs P2_;
  double limit_ = 0.0;
  std::optional<double> root_;
};

enum class Certainty { exact, lower_estimate, upper_estimate };
std::string to_string(Certainty c);

struct FunctionalValue {
  double value = 0.0;
  Certainty certainty = Certainty::exact;
  double at_radius = 0.0;  // ||t|| of the optimizer
};

/// Optimizer controls for the sup / inf functionals.
struct SupSettings {
  double rho_max = 1e3;   // log-spaced radial grid on [0, rho_max] plus tail points
  int grid_n = 4096;
  int angle_n = 181;      // polar angle grid for two-dimensional reductions
  int starts = 64;        // quasi-random starts for full-dimensional searches
};

/// H(P, Q) = sup_t (1 + ||t||) ||grad (P / sqrt(Q(||t||^2)))||.
FunctionalValue functional_H(const SignalComponent& p, const CovarianceQ& q, int m, const SupSettings& s = {});
/// K(P, Q) = sup_{t != 0} (1 + ||t||^2) |radial derivative of P / sqrt(Q(||t||^2))|.
FunctionalValue functional_K(const SignalComponent& p, const CovarianceQ& q, int m, const SupSettings& s = {});
/// L(P, Q, r) = inf_{||t|| >= r} P(t)^2 / Q(||t||^2).
FunctionalValue functional_L(const SignalComponent& p, const CovarianceQ& q, double r, int m,
                             const SupSettings& s = {});

/// Signal-over-noise aggregates at one m.
struct SnrReport {
  std::vector<double> H, K, L;
  double A_m = 0.0;  // (1/m) sum H_i^2 / i
  double B_m = 0.0;  // (1/m) sum K_i^2 / i
  double ell = 0.0;  // min_i L(P_i, Q_i, r0)
  double r0 = 0.0;
  bool ell_certified = true;            // false when some L is only an optimizer estimate
  std::optional<bool> h3_holds;         // asymptotic; only decided by a sweep over m
  bool h4_holds = false;
  std::vector<Certainty> H_certainty, K_certainty;
};

SnrReport snr_report(const SignalSpec& signal, const NoiseModel& model, double r0, const SupSettings& s = {});

/// A_m, B_m over a list of m with fitted log-log decay slopes.
struct SnrSweep {
  std::vector<int> m;
  std::vector<double> A, B;
  double slope_A = 0.0;
  double slope_B = 0.0;
  bool h3_supported = false;
};

using FamilyAt = std::function<std::pair<SignalSpec, NoiseModel>(int m)>;
SnrSweep snr_sweep(const FamilyAt& family, const std::vector<int>& m_list, double r0, const SupSettings& s = {});

}  // namespace kacrice
