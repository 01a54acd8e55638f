#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kacrice/univariate.hpp"

namespace kacrice {

/// Covariance polynomial Q(u) = sum c_k u^k of one noise component; the
/// covariance of X_i is Q(<s, t>).
///
/// Invariants: every c_k >= 0, c_0 > 0 (so Q > 0 on u >= 0) and c_d > 0.
class CovarianceQ {
 public:
  explicit CovarianceQ(poly::Coeffs coeffs, std::string family = "custom");

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const poly::Coeffs& coeffs() const { return coeffs_; }
  double operator()(double u) const { return poly::eval(coeffs_, u); }
  const std::string& family() const { return family_; }

  /// (H2) constants named in closed form by the constructing family, if any.
  std::optional<double> named_D;
  std::optional<double> named_E;

  friend bool operator==(const CovarianceQ& a, const CovarianceQ& b) { return a.coeffs_ == b.coeffs_; }

 private:
  poly::Coeffs coeffs_;
  std::string family_;
};

/// Kostlan / Shub-Smale covariance (1 + u)^d.
CovarianceQ shub_smale_q(int d);

/// prod_k (u + alpha_k), alpha_k >= 1.
CovarianceQ real_roots_q(std::vector<double> alphas);

/// base(u)^l for a base satisfying b_k <= ((nu - k + 1) / k) b_{k-1}, b_k > 0.
CovarianceQ power_family_q(const CovarianceQ& base, int l);

/// The logarithmic-derivative functions of Q used by the Rice formulas:
///   q(u) = Q'/Q,  r(u) = (Q Q'' - Q'^2) / Q^2,  h(u) = 1 + u r(u) / q(u).
///
/// Each is stored as a ratio of polynomials whose leading cancellations are
/// carried out on the coefficients, so values stay accurate for u up to ~1e300.
class RadialProfile {
 public:
  explicit RadialProfile(const CovarianceQ& q);

  double q(double u) const;
  double r(double u) const;
  double h(double u) const;

  /// (1 + u) q(u); tends to the degree d.
  double scaled_q(double u) const;
  /// (1 + u) h(u); tends to c_{d-1} / (d c_d).
  double scaled_h(double u) const;
  /// D - (1 + u) q(u), with exact cancellation of the leading term when D = d.
  double q_deficit(double D, double u) const;

  double log_Q(double u) const { return poly::log_abs_eval(Q_, u); }

  int degree() const { return degree_; }
  double scaled_q_limit() const { return degree_; }
  double scaled_h_limit() const;
  /// lim (1 + u) (d - (1 + u) q(u)) = c_{d-1} / c_d - d.
  double deficit_limit() const;

  const poly::Coeffs& Q() const { return Q_; }
  const poly::Coeffs& Qu() const { return Qu_; }

 private:
  void check_u(double u) const;

  int degree_;
  poly::Coeffs Q_, Qu_, Quu_;
  poly::Coeffs r_num_, Q2_;                    // Q Q'' - Q'^2, Q^2
  poly::Coeffs h_num_, h_den_;                 // Q Q' + u (Q Q'' - Q'^2), Q Q'
  poly::Coeffs scaled_q_num_, scaled_h_num_;   // (1+u) Q', (1+u) h_num
};

RadialProfile radial_profile(const CovarianceQ& q);

/// Grid used for hypothesis checks: log-spaced on [0, max] with n points.
struct UGrid {
  double max = 1e3;
  int n = 4096;

  std::vector<double> points() const;
  std::string describe() const;
};

/// Numerical verification of the noise hypotheses: common h across equations,
/// and the uniform bounds on (1+u) q_i(u) and (1+u) h(u).
struct HypothesisReport {
  std::vector<double> D;     // sup (1+u) q_i(u)
  std::vector<double> E;     // sup (1+u) (D_i - (1+u) q_i(u))
  double q_lower = 0.0;      // inf_i inf_u (1+u) q_i(u)
  double h_lower = 0.0;      // inf (1+u) h(u)
  double h_upper = 0.0;      // sup (1+u) h(u)
  bool h1_holds = false;
  bool h2_holds = false;
  double h1_discrepancy = 0.0;
  std::vector<std::optional<double>> named_D;
  std::vector<std::optional<double>> named_E;
  bool named_bounds_valid = true;
  UGrid grid;
  std::string grid_description;

  double D_bar() const;
  double E_bar() const;
};

/// Independent noise components X_1..X_m. Identical covariance polynomials
/// are stored once and shared.
class NoiseModel {
 public:
  explicit NoiseModel(std::vector<std::shared_ptr<const CovarianceQ>> qs);
  static NoiseModel uniform(int m, const CovarianceQ& q);
  static NoiseModel from(std::vector<CovarianceQ> qs);

  int m() const { return static_cast<int>(qs_.size()); }
  const CovarianceQ& q(int i) const { return *qs_.at(static_cast<std::size_t>(i)); }
  const std::shared_ptr<const CovarianceQ>& q_ptr(int i) const { return qs_.at(static_cast<std::size_t>(i)); }
  const RadialProfile& profile(int i) const;

  struct Group {
    std::shared_ptr<const CovarianceQ> q;
    std::shared_ptr<const RadialProfile> profile;
    std::vector<int> members;
  };
  const std::vector<Group>& groups() const { return groups_; }
  int group_of(int i) const { return group_of_.at(static_cast<std::size_t>(i)); }

  /// Hypothesis report on the default grid, computed on first use.
  const HypothesisReport& hypotheses() const;

 private:
  struct LazyReport;
  std::vector<std::shared_ptr<const CovarianceQ>> qs_;
  std::vector<Group> groups_;
  std::vector<int> group_of_;
  std::shared_ptr<LazyReport> lazy_;
};

HypothesisReport check_hypotheses(const NoiseModel& model, double grid_max = 1e3, int grid_n = 4096);

}  // namespace kacrice
