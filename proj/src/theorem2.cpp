#include "kacrice/theorem2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/digamma.hpp>

#include "kacrice/errors.hpp"

namespace kacrice {

AggregateProvider uniform_aggregates(double H, double K) {
  return [H, K](int m) {
    // Harm(m) = digamma(m + 1) + Euler's constant.
    const double harm = boost::math::digamma(m + 1.0) + std::numbers::egamma;
    return std::pair{H * H * harm / m, K * K * harm / m};
  };
}

AggregateProvider carried_aggregates(const std::map<int, SnrReport>& reports) {
  if (reports.empty()) throw DomainError("carried_aggregates: no reports");
  std::map<int, std::pair<double, double>> table;
  for (const auto& [m, r] : reports) table[m] = {r.A_m, r.B_m};
  return [table](int m) {
    auto it = table.upper_bound(m);
    if (it == table.begin()) return it->second;
    return std::prev(it)->second;
  };
}

bool tau_condition(double F_bar, double tau, double r0) {
  return F_bar / (1.0 + tau * tau * r0 * r0) < 0.5 / (1.0 + r0 * r0);
}

std::pair<bool, bool> m0_conditions(const BoundConstants& c, int m, const AggregateProvider& agg, double pi_factor) {
  const auto [A, B] = agg(m);
  const double dm = m;
  const double lhs1 = 0.5 * (dm * A / c.q_lower + dm * B / (c.h_lower * c.q_lower)) + dm * std::log(c.theta1) +
                      0.5 * std::log(dm);
  const bool first = lhs1 <= dm * std::log(c.theta);
  const double x = c.tau * c.tau * c.r0 * c.r0;
  const double lhs2 = std::log(pi_factor) + 0.5 * (dm - 1.0) * std::log(x / (1.0 + x));
  const bool second = lhs2 < -2.0 - 0.5 * std::log(dm);
  return {first, second};
}

namespace {

// 1 + the last m in [1, limit] where `holds` fails; throws if it fails at the limit.
template <class F>
int least_from_which(int limit, F&& holds, const std::string& what) {
  int last_fail = 0;
  for (int m = 1; m <= limit; ++m)
    if (!holds(m)) last_fail = m;
  if (last_fail == limit)
    throw InfeasibleError(what + ": condition still fails at the scan limit m = " + std::to_string(limit));
  return last_fail + 1;
}

bool is_integer(double x) { return std::isfinite(x) && x == std::floor(x) && std::abs(x) < 1e6; }

std::optional<long> exact_sqrt(long n) {
  const long r = std::lround(std::sqrt(static_cast<double>(n)));
  for (long k = std::max(0L, r - 1); k <= r + 1; ++k)
    if (k * k == n) return k;
  return std::nullopt;
}

// sqrt(n) with square factors pulled out: returns (a, b) with sqrt(n) = a sqrt(b).
std::pair<long, long> split_sqrt(long n) {
  long a = 1;
  for (long f = 2; f * f <= n; ++f)
    while (n % (f * f) == 0) n /= f * f, a *= f;
  return {a, n};
}

long gcd(long a, long b) { return b == 0 ? a : gcd(b, a % b); }

// Closed forms when r0 = k is an integer, the radius branch is active and hbar = hlow:
// theta = (n + k sqrt 2) / (2n) when 2k^2 + 1 = n^2, C = (30/k) sqrt(1 + k^2).
void attach_symbolic(BoundConstants& c) {
  if (!is_integer(c.r0) || !c.theta1_radius_branch || c.h_ratio != 1.0) return;
  const long k = std::lround(c.r0);
  if (k <= 0) return;
  if (const auto n = exact_sqrt(2 * k * k + 1)) {
    c.theta_symbolic = "(" + std::to_string(*n) + "+" + std::to_string(k) + "*sqrt(2))/" + std::to_string(2 * *n);
  }
  const auto [a, b] = split_sqrt(1 + k * k);
  long num = 30 * a, den = k;
  const long g = gcd(num, den);
  num /= g, den /= g;
  std::string s = std::to_string(num);
  if (b != 1) s += "*sqrt(" + std::to_string(b) + ")";
  if (den != 1) s += "/" + std::to_string(den);
  c.C_symbolic = s;
}

}  // namespace

BoundConstants compute_constants(const HypothesisReport& hyp, double ell, double r0, const AggregateProvider& agg,
                                 const ConstantOptions& opt) {
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw DomainError("compute_constants: r0 must be positive and finite");
  if (!hyp.h1_holds) throw PreconditionError("(H1) fails: the functions h_i differ across equations", "H1");
  if (!hyp.h2_holds) throw PreconditionError("(H2) fails: the (1+u) q_i and (1+u) h bounds do not hold", "H2");
  if (!(ell > 0.0)) throw PreconditionError("(H4) fails: ell = " + std::to_string(ell) + " is not positive", "H4");

  BoundConstants c;
  c.r0 = r0;
  c.ell = ell;
  c.q_lower = hyp.q_lower;
  c.h_lower = hyp.h_lower;
  c.h_ratio = hyp.h_upper / hyp.h_lower;
  const double radius_branch = r0 / std::sqrt(r0 * r0 + 0.5);
  const double ell_branch = std::exp(-ell / 2.0);
  c.theta1_radius_branch = radius_branch >= ell_branch;
  c.theta1 = std::max(radius_branch, ell_branch);
  c.theta = (1.0 + c.theta1) / 2.0;

  c.F_bar = 0.0;
  for (std::size_t i = 0; i < hyp.D.size(); ++i) c.F_bar = std::max(c.F_bar, hyp.E[i] / hyp.D[i]);
  c.F_bar_ceiling = hyp.E_bar() / hyp.q_lower;

  if (c.F_bar == 0.0) {
    c.tau = 1.0;
  } else {
    double tau = opt.tau_start;
    int k = 0;
    for (; k < 5000 && !tau_condition(c.F_bar, tau, r0); ++k) tau *= opt.tau_factor;
    if (k == 5000) throw InfeasibleError("no tau satisfies the tail condition F/(1+tau^2 r0^2) < 1/(2(1+r0^2))");
    c.tau = tau;
  }

  c.m0 = least_from_which(opt.m_scan_limit, [&](int m) {
    const auto [a, b] = m0_conditions(c, m, agg);
    return a && b;
  }, "m0 scan");
  c.m0_half_pi = least_from_which(opt.m_scan_limit, [&](int m) {
    const auto [a, b] = m0_conditions(c, m, agg, std::numbers::pi / 2);
    return a && b;
  }, "m0 scan (pi/2 variant)");
  if (opt.worked_example) {
    const double D_bar = hyp.D_bar();
    const double c1 = 8.0 * D_bar * D_bar;
    const double log_kappa = std::log(c.theta / c.theta1);
    c.m0_worked = least_from_which(opt.m_scan_limit, [&](int m) {
      return c1 + (c1 + 0.5) * std::log(static_cast<double>(m)) <= m * log_kappa;
    }, "m0 scan (worked criterion)");
  }

  const double geom = std::sqrt(1.0 + r0 * r0) / r0;
  c.C = 30.0 * c.h_ratio * geom;
  c.C_sqrt_ratio = 30.0 * std::sqrt(c.h_ratio) * geom;
  attach_symbolic(c);
  return c;
}

BoundConstants compute_constants(const HypothesisReport& hyp, const std::map<int, SnrReport>& reports, double r0,
                                 const ConstantOptions& opt) {
  if (reports.empty()) throw DomainError("compute_constants: no SNR reports");
  double ell = std::numeric_limits<double>::infinity();
  for (const auto& [m, r] : reports) {
    if (r0 < r.r0) throw DomainError("compute_constants: r0 is below an SNR report's r0");
    ell = std::min(ell, r.ell);
  }
  auto c = compute_constants(hyp, ell, r0, carried_aggregates(reports), opt);
  c.aggregates_carried = true;
  return c;
}

BoundValue bound_value(const BoundConstants& c, int m, LogValue centered) {
  if (m < 1) throw DomainError("bound_value: m must be >= 1");
  BoundValue b;
  b.valid_for_m = m >= c.m0;
  if (centered.is_zero()) return b;
  b.value = LogValue::from_log(std::log(c.C) + m * std::log(c.theta)) * centered;
  return b;
}

BoundValue bound_value(const BoundConstants& c, int m, double centered) {
  return bound_value(c, m, LogValue::from(centered));
}

std::vector<DecayRow> decay_table(const BoundConstants& c, const std::function<LogValue(int)>& centered,
                                  const std::vector<int>& m_list, SignalRoots roots, int signal_degree) {
  if (!std::is_sorted(m_list.begin(), m_list.end())) throw DomainError("decay_table: m list must be ascending");
  if (!m_list.empty() && m_list.front() < 1) throw DomainError("decay_table: m must be >= 1");
  std::vector<DecayRow> rows;
  // ratio_m = C theta^m by repeated multiplication; switches to logs on underflow.
  int at = 0;
  double ratio = c.C;
  double log_ratio = std::log(c.C);
  for (int m : m_list) {
    while (at < m) {
      ++at;
      ratio = (at == 1) ? c.C * c.theta : ratio * c.theta;
      log_ratio += std::log(c.theta);
    }
    DecayRow r;
    r.m = m;
    r.centered = centered(m);
    r.ratio = ratio > std::numeric_limits<double>::min() ? LogValue::from(ratio) : LogValue::from_log(log_ratio);
    r.bound = r.ratio * r.centered;
    r.valid = m >= c.m0;
    if (roots == SignalRoots::continuum) r.n_p_infinite = true;
    if (roots == SignalRoots::product_of_degrees) r.n_p = LogValue::from_log(m * std::log(static_cast<double>(signal_degree)));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace kacrice
