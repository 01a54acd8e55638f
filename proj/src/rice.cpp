#include "kacrice/rice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "kacrice/errors.hpp"
#include "kacrice/parallel.hpp"
#include "kacrice/rng.hpp"

namespace kacrice {

void QuadratureSettings::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw ValidationError("quadrature tolerances must be positive", "quadrature");
  if (max_subdivisions < 1) throw ValidationError("max_subdivisions must be >= 1", "quadrature.max_subdivisions");
  if (cutoff == Cutoff::fixed && !(cutoff_radius > 0.0))
    throw ValidationError("fixed cutoff needs a positive radius", "quadrature.cutoff_radius");
  if (cutoff == Cutoff::tail_mass && !(tail_mass > 0.0 && tail_mass < 0.1))
    throw ValidationError("tail mass must lie in (0, 0.1)", "quadrature.tail_mass");
  if (eh_samples < 2) throw ValidationError("eh_samples must be >= 2", "quadrature.eh_samples");
}

LogValue centered_normalization(int m) {
  if (m < 1) throw DomainError("centered_normalization: m must be >= 1");
  return LogValue::from_log(log_gamma(0.5 * m) - 0.5 * std::log(2.0) - 0.5 * (m + 1) * std::log(std::numbers::pi));
}

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

// ln E[(sum_i h_i(u) xi_i^2)^{1/2}]. Closed form when every h_i is the same
// function; otherwise a Monte Carlo mean over draws shared by all u.
class EhEvaluator {
 public:
  EhEvaluator(const NoiseModel& model, const QuadratureSettings& s) : model_(model), m_(model.m()) {
    log_chi_ = std::log(chi_mean(m_));
    common_ = model.groups().size() == 1;
    if (!common_) {
      common_ = true;
      for (double u : {0.0, 0.1, 1.0, 10.0, 100.0, 1e3, 1e6}) {
        const double h0 = model.groups()[0].profile->h(u);
        for (const auto& g : model.groups())
          if (std::abs(g.profile->h(u) - h0) > 1e-10 * std::max(1e-300, std::abs(h0))) common_ = false;
      }
    }
    if (common_) return;
    n_ = s.eh_samples;
    xi2_.resize(n_ * static_cast<std::size_t>(m_));
    for (std::size_t k = 0; k < n_; ++k) {
      const KeyedStream stream(s.seed, {0x4568ull, k});
      for (int i = 0; i < m_; ++i) {
        const double x = stream.normal(static_cast<std::uint64_t>(i));
        xi2_[k * static_cast<std::size_t>(m_) + static_cast<std::size_t>(i)] = x * x;
      }
    }
  }

  bool monte_carlo() const { return !common_; }
  double max_rel_std_error() const { return max_rel_se_; }

  double log_value(double u) {
    if (common_) return 0.5 * std::log(model_.groups()[0].profile->h(u)) + log_chi_;
    std::vector<double> h(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) h[static_cast<std::size_t>(i)] = model_.profile(i).h(u);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      double acc = 0.0;
      for (int i = 0; i < m_; ++i)
        acc += h[static_cast<std::size_t>(i)] * xi2_[k * static_cast<std::size_t>(m_) + static_cast<std::size_t>(i)];
      const double v = std::sqrt(acc);
      sum += v, sum2 += v * v;
    }
    const double n = static_cast<double>(n_);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1));
    if (mean > 0.0) max_rel_se_ = std::max(max_rel_se_, std::sqrt(var / n) / mean);
    return std::log(mean);
  }

 private:
  const NoiseModel& model_;
  int m_;
  bool common_ = true;
  double log_chi_ = 0.0;
  std::size_t n_ = 0;
  std::vector<double> xi2_;
  double max_rel_se_ = 0.0;
};

struct LogIntegral {
  double log_value = -std::numeric_limits<double>::infinity();
  double rel_error = 0.0;
};

// int_a^b exp(logf(theta)) dtheta, rescaled by the largest of 257 probe values.
LogIntegral integrate_log(const std::function<double(double)>& logf, double a, double b, const QuadratureSettings& s) {
  if (!(b > a)) return {};
  constexpr int probes = 257;
  double scale = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < probes; ++k) {
    const double v = logf(a + (b - a) * (k + 0.5) / probes);
    if (std::isfinite(v)) scale = std::max(scale, v);
  }
  if (!std::isfinite(scale)) return {};
  auto f = [&](double th) {
    const double v = std::exp(logf(th) - scale);
    return std::isfinite(v) ? v : 0.0;
  };
  double err = 0.0;
  const double I =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, static_cast<unsigned>(s.max_subdivisions),
                                                                    s.rel_tol, &err);
  if (!(I > 0.0)) return {};
  const double rel = err / I;
  if (err > std::max(s.abs_tol * std::exp(-scale), 1e3 * s.rel_tol * I))
    throw NumericalError("radial quadrature did not converge (relative error " + std::to_string(rel) + ")", rel);
  return {scale + std::log(I), rel};
}

// Log of rho^{m-1} [prod q_i(rho^2)]^{1/2} E_h(rho^2) sec^2(theta) at rho = tan(theta).
class CenteredIntegrand {
 public:
  CenteredIntegrand(const NoiseModel& model, const QuadratureSettings& s) : model_(model), eh_(model, s) {}

  double log_rho_part(double rho) {
    const int m = model_.m();
    const double u = rho * rho;
    double v = m > 1 ? (m - 1) * std::log(rho) : 0.0;
    for (const auto& g : model_.groups()) v += 0.5 * static_cast<double>(g.members.size()) * std::log(g.profile->q(u));
    return v + eh_.log_value(u);
  }

  double operator()(double theta, const std::function<double(double)>& log_damping) {
    const double rho = std::tan(theta);
    const double c = std::cos(theta);
    double v = log_rho_part(rho) - 2.0 * std::log(c);
    if (log_damping) v += log_damping(rho);
    return v;
  }

  const EhEvaluator& eh() const { return eh_; }

 private:
  const NoiseModel& model_;
  EhEvaluator eh_;
};

double theta_upper(const QuadratureSettings& s) {
  return s.cutoff == QuadratureSettings::Cutoff::fixed ? std::atan(s.cutoff_radius) : kHalfPi;
}

struct Piece {
  double value = 0.0;
  double abs_error = 0.0;
  double rel_se = 0.0;
};

Piece integrate_piece(CenteredIntegrand& F, int m, double th_lo, double th_hi,
                      const std::function<double(double)>& log_damping, const QuadratureSettings& s) {
  const auto I = integrate_log([&](double th) { return F(th, log_damping); }, th_lo, th_hi, s);
  const double pref = centered_normalization(m).log_magnitude + sphere_area(m).log_magnitude;
  const double v = std::exp(pref + I.log_value);
  return {v, v * I.rel_error, F.eh().max_rel_std_error()};
}

}  // namespace

QuadratureResult centered_expectation_between(const NoiseModel& model, double r_lo, double r_hi,
                                              const QuadratureSettings& s) {
  s.validate();
  if (!(r_lo >= 0.0) || !(r_hi >= r_lo)) throw DomainError("centered_expectation: need 0 <= r_lo <= r_hi");
  CenteredIntegrand F(model, s);
  const double hi = std::min(std::atan(r_hi), theta_upper(s));
  const auto p = integrate_piece(F, model.m(), std::atan(r_lo), hi, {}, s);
  return {p.value, p.abs_error, p.value * p.rel_se, F.eh().monte_carlo()};
}

QuadratureResult centered_expectation(const NoiseModel& model, const QuadratureSettings& s) {
  return centered_expectation_between(model, 0.0, std::numeric_limits<double>::infinity(), s);
}

double centered_tail_radius(const NoiseModel& model, double mass, const QuadratureSettings& s) {
  if (!(mass > 0.0 && mass < 1.0)) throw DomainError("centered_tail_radius: mass must lie in (0, 1)");
  const double total = centered_expectation(model, s).value;
  double lo = 0.0, hi = kHalfPi;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double tail = centered_expectation_between(model, std::tan(mid), std::numeric_limits<double>::infinity(), s).value;
    (tail > mass * total ? lo : hi) = mid;
  }
  return std::tan(hi);
}

double radial_kernel_integral(int m, double a, double b) {
  if (m < 1) throw DomainError("radial_kernel_integral: m must be >= 1");
  if (!(a >= 0.0) || !(b >= a)) throw DomainError("radial_kernel_integral: need 0 <= a <= b");
  auto f = [m](double th) { return m == 1 ? 1.0 : std::pow(std::sin(th), m - 1); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, std::atan(a), std::atan(b), 15, 1e-14);
}

double radial_kernel_closed_form(int m) {
  if (m < 1) throw DomainError("radial_kernel_closed_form: m must be >= 1");
  return std::sqrt(std::numbers::pi) * std::exp(log_gamma(0.5 * m) - log_gamma(0.5 * (m + 1))) / 2.0;
}

QuadratureResult perturbed_exact_1d(const SignalComponent& signal, const CovarianceQ& q, const QuadratureSettings& s) {
  s.validate();
  const int deg = signal_degree(signal);
  if (const auto* d = std::get_if<DenseSignal>(&signal); d && d->p.m() != 1)
    throw DomainError("perturbed_exact_1d: signal must be univariate");
  if (const auto* sp = std::get_if<SeparableSignal>(&signal); sp && sp->axis != 0)
    throw DomainError("perturbed_exact_1d: signal must be univariate");
  if (!std::holds_alternative<ZeroSignal>(signal)) {
    const bool dense = std::holds_alternative<DenseSignal>(signal);
    if (dense ? deg > q.degree() : deg != q.degree())
      throw DomainError("perturbed_exact_1d: signal degree does not match the noise degree");
  }
  const RadialProfile prof(q);
  const auto P = to_polynomial(signal, 1, std::max(deg, 0));
  const poly::Coeffs Pc(P.coeffs().begin(), P.coeffs().end());
  const auto dPc = poly::derivative(Pc);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

  auto integrand = [&](double th) {
    const double t = std::tan(th), c = std::cos(th);
    const double u = t * t;
    const double half_logQ = 0.5 * prof.log_Q(u);
    const double p = poly::eval(Pc, t);
    const double qu = prof.q(u), hu = prof.h(u);
    const double slope = (poly::eval(dPc, t) - p * qu * t) * std::exp(-half_logQ);
    const double alpha = slope / std::sqrt(qu);
    const double z = p * std::exp(-half_logQ);
    const double v = std::sqrt(qu) * abs_shifted_normal_mean(std::sqrt(hu), alpha) * inv_sqrt_2pi *
                     std::exp(-0.5 * z * z) / (c * c);
    return std::isfinite(v) ? v : 0.0;
  };

  // Break points at the signal's real roots keep the adaptive rule on smooth pieces.
  std::vector<double> cuts{-kHalfPi, 0.0, kHalfPi};
  if (poly::degree(Pc) >= 1)
    for (double r : poly::real_roots(Pc)) cuts.push_back(std::atan(r));
  const double lim = theta_upper(s);
  for (double& x : cuts) x = std::clamp(x, -lim, lim);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0, err_total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (!(cuts[k + 1] > cuts[k])) continue;
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, cuts[k], cuts[k + 1], static_cast<unsigned>(s.max_subdivisions), s.rel_tol, &err);
    err_total += err;
  }
  if (err_total > std::max(s.abs_tol, 1e3 * s.rel_tol * total))
    throw NumericalError("perturbed_exact_1d: quadrature did not converge", err_total / total);
  return {total, err_total, 0.0, false};
}

McEstimate perturbed_radial_mc(const SignalSpec& signal, const NoiseModel& model, int node_budget,
                               std::size_t det_samples, std::uint64_t seed, unsigned threads) {
  if (!signal.all_radial())
    throw DomainError("perturbed_radial_mc: every signal component must be radial; use bound_chain for other signals");
  if (signal.m() != model.m()) throw DomainError("perturbed_radial_mc: signal and noise dimensions differ");
  if (node_budget < 1 || det_samples < 2) throw DomainError("perturbed_radial_mc: need node_budget >= 1, det_samples >= 2");
  const int m = model.m();
  const auto um = static_cast<std::size_t>(m);
  std::vector<RadialSignalProfile> sig;
  for (int i = 0; i < m; ++i) sig.emplace_back(signal[i], model.q(i));

  using Rule = boost::math::quadrature::gauss<double, 20>;
  const int panels = (node_budget + 19) / 20;
  const double width = kHalfPi / panels;
  std::vector<double> log_w, sqrt_h, alpha;  // per node; sqrt_h and alpha are node-major, m entries each
  const double log_const = sphere_area(m).log_magnitude - 0.5 * m * std::log(2.0 * std::numbers::pi);
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * width, half = 0.5 * width;
    for (std::size_t k = 0; k < Rule::abscissa().size(); ++k) {
      for (int sgn : {-1, 1}) {
        const double x = Rule::abscissa()[k];
        if (x == 0.0 && sgn < 0) continue;
        const double th = mid + sgn * half * x;
        const double rho = std::tan(th), u = rho * rho;
        double lw = log_const + std::log(half * Rule::weights()[k]) - 2.0 * std::log(std::cos(th));
        if (m > 1) lw += (m - 1) * std::log(rho);
        double damp = 0.0;
        for (int i = 0; i < m; ++i) {
          const auto& prof = model.profile(i);
          const double qi = prof.q(u);
          lw += 0.5 * std::log(qi);
          damp += sig[static_cast<std::size_t>(i)].ratio_sq(rho);
          sqrt_h.push_back(std::sqrt(prof.h(u)));
          alpha.push_back(sig[static_cast<std::size_t>(i)].slope(rho) / std::sqrt(qi));
        }
        log_w.push_back(lw - 0.5 * damp);
      }
    }
  }
  const std::size_t nodes = log_w.size();
  std::vector<double> weight(nodes);
  for (std::size_t n = 0; n < nodes; ++n) weight[n] = std::exp(log_w[n]);

  // Draw k fixes one standard Gaussian matrix shared by all nodes, so each draw
  // yields a full quadrature and the standard error is the spread across draws.
  std::vector<double> per_draw(det_samples);
  parallel_for(det_samples, threads, [&](std::size_t k) {
    const KeyedStream stream(seed, {0x646574ull, k});
    Eigen::MatrixXd G(m, m), T(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) G(i, j) = stream.normal(static_cast<std::uint64_t>(i * m + j));
    double acc = 0.0;
    for (std::size_t n = 0; n < nodes; ++n) {
      T = G;
      for (std::size_t j = 0; j < um; ++j)
        T(0, static_cast<Eigen::Index>(j)) = sqrt_h[n * um + j] * G(0, static_cast<Eigen::Index>(j)) + alpha[n * um + j];
      acc += weight[n] * std::abs(Eigen::PartialPivLU<Eigen::MatrixXd>(T).determinant());
    }
    per_draw[k] = acc;
  });
  const McValue v = summarize(per_draw);
  return {v.value, v.std_error, det_samples, seed, CountMethod::radial_rice};
}

std::string to_string(Damping d) {
  switch (d) {
    case Damping::exact_radial: return "exact_radial";
    case Damping::separable_dual_bound: return "separable_dual_bound";
    case Damping::none: return "none";
  }
  return "none";
}

namespace {

// min_x T(x)^2 - mu x^2 from the real critical points; -inf when unbounded.
double inner_min(const poly::Coeffs& T, double mu) {
  const int d = poly::degree(T);
  if (d <= 0) return d == 0 ? T[0] * T[0] : 0.0;
  const double lead = T[static_cast<std::size_t>(d)];
  if (d == 1 && mu >= lead * lead) return -std::numeric_limits<double>::infinity();
  auto T2 = poly::multiply(T, T);
  if (T2.size() < 3) T2.resize(3, 0.0);
  T2[2] -= mu;
  const auto crit = poly::real_roots(poly::derivative(T2));
  double best = std::numeric_limits<double>::infinity();
  for (double x : crit) best = std::min(best, poly::eval(T2, x));
  return best;
}

}  // namespace

double separable_sphere_min(const SignalSpec& signal, const NoiseModel& model, double rho) {
  const int m = signal.m();
  std::vector<const poly::Coeffs*> Ts;
  std::vector<int> axis_use(static_cast<std::size_t>(m), 0);
  double max_logQ = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    if (std::holds_alternative<ZeroSignal>(signal[i])) continue;
    const auto* sp = std::get_if<SeparableSignal>(&signal[i]);
    if (!sp) throw DomainError("separable_sphere_min: signal is not separable");
    Ts.push_back(&sp->T);
    ++axis_use[static_cast<std::size_t>(sp->axis)];
    max_logQ = std::max(max_logQ, model.profile(i).log_Q(rho * rho));
  }
  if (Ts.empty()) return 0.0;
  // sum_i T_i(x_i)^2 over the sphere is bounded below by the Lagrangian dual
  // when each coordinate carries exactly one equation; otherwise only mu = 0.
  const bool permutation = std::all_of(axis_use.begin(), axis_use.end(), [](int c) { return c == 1; });
  auto dual = [&](double mu) {
    double v = mu * rho * rho;
    const poly::Coeffs* last = nullptr;
    double last_min = 0.0;
    for (const auto* T : Ts) {
      if (!last || *T != *last) last = T, last_min = inner_min(*T, mu);
      v += last_min;
    }
    return v;
  };
  double best = dual(0.0);
  if (permutation) {
    double cap = std::numeric_limits<double>::infinity();
    for (const auto* T : Ts)
      if (poly::degree(*T) == 1) cap = std::min(cap, (*T)[1] * (*T)[1] * (1.0 - 1e-9));
    double hi = std::min(1.0, 0.5 * cap);
    for (int k = 0; k < 200 && 2.0 * hi < cap && dual(2.0 * hi) > dual(hi); ++k) hi *= 2.0;
    hi = std::min(2.0 * hi, cap);
    const auto [mu, neg] = boost::math::tools::brent_find_minima([&](double x) { return -dual(x); }, 0.0, hi, 40);
    (void)mu;
    if (std::isfinite(neg)) best = std::max(best, -neg);
  }
  return std::max(0.0, best) * std::exp(-max_logQ);
}

BoundChain bound_chain(const SignalSpec& signal, const NoiseModel& model, const SnrReport& snr,
                       const HypothesisReport& hyp, const QuadratureSettings& s) {
  s.validate();
  if (!hyp.h1_holds) throw PreconditionError("(H1) fails: the functions h_i differ across equations", "H1");
  if (!hyp.h2_holds) throw PreconditionError("(H2) fails: (1+u) q_i or (1+u) h is not bounded as required", "H2");
  if (signal.m() != model.m()) throw DomainError("bound_chain: signal and noise dimensions differ");
  if (static_cast<int>(snr.H.size()) != model.m()) throw DomainError("bound_chain: SNR report has the wrong length");
  const int m = model.m();
  BoundChain b;
  b.m = m;
  b.r0 = snr.r0;
  b.ell = snr.ell;

  std::function<double(double)> log_damping;
  std::vector<RadialSignalProfile> sig;
  bool separable = true;
  for (const auto& c : signal.components())
    separable = separable && (std::holds_alternative<ZeroSignal>(c) || std::holds_alternative<SeparableSignal>(c));
  if (signal.all_radial()) {
    b.damping = Damping::exact_radial;
    for (int i = 0; i < m; ++i) sig.emplace_back(signal[i], model.q(i));
    log_damping = [&sig](double rho) {
      double v = 0.0;
      for (const auto& p : sig) v += p.ratio_sq(rho);
      return -0.5 * v;
    };
  } else if (separable) {
    b.damping = Damping::separable_dual_bound;
    log_damping = [&](double rho) { return -0.5 * separable_sphere_min(signal, model, rho); };
  }

  CenteredIntegrand F(model, s);
  const auto centered = centered_expectation(model, s);
  b.centered = centered.value;
  const double th0 = std::atan(b.r0), top = theta_upper(s);
  const auto p1 = integrate_piece(F, m, 0.0, std::min(th0, top), log_damping, s);
  const auto p2 = integrate_piece(F, m, std::min(th0, top), top, log_damping, s);
  b.H1_part = p1.value;
  b.H2_part = p2.value;
  b.H_m = p1.value + p2.value;

  const double hl = hyp.h_lower, hu = hyp.h_upper, ql = hyp.q_lower;
  b.s_m = std::sqrt(hu / hl) * std::exp(0.5 * (m * snr.A_m / ql + m * snr.B_m / (hl * ql)));
  b.final_bound = b.s_m * b.H_m;
  b.std_error = b.final_bound * std::max(p1.rel_se, p2.rel_se);
  b.H2_bound = std::exp(-0.5 * b.ell * m) * b.centered;

  double log_pref = centered_normalization(m).log_magnitude + sphere_area(m).log_magnitude + std::log(chi_mean(m)) +
                    0.5 * std::log(hu);
  for (double D : hyp.D) log_pref += 0.5 * std::log(D);
  b.H1_bound = std::exp(log_pref) * radial_kernel_integral(m, 0.0, b.r0);
  const double r2 = b.r0 * b.r0;
  b.H1_bound_closed = std::exp(log_pref + std::log(kHalfPi) + 0.5 * (m - 1) * std::log(r2 / (1.0 + r2)));
  b.C1 = std::numbers::pi * std::exp(2.0) * std::sqrt(hu / hl) * std::sqrt(1.0 + r2) / b.r0;
  b.H1_bound_C1 = b.C1 * std::sqrt(static_cast<double>(m)) * std::exp(0.5 * m * std::log(r2 / (r2 + 0.5))) * b.centered;
  return b;
}

}  // namespace kacrice
