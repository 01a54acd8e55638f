#include "kacrice/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "kacrice/errors.hpp"
#include "kacrice/parallel.hpp"
#include "kacrice/special.hpp"
#include "optimize.hpp"

namespace kacrice {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};

double norm_sq(std::span<const double> t) {
  double s = 0.0;
  for (double x : t) s += x * x;
  return s;
}

void check_radial(const RadialPower& p) {
  if (p.d <= 0 || p.d % 2 != 0) throw DomainError("RadialPower: exponent must be even and positive");
  if (!(p.r > 0.0) || !std::isfinite(p.r)) throw DomainError("RadialPower: radius must be positive");
}

// Radial and separable signals share the noise degree; dense ones may be lower.
void check_degree(const SignalComponent& c, const CovarianceQ& q) {
  if (std::holds_alternative<ZeroSignal>(c)) return;
  const int d = signal_degree(c);
  const bool ok = std::holds_alternative<DenseSignal>(c) ? d <= q.degree() : d == q.degree();
  if (!ok)
    throw DomainError("signal degree " + std::to_string(d) + " does not match the noise degree " +
                      std::to_string(q.degree()));
}

using detail::Optimum;

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace

std::string variant_name(const SignalComponent& c) {
  return std::visit(overloaded{[](const ZeroSignal&) { return std::string("zero"); },
                               [](const RadialPower&) { return std::string("radial"); },
                               [](const SeparableSignal&) { return std::string("separable"); },
                               [](const DenseSignal&) { return std::string("dense"); }},
                    c);
}

int signal_degree(const SignalComponent& c) {
  return std::visit(overloaded{[](const ZeroSignal&) { return 0; }, [](const RadialPower& p) { return p.d; },
                               [](const SeparableSignal& p) { return std::max(0, poly::degree(p.T)); },
                               [](const DenseSignal& p) { return p.p.degree(); }},
                    c);
}

bool is_radial(const SignalComponent& c) {
  return std::holds_alternative<ZeroSignal>(c) || std::holds_alternative<RadialPower>(c);
}

double signal_value(const SignalComponent& c, std::span<const double> t) {
  return std::visit(overloaded{[](const ZeroSignal&) { return 0.0; },
                               [&](const RadialPower& p) {
                                 return p.scale * (std::pow(norm_sq(t), p.d / 2) - std::pow(p.r, p.d));
                               },
                               [&](const SeparableSignal& p) { return poly::eval(p.T, t[static_cast<std::size_t>(p.axis)]); },
                               [&](const DenseSignal& p) { return p.p.evaluate(t); }},
                    c);
}

std::vector<double> signal_gradient(const SignalComponent& c, std::span<const double> t) {
  std::vector<double> g(t.size(), 0.0);
  std::visit(overloaded{[](const ZeroSignal&) {},
                        [&](const RadialPower& p) {
                          const double f = p.scale * p.d * std::pow(norm_sq(t), p.d / 2 - 1);
                          for (std::size_t h = 0; h < t.size(); ++h) g[h] = f * t[h];
                        },
                        [&](const SeparableSignal& p) {
                          const auto a = static_cast<std::size_t>(p.axis);
                          g[a] = poly::eval(poly::derivative(p.T), t[a]);
                        },
                        [&](const DenseSignal& p) { g = p.p.gradient(t); }},
             c);
  return g;
}

SampledPolynomial to_polynomial(const SignalComponent& c, int m, int degree) {
  SampledPolynomial out(m, degree);
  if (signal_degree(c) > degree) throw DomainError("to_polynomial: signal degree exceeds the target degree");
  std::visit(overloaded{[](const ZeroSignal&) {},
                        [&](const RadialPower& p) {
                          // (sum t_h^2)^{d/2} = sum over |k| = d/2 of (d/2)! / k! t^{2k}.
                          const int half = p.d / 2;
                          const auto& basis = out.basis();
                          for (std::size_t k = 0; k < basis.size(); ++k) {
                            const auto& j = basis.at(k);
                            if (j.norm() != p.d) continue;
                            if (std::any_of(j.e.begin(), j.e.end(), [](int x) { return x % 2 != 0; })) continue;
                            double lg = log_gamma(half + 1.0);
                            for (int x : j.e) lg -= log_gamma(x / 2 + 1.0);
                            out.coeffs()[k] = p.scale * std::exp(lg);
                          }
                          MultiIndex zero{std::vector<int>(static_cast<std::size_t>(m), 0)};
                          out.set(zero, out.coefficient(zero) - p.scale * std::pow(p.r, p.d));
                        },
                        [&](const SeparableSignal& p) {
                          for (std::size_t k = 0; k < p.T.size(); ++k) {
                            if (p.T[k] == 0.0) continue;
                            MultiIndex j{std::vector<int>(static_cast<std::size_t>(m), 0)};
                            j.e.at(static_cast<std::size_t>(p.axis)) = static_cast<int>(k);
                            out.set(j, p.T[k]);
                          }
                        },
                        [&](const DenseSignal& p) {
                          if (p.p.m() != m) throw DomainError("to_polynomial: dense signal dimension mismatch");
                          out = p.p.embedded(degree);
                        }},
             c);
  return out;
}

SignalSpec::SignalSpec(int m, std::vector<SignalComponent> components) : m_(m), components_(std::move(components)) {
  if (m < 1) throw DomainError("SignalSpec: m must be positive");
  if (static_cast<int>(components_.size()) != m)
    throw DomainError("SignalSpec: " + std::to_string(components_.size()) + " components for m = " + std::to_string(m));
  for (const auto& c : components_) {
    if (const auto* r = std::get_if<RadialPower>(&c)) check_radial(*r);
    if (const auto* s = std::get_if<SeparableSignal>(&c))
      if (s->axis < 0 || s->axis >= m) throw DomainError("SeparableSignal: axis out of range");
    if (const auto* d = std::get_if<DenseSignal>(&c))
      if (d->p.m() != m) throw DomainError("DenseSignal: polynomial has " + std::to_string(d->p.m()) + " variables");
  }
}

SignalSpec SignalSpec::zero(int m) { return SignalSpec(m, std::vector<SignalComponent>(static_cast<std::size_t>(m), ZeroSignal{})); }

SignalSpec SignalSpec::radial(std::vector<int> degrees, double r) {
  std::vector<SignalComponent> c;
  for (int d : degrees) c.emplace_back(RadialPower{d, r, 1.0});
  return SignalSpec(static_cast<int>(degrees.size()), std::move(c));
}

SignalSpec SignalSpec::separable(int m, const poly::Coeffs& T) {
  std::vector<SignalComponent> c;
  for (int i = 0; i < m; ++i) c.emplace_back(SeparableSignal{T, i});
  return SignalSpec(m, std::move(c));
}

bool SignalSpec::all_radial() const { return std::all_of(components_.begin(), components_.end(), is_radial); }

bool SignalSpec::all_zero() const {
  return std::all_of(components_.begin(), components_.end(),
                     [](const SignalComponent& c) { return std::holds_alternative<ZeroSignal>(c); });
}

SignalSpec SignalSpec::scaled(double lambda) const {
  std::vector<SignalComponent> out = components_;
  for (auto& c : out)
    std::visit(overloaded{[](ZeroSignal&) {}, [&](RadialPower& p) { p.scale *= lambda; },
                          [&](SeparableSignal& p) { p.T = poly::scale(p.T, lambda); },
                          [&](DenseSignal& p) {
                            for (double& a : p.p.coeffs()) a *= lambda;
                          }},
               c);
  return SignalSpec(m_, std::move(out));
}

RadialSignalProfile::RadialSignalProfile(const SignalComponent& c, const CovarianceQ& q) {
  Qrho_ = poly::compose_square(q.coeffs());
  if (std::holds_alternative<ZeroSignal>(c)) {
    zero_ = true;
    return;
  }
  const auto* p = std::get_if<RadialPower>(&c);
  if (!p) throw DomainError("RadialSignalProfile: signal is not radial");
  if (p->scale == 0.0) {
    zero_ = true;
    return;
  }
  poly::Coeffs P(static_cast<std::size_t>(p->d) + 1, 0.0);
  P[0] = -p->scale * std::pow(p->r, p->d);
  P.back() = p->scale;
  const auto dP = poly::derivative(P);
  const auto Qu_rho = poly::compose_square(poly::derivative(q.coeffs()));
  // N = P' Q(rho^2) - P rho Q'(rho^2); g' = N / Q(rho^2)^{3/2}.
  slope_num_ = poly::add(poly::multiply(dP, Qrho_), poly::scale(poly::shift(poly::multiply(P, Qu_rho), 1), -1.0));
  if (p->d == q.degree() && !slope_num_.empty()) slope_num_.back() = 0.0;  // leading terms cancel exactly
  P2_ = poly::multiply(P, P);
  if (p->d == q.degree())
    limit_ = p->scale * p->scale / q.coeffs().back();
  else
    limit_ = p->d < q.degree() ? 0.0 : std::numeric_limits<double>::infinity();
  root_ = p->r;
}

double RadialSignalProfile::slope(double rho) const {
  if (zero_) return 0.0;
  const double r = poly::ratio(slope_num_, Qrho_, rho);
  if (r == 0.0) return 0.0;
  return std::copysign(std::exp(std::log(std::abs(r)) - 0.5 * poly::log_abs_eval(Qrho_, rho)), r);
}

double RadialSignalProfile::ratio_sq(double rho) const {
  if (zero_) return 0.0;
  if (root_ && rho == *root_) return 0.0;
  return poly::ratio(P2_, Qrho_, rho);
}

double RadialSignalProfile::ratio_sq_limit() const { return zero_ ? 0.0 : limit_; }

std::string to_string(Certainty c) {
  switch (c) {
    case Certainty::exact: return "exact";
    case Certainty::lower_estimate: return "lower_estimate";
    case Certainty::upper_estimate: return "upper_estimate";
  }
  return "exact";
}

namespace {

enum class Weight { H, K };

// Gradient of P / sqrt(Q) for the separable signal in coordinates x = t_axis,
// s = norm of the remaining coordinates; returns the H or K objective.
struct SeparableObjective {
  const poly::Coeffs& T;
  poly::Coeffs dT;
  RadialProfile prof;
  Weight w;

  SeparableObjective(const poly::Coeffs& T_, const CovarianceQ& q, Weight w_)
      : T(T_), dT(poly::derivative(T_)), prof(q), w(w_) {}

  double operator()(double x, double s) const {
    const double u = x * x + s * s;
    const double rho = std::sqrt(u);
    const double inv = std::exp(-0.5 * prof.log_Q(u));
    const double Tx = poly::eval(T, x), dTx = poly::eval(dT, x), qu = prof.q(u);
    if (w == Weight::H) {
      const double a = (dTx - Tx * qu * x) * inv;
      const double b = Tx * qu * s * inv;
      return (1.0 + rho) * std::hypot(a, b);
    }
    if (rho < 1e-12) return 0.0;
    return (1.0 + u) * std::abs(dTx * x - Tx * qu * u) * inv / rho;
  }
};

Optimum maximize_polar(const std::function<double(double, double)>& F, const SupSettings& s, double lo) {
  const auto rho = detail::log_grid(lo, s.rho_max, std::max(64, s.grid_n / 8));
  const int na = std::max(3, s.angle_n);
  std::vector<double> phi(static_cast<std::size_t>(na));
  for (int j = 0; j < na; ++j) phi[static_cast<std::size_t>(j)] = std::numbers::pi * j / (na - 1);
  auto G = [&](double r, double a) { return F(r * std::cos(a), r * std::sin(a)); };
  double best = -1.0;
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    for (std::size_t j = 0; j < phi.size(); ++j) {
      const double v = G(rho[i], phi[j]);
      if (v > best) best = v, bi = i, bj = j;
    }
  double r = rho[bi], a = phi[bj];
  const double r_lo = rho[bi == 0 ? 0 : bi - 1], r_hi = rho[std::min(bi + 1, rho.size() - 1)];
  const double a_lo = phi[bj == 0 ? 0 : bj - 1], a_hi = phi[std::min(bj + 1, phi.size() - 1)];
  for (int round = 0; round < 4; ++round) {
    if (r_hi > r_lo) {
      const auto [x, v] = boost::math::tools::brent_find_minima([&](double z) { return -G(z, a); }, r_lo, r_hi, 50);
      if (-v > best) best = -v, r = x;
    }
    if (a_hi > a_lo) {
      const auto [x, v] = boost::math::tools::brent_find_minima([&](double z) { return -G(r, z); }, a_lo, a_hi, 50);
      if (-v > best) best = -v, a = x;
    }
  }
  return {best, r};
}

// Best of `starts` Halton points (mapped through tan) and the origin, refined
// by Nelder-Mead from the four best; minimizes f.
Optimum multistart_min(const std::function<double(const std::vector<double>&)>& f, int m, int starts,
                       std::vector<double>* arg) {
  std::vector<std::vector<double>> pts;
  pts.emplace_back(static_cast<std::size_t>(m), 0.0);
  for (int k = 1; k <= starts; ++k) {
    auto u = detail::halton(static_cast<std::uint64_t>(k), static_cast<std::size_t>(m));
    for (double& x : u) x = std::tan(std::numbers::pi * (x - 0.5));
    pts.push_back(std::move(u));
  }
  std::vector<double> val(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) val[k] = f(pts[k]);
  std::vector<std::size_t> order(pts.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
  const std::size_t refine = std::min<std::size_t>(4, order.size());
  std::vector<std::vector<double>> xs(refine);
  std::vector<double> fx(refine);
  parallel_for(refine, worker_count(), [&](std::size_t k) {
    xs[k] = pts[order[k]];
    fx[k] = detail::nelder_mead(f, xs[k], 0.1, 400 * m).value;
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k < refine; ++k)
    if (fx[k] < fx[best]) best = k;
  Optimum o{std::min(fx[best], val[order[0]]), 0.0};
  const auto& x = fx[best] <= val[order[0]] ? xs[best] : pts[order[0]];
  o.arg = std::sqrt(norm_sq(x));
  if (arg) *arg = x;
  return o;
}

double dense_objective(const SampledPolynomial& p, const RadialProfile& prof, Weight w, const std::vector<double>& t) {
  const double u = norm_sq(t), rho = std::sqrt(u);
  const double inv = std::exp(-0.5 * prof.log_Q(u));
  const double P = p.evaluate(t), qu = prof.q(u);
  const auto g = p.gradient(t);
  if (w == Weight::H) {
    double n2 = 0.0;
    for (std::size_t h = 0; h < t.size(); ++h) {
      const double c = (g[h] - P * qu * t[h]) * inv;
      n2 += c * c;
    }
    return (1.0 + rho) * std::sqrt(n2);
  }
  if (rho < 1e-12) return 0.0;
  double dot = 0.0;
  for (std::size_t h = 0; h < t.size(); ++h) dot += g[h] * t[h];
  return (1.0 + u) * std::abs(dot / rho - P * qu * rho) * inv;
}

FunctionalValue sup_functional(const SignalComponent& p, const CovarianceQ& q, int m, const SupSettings& s, Weight w) {
  check_degree(p, q);
  const double lo = w == Weight::K ? 1e-12 : 0.0;
  return std::visit(
      overloaded{
          [](const ZeroSignal&) { return FunctionalValue{0.0, Certainty::exact, 0.0}; },
          [&](const RadialPower&) {
            const RadialSignalProfile prof(p, q);
            const auto pts = detail::log_grid(lo, s.rho_max, s.grid_n);
            const auto o = detail::maximize_on_grid(pts, [&](double rho) {
              const double wt = w == Weight::H ? 1.0 + rho : 1.0 + rho * rho;
              return wt * std::abs(prof.slope(rho));
            });
            return FunctionalValue{o.value, Certainty::exact, o.arg};
          },
          [&](const SeparableSignal& sp) {
            const SeparableObjective F(sp.T, q, w);
            if (m == 1) {
              const auto pts = detail::log_grid(lo, s.rho_max, s.grid_n);
              const auto pos = detail::maximize_on_grid(pts, [&](double x) { return F(x, 0.0); });
              const auto neg = detail::maximize_on_grid(pts, [&](double x) { return F(-x, 0.0); });
              const auto& o = pos.value >= neg.value ? pos : neg;
              return FunctionalValue{o.value, Certainty::exact, o.arg};
            }
            const auto o = maximize_polar([&](double x, double y) { return F(x, y); }, s, lo);
            return FunctionalValue{o.value, Certainty::lower_estimate, o.arg};
          },
          [&](const DenseSignal& dp) {
            if (dp.p.m() != m) throw DomainError("dense signal dimension does not match m");
            const RadialProfile prof(q);
            const auto o = multistart_min(
                [&](const std::vector<double>& t) { return -dense_objective(dp.p, prof, w, t); }, m, s.starts, nullptr);
            return FunctionalValue{-o.value, Certainty::lower_estimate, o.arg};
          }},
      p);
}

}  // namespace

FunctionalValue functional_H(const SignalComponent& p, const CovarianceQ& q, int m, const SupSettings& s) {
  return sup_functional(p, q, m, s, Weight::H);
}

FunctionalValue functional_K(const SignalComponent& p, const CovarianceQ& q, int m, const SupSettings& s) {
  return sup_functional(p, q, m, s, Weight::K);
}

FunctionalValue functional_L(const SignalComponent& p, const CovarianceQ& q, double r, int m, const SupSettings& s) {
  if (!(r > 0.0)) throw DomainError("functional_L: r must be positive");
  check_degree(p, q);
  return std::visit(
      overloaded{
          [](const ZeroSignal&) { return FunctionalValue{0.0, Certainty::exact, 0.0}; },
          [&](const RadialPower&) {
            const RadialSignalProfile prof(p, q);
            if (prof.root_radius() && *prof.root_radius() >= r)
              return FunctionalValue{0.0, Certainty::exact, *prof.root_radius()};
            const auto pts = detail::log_grid(r, s.rho_max, s.grid_n);
            auto o = detail::minimize_on_grid(pts, [&](double rho) { return prof.ratio_sq(rho); });
            if (prof.ratio_sq_limit() < o.value) o = {prof.ratio_sq_limit(), std::numeric_limits<double>::infinity()};
            return FunctionalValue{o.value, Certainty::exact, o.arg};
          },
          [&](const SeparableSignal& sp) {
            // For m >= 2 the ratio tends to 0 along t_axis fixed, ||t|| -> infinity.
            if (m >= 2) return FunctionalValue{0.0, Certainty::exact, std::numeric_limits<double>::infinity()};
            const RadialProfile prof(q);
            auto f = [&](double x) {
              const double T = poly::eval(sp.T, x);
              return T * T * std::exp(-prof.log_Q(x * x));
            };
            const auto pts = detail::log_grid(r, s.rho_max, s.grid_n);
            const auto pos = detail::minimize_on_grid(pts, f);
            const auto neg = detail::minimize_on_grid(pts, [&](double x) { return f(-x); });
            Optimum o = pos.value <= neg.value ? pos : neg;
            const double lead = sp.T.back();
            const double limit = lead * lead / q.coeffs().back();
            if (limit < o.value) o = {limit, std::numeric_limits<double>::infinity()};
            return FunctionalValue{o.value, Certainty::exact, o.arg};
          },
          [&](const DenseSignal& dp) {
            if (dp.p.m() != m) throw DomainError("dense signal dimension does not match m");
            const RadialProfile prof(q);
            auto outside = [&](std::vector<double> y) {
              const double n = std::sqrt(norm_sq(y));
              if (n == 0.0) {
                y.assign(y.size(), 0.0);
                y[0] = r;
              } else if (n < r) {
                for (double& x : y) x *= r / n;
              }
              return y;
            };
            const auto o = multistart_min(
                [&](const std::vector<double>& y) {
                  const auto t = outside(y);
                  const double P = dp.p.evaluate(t);
                  return P * P * std::exp(-prof.log_Q(norm_sq(t)));
                },
                m, s.starts, nullptr);
            return FunctionalValue{o.value, Certainty::upper_estimate, std::max(r, o.arg)};
          }},
      p);
}

namespace {

bool same_shape(const SignalComponent& a, const SignalComponent& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<RadialPower>(&a)) return *x == std::get<RadialPower>(b);
  if (const auto* x = std::get_if<SeparableSignal>(&a)) return x->T == std::get<SeparableSignal>(b).T;
  return std::holds_alternative<ZeroSignal>(a);
}

}  // namespace

SnrReport snr_report(const SignalSpec& signal, const NoiseModel& model, double r0, const SupSettings& s) {
  if (signal.m() != model.m())
    throw DomainError("snr_report: signal has " + std::to_string(signal.m()) + " equations, noise has " +
                      std::to_string(model.m()));
  if (!(r0 > 0.0)) throw DomainError("snr_report: r0 must be positive");
  const int m = signal.m();
  SnrReport rep;
  rep.r0 = r0;
  rep.H.resize(static_cast<std::size_t>(m));
  rep.K.resize(static_cast<std::size_t>(m));
  rep.L.resize(static_cast<std::size_t>(m));
  rep.H_certainty.resize(static_cast<std::size_t>(m));
  rep.K_certainty.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    int reuse = -1;
    for (int j = 0; j < i && reuse < 0; ++j)
      if (model.group_of(j) == model.group_of(i) && same_shape(signal[j], signal[i])) reuse = j;
    if (reuse >= 0) {
      const auto uj = static_cast<std::size_t>(reuse);
      rep.H[ui] = rep.H[uj], rep.K[ui] = rep.K[uj], rep.L[ui] = rep.L[uj];
      rep.H_certainty[ui] = rep.H_certainty[uj], rep.K_certainty[ui] = rep.K_certainty[uj];
      continue;
    }
    const auto H = functional_H(signal[i], model.q(i), m, s);
    const auto K = functional_K(signal[i], model.q(i), m, s);
    const auto L = functional_L(signal[i], model.q(i), r0, m, s);
    rep.H[ui] = H.value, rep.K[ui] = K.value, rep.L[ui] = L.value;
    rep.H_certainty[ui] = H.certainty, rep.K_certainty[ui] = K.certainty;
    if (L.certainty != Certainty::exact) rep.ell_certified = false;
  }
  for (int i = 0; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    rep.A_m += rep.H[ui] * rep.H[ui] / (i + 1);
    rep.B_m += rep.K[ui] * rep.K[ui] / (i + 1);
  }
  rep.A_m /= m;
  rep.B_m /= m;
  rep.ell = *std::min_element(rep.L.begin(), rep.L.end());
  rep.h4_holds = rep.ell > 0.0;
  return rep;
}

namespace {

// Least-squares slope of log y against log x over the positive entries.
double loglog_slope(const std::vector<int>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(y[k] > 0.0)) continue;
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, ++n;
  }
  if (n < 2) return 0.0;
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

bool decays(const std::vector<double>& y, double slope) {
  if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) return true;
  return slope < 0.0 && y.back() < y.front();
}

}  // namespace

SnrSweep snr_sweep(const FamilyAt& family, const std::vector<int>& m_list, double r0, const SupSettings& s) {
  if (m_list.empty()) throw DomainError("snr_sweep: empty m list");
  if (!std::is_sorted(m_list.begin(), m_list.end())) throw DomainError("snr_sweep: m list must be ascending");
  SnrSweep out;
  for (int m : m_list) {
    const auto [signal, model] = family(m);
    const auto rep = snr_report(signal, model, r0, s);
    out.m.push_back(m);
    out.A.push_back(rep.A_m);
    out.B.push_back(rep.B_m);
  }
  out.slope_A = loglog_slope(out.m, out.A);
  out.slope_B = loglog_slope(out.m, out.B);
  out.h3_supported = out.m.size() >= 2 && decays(out.A, out.slope_A) && decays(out.B, out.slope_B);
  return out;
}

}  // namespace kacrice
