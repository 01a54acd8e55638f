#include "kacrice/rootcount.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <gmpxx.h>

#include "kacrice/errors.hpp"
#include "kacrice/parallel.hpp"
#include "kacrice/rice.hpp"
#include "kacrice/rng.hpp"
#include "kacrice/univariate.hpp"

namespace kacrice {

namespace {

using RatPoly = std::vector<mpq_class>;

void trim(RatPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

// Positive rescaling so the leading coefficient is +-1; sign patterns are unchanged.
void normalize(RatPoly& p) {
  const mpq_class lc = abs(p.back());
  for (auto& c : p) c /= lc;
}

RatPoly remainder(RatPoly a, const RatPoly& b) {
  while (a.size() >= b.size()) {
    const mpq_class f = a.back() / b.back();
    const std::size_t shift = a.size() - b.size();
    for (std::size_t k = 0; k + 1 < b.size(); ++k) a[shift + k] -= f * b[k];
    a.pop_back();
    trim(a);
    if (a.empty()) break;
  }
  return a;
}

int sign_changes(const std::vector<int>& signs) {
  int changes = 0, prev = 0;
  for (int s : signs) {
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++changes;
    prev = s;
  }
  return changes;
}

std::vector<double> trimmed(std::span<const double> c) {
  std::vector<double> p(c.begin(), c.end());
  while (!p.empty() && std::abs(p.back()) <= 1e-300) p.pop_back();
  if (p.empty()) throw DomainError("count_roots_1d: zero polynomial");
  return p;
}

}  // namespace

int count_roots_1d(std::span<const double> coeffs) {
  const auto c = trimmed(coeffs);
  if (c.size() == 1) return 0;
  RatPoly p0(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) p0[k] = mpq_class(c[k]);  // exact: doubles are dyadic
  RatPoly p1(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) p1[k - 1] = p0[k] * static_cast<long>(k);
  normalize(p0);
  normalize(p1);
  std::vector<RatPoly> seq{p0, p1};
  while (true) {
    RatPoly r = remainder(seq[seq.size() - 2], seq.back());
    if (r.empty()) break;
    for (auto& x : r) x = -x;
    normalize(r);
    seq.push_back(std::move(r));
  }
  std::vector<int> at_pos, at_neg;
  for (const auto& p : seq) {
    const int s = sgn(p.back());
    const int deg = static_cast<int>(p.size()) - 1;
    at_pos.push_back(s);
    at_neg.push_back(deg % 2 == 0 ? s : -s);
  }
  return sign_changes(at_neg) - sign_changes(at_pos);
}

int count_roots_1d_companion(std::span<const double> coeffs, double imag_tol) {
  const auto c = trimmed(coeffs);
  if (c.size() == 1) return 0;
  return static_cast<int>(poly::real_roots(c, imag_tol).size());
}

namespace {

// Homogenized polynomial in (x0, x1, x2) with its terms flattened for speed.
struct Homogeneous {
  struct Term {
    double c;
    int e0, e1, e2;
  };
  std::vector<Term> terms;
  int degree = 0;

  explicit Homogeneous(const SampledPolynomial& p) : degree(p.degree()) {
    for (std::size_t k = 0; k < p.coeffs().size(); ++k) {
      const double c = p.coeffs()[k];
      if (c == 0.0) continue;
      const auto& j = p.basis().at(k).e;
      terms.push_back({c, degree - j[0] - j[1], j[0], j[1]});
    }
  }

  // Value, the absolute-value evaluation and the gradient at x.
  void eval(const Eigen::Vector3d& x, double& v, double& scale, Eigen::Vector3d& g, std::vector<double>& pw) const {
    const int d = degree;
    pw.assign(3 * static_cast<std::size_t>(d + 1), 1.0);
    for (int a = 0; a < 3; ++a)
      for (int k = 1; k <= d; ++k) pw[a * (d + 1) + k] = pw[a * (d + 1) + k - 1] * x[a];
    auto P = [&](int a, int e) { return e < 0 ? 0.0 : pw[static_cast<std::size_t>(a * (d + 1) + e)]; };
    v = 0.0, scale = 0.0;
    g.setZero();
    for (const auto& t : terms) {
      const double m = P(0, t.e0) * P(1, t.e1) * P(2, t.e2);
      v += t.c * m;
      scale += std::abs(t.c * m);
      if (t.e0 > 0) g[0] += t.c * t.e0 * P(0, t.e0 - 1) * P(1, t.e1) * P(2, t.e2);
      if (t.e1 > 0) g[1] += t.c * t.e1 * P(0, t.e0) * P(1, t.e1 - 1) * P(2, t.e2);
      if (t.e2 > 0) g[2] += t.c * t.e2 * P(0, t.e0) * P(1, t.e1) * P(2, t.e2 - 1);
    }
  }
};

}  // namespace

Count2dResult count_roots_2d(const SampledPolynomial& f1, const SampledPolynomial& f2, const Count2dSettings& s) {
  if (f1.m() != 2 || f2.m() != 2) throw DomainError("count_roots_2d: polynomials must have two variables");
  if (!(s.box_R > 0.0)) throw DomainError("count_roots_2d: box radius must be positive");
  const Homogeneous h1(f1), h2(f2);
  const int k = s.grid_k > 0 ? s.grid_k : 24 * std::max({1, f1.degree(), f2.degree()});
  Count2dResult out;
  out.seeds = k * k;
  std::vector<double> pw;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double a = -1.0 + (2.0 * i + 1.0) / k, b = -1.0 + (2.0 * j + 1.0) / k;
      Eigen::Vector3d x(1.0, std::tan(std::numbers::pi * a / 2), std::tan(std::numbers::pi * b / 2));
      x.normalize();
      bool converged = false, singular = false;
      double best_res = std::numeric_limits<double>::infinity();
      int polish = 2;
      for (int it = 0; it < s.max_newton; ++it) {
        double v1, v2, s1, s2;
        Eigen::Vector3d g1, g2;
        h1.eval(x, v1, s1, g1, pw);
        h2.eval(x, v2, s2, g2, pw);
        // Relative residual; the floor keeps an exact zero (0 / 0) from reading as NaN.
        const double tiny = std::numeric_limits<double>::min();
        const double res = std::max(std::abs(v1) / std::max(s1, tiny), std::abs(v2) / std::max(s2, tiny));
        best_res = std::min(best_res, res);
        if (res <= s.tol && polish-- <= 0) {
          converged = true;
          break;
        }
        Eigen::Matrix3d A;
        A.row(0) = g1.transpose();
        A.row(1) = g2.transpose();
        A.row(2) = x.transpose();
        const Eigen::PartialPivLU<Eigen::Matrix3d> lu(A);
        if (!(lu.rcond() > 1e-14)) {
          singular = true;
          break;
        }
        const Eigen::Vector3d dx = lu.solve(Eigen::Vector3d(-v1, -v2, 0.0));
        x = (x + dx).normalized();
      }
      if (!converged) {
        if (!singular && best_res < 1e-4) ++out.stalled;
        continue;
      }
      // Reject roots with a singular Jacobian (measure zero) and points at infinity.
      double v1, v2, s1, s2;
      Eigen::Vector3d g1, g2;
      h1.eval(x, v1, s1, g1, pw);
      h2.eval(x, v2, s2, g2, pw);
      Eigen::Matrix3d A;
      A.row(0) = g1.transpose();
      A.row(1) = g2.transpose();
      A.row(2) = x.transpose();
      if (!(Eigen::PartialPivLU<Eigen::Matrix3d>(A).rcond() > 1e-12)) continue;
      if (std::abs(x[0]) < 1e-300) continue;
      const std::array<double, 2> t{x[1] / x[0], x[2] / x[0]};
      if (!std::isfinite(t[0]) || !std::isfinite(t[1])) continue;
      if (std::max(std::abs(t[0]), std::abs(t[1])) > s.box_R) continue;
      const double nt = std::hypot(t[0], t[1]);
      const bool seen = std::any_of(out.roots.begin(), out.roots.end(), [&](const std::array<double, 2>& r) {
        return std::hypot(r[0] - t[0], r[1] - t[1]) <= 1e-6 * (1.0 + nt);
      });
      if (!seen) out.roots.push_back(t);
    }
  }
  out.count = static_cast<int>(out.roots.size());
  out.warning = out.stalled * 100 > out.seeds;
  return out;
}

Count2dResult count_roots_2d(const SampledSystem& noise, const SignalSpec& signal, const Count2dSettings& s) {
  if (noise.m != 2 || signal.m() != 2) throw DomainError("count_roots_2d: system must have m = 2");
  std::vector<SampledPolynomial> f;
  for (int i = 0; i < 2; ++i) {
    SampledPolynomial p = noise.polys[static_cast<std::size_t>(i)];
    p += to_polynomial(signal[i], 2, std::max(p.degree(), signal_degree(signal[i])));
    f.push_back(std::move(p));
  }
  return count_roots_2d(f[0], f[1], s);
}

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r) {
  return mix64(seed ^ mix64(static_cast<std::uint64_t>(r) + 0x9E3779B97F4A7C15ull));
}

McRun mc_expected_roots(const NoiseModel& model, const SignalSpec& signal, const McOptions& opt) {
  const int m = model.m();
  if (m > 2)
    throw DomainError("mc_expected_roots: empirical counting supports m <= 2; use the centered expectation or the "
                      "bound chain for m = " + std::to_string(m));
  if (signal.m() != m) throw DomainError("mc_expected_roots: signal and noise dimensions differ");
  if (opt.n < 100) throw DomainError("mc_expected_roots: need at least 100 replicates");
  for (int i = 0; i < m; ++i)
    if (signal_degree(signal[i]) > model.q(i).degree())
      throw DomainError("mc_expected_roots: signal degree exceeds the noise degree");

  McRun run;
  run.counts.assign(opt.n, 0);
  run.seeds.resize(opt.n);
  for (std::size_t r = 0; r < opt.n; ++r) run.seeds[r] = replicate_seed(opt.seed, r);
  Count2dSettings s2;
  if (m == 2) {
    run.box_R = opt.box_R > 0.0 ? opt.box_R : 2.0 * centered_tail_radius(model, 1e-3);
    s2.box_R = run.box_R;
  }
  std::vector<char> warned(opt.n, 0);
  const int bezout = m == 2 ? model.q(0).degree() * model.q(1).degree() : model.q(0).degree();

  parallel_for(opt.n, opt.threads, [&](std::size_t r) {
    const SampledSystem sys = sample_system(model, run.seeds[r]);
    int count = 0;
    if (m == 1) {
      SampledPolynomial p = sys.polys[0];
      p += to_polynomial(signal[0], 1, p.degree());
      const auto coeffs = p.coeffs();
      count = opt.method_1d == CountMethod::companion ? count_roots_1d_companion(coeffs) : count_roots_1d(coeffs);
      int deg = static_cast<int>(coeffs.size()) - 1;
      while (deg > 0 && std::abs(coeffs[static_cast<std::size_t>(deg)]) <= 1e-300) --deg;
      // A real polynomial with simple roots has as many real roots as its degree, mod 2.
      if ((count - deg) % 2 != 0)
        throw NumericalError("root count parity violated at replicate " + std::to_string(r));
    } else {
      const auto res = count_roots_2d(sys, signal, s2);
      count = res.count;
      warned[r] = res.warning ? 1 : 0;
    }
    if (count > bezout)
      throw NumericalError("replicate " + std::to_string(r) + " has " + std::to_string(count) +
                           " roots, above the Bezout number " + std::to_string(bezout));
    run.counts[r] = count;
  });

  std::vector<double> x(run.counts.begin(), run.counts.end());
  const McValue v = summarize(x);
  run.warnings = static_cast<int>(std::count(warned.begin(), warned.end(), 1));
  const CountMethod method = m == 2 ? CountMethod::subdivision : opt.method_1d;
  run.estimate = {v.value, v.std_error, opt.n, opt.seed, method};
  return run;
}

}  // namespace kacrice
