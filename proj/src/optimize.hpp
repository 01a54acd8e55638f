#pragma once

// Internal optimization helpers shared by the functional and rootcount code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/tools/minima.hpp>

namespace kacrice::detail {

/// {lo + expm1(k a)} for k = 0..n-1 with a chosen so the last point is lo + span,
/// followed by lo + 10^4 .. lo + 10^8 when `tail` is set.
inline std::vector<double> log_grid(double lo, double span, int n, bool tail = true) {
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(n) + 5);
  const double a = std::log1p(span) / (n - 1);
  for (int k = 0; k < n; ++k) pts.push_back(lo + std::expm1(a * k));
  if (tail)
    for (double x = 1e4; x <= 1e8 * 1.0001; x *= 10.0)
      if (x > span) pts.push_back(lo + x);
  return pts;
}

struct Optimum {
  double value = 0.0;
  double arg = 0.0;
};

/// Maximum of f over an ascending grid, refined by Brent on the bracketing cells.
template <class F>
Optimum maximize_on_grid(const std::vector<double>& pts, F&& f, int bits = 50) {
  Optimum best{-std::numeric_limits<double>::infinity(), pts.front()};
  std::size_t at = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double v = f(pts[k]);
    if (v > best.value) best = {v, pts[k]}, at = k;
  }
  const double a = pts[at == 0 ? 0 : at - 1];
  const double b = pts[std::min(at + 1, pts.size() - 1)];
  if (b > a) {
    auto neg = [&](double x) { return -f(x); };
    const auto [x, v] = boost::math::tools::brent_find_minima(neg, a, b, bits);
    if (-v > best.value) best = {-v, x};
  }
  return best;
}

template <class F>
Optimum minimize_on_grid(const std::vector<double>& pts, F&& f, int bits = 50) {
  auto neg = [&](double x) { return -f(x); };
  Optimum o = maximize_on_grid(pts, neg, bits);
  o.value = -o.value;
  return o;
}

/// Nelder-Mead minimization from x0 with initial simplex edge `step`.
inline Optimum nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double>& x,
                           double step, int max_iter) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> s(n + 1, x);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i) s[i + 1][i] += step * (1.0 + std::abs(x[i]));
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(s[i]);
  std::vector<std::size_t> order(n + 1);
  auto point = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> p(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = c[j] + t * (w[j] - c[j]);
    return p;
  };
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t lo = order.front(), hi = order.back(), nh = order[n - 1];
    if (std::abs(fv[hi] - fv[lo]) <= 1e-14 * (std::abs(fv[lo]) + 1e-300)) break;
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != hi)
        for (std::size_t j = 0; j < n; ++j) c[j] += s[i][j] / static_cast<double>(n);
    auto xr = point(c, s[hi], -1.0);
    const double fr = f(xr);
    if (fr < fv[lo]) {
      auto xe = point(c, s[hi], -2.0);
      const double fe = f(xe);
      if (fe < fr) s[hi] = xe, fv[hi] = fe;
      else s[hi] = xr, fv[hi] = fr;
    } else if (fr < fv[nh]) {
      s[hi] = xr, fv[hi] = fr;
    } else {
      auto xc = fr < fv[hi] ? point(c, xr, 0.5) : point(c, s[hi], 0.5);
      const double fc = f(xc);
      if (fc < std::min(fr, fv[hi])) {
        s[hi] = xc, fv[hi] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == lo) continue;
          s[i] = point(s[lo], s[i], 0.5);
          fv[i] = f(s[i]);
        }
      }
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  x = s[best];
  return {fv[best], 0.0};
}

/// Radical inverse of `index` in the given prime base.
inline double radical_inverse(std::uint64_t index, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

/// Point `index` (>= 1) of the Halton sequence; bases repeat beyond 16 dimensions.
inline std::vector<double> halton(std::uint64_t index, std::size_t dim) {
  static constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  std::vector<double> u(dim);
  for (std::size_t h = 0; h < dim; ++h) u[h] = radical_inverse(index, primes[h % 16]);
  return u;
}

}  // namespace kacrice::detail
