#include "kacrice/univariate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unsupported/Eigen/Polynomials>

#include "kacrice/errors.hpp"

namespace kacrice::poly {

namespace {

inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  const double z = s - a;
  e = (a - (s - z)) + (b - z);
}

inline void two_prod(double a, double b, double& p, double& e) {
  p = a * b;
  e = std::fma(a, b, -p);
}

Coeffs reversed(std::span<const double> c, int deg) {
  Coeffs r(static_cast<std::size_t>(deg + 1));
  for (int k = 0; k <= deg; ++k) r[static_cast<std::size_t>(deg - k)] = c[static_cast<std::size_t>(k)];
  return r;
}

}  // namespace

double eval(std::span<const double> c, double x) {
  if (c.empty()) return 0.0;
  double s = c.back();
  double err = 0.0;
  for (std::size_t i = c.size() - 1; i-- > 0;) {
    double p, pi, sigma;
    two_prod(s, x, p, pi);
    two_sum(p, c[i], s, sigma);
    err = err * x + (pi + sigma);
  }
  return s + err;
}

int degree(std::span<const double> c) {
  for (std::size_t i = c.size(); i-- > 0;)
    if (c[i] != 0.0) return static_cast<int>(i);
  return -1;
}

Coeffs derivative(std::span<const double> c) {
  if (c.size() <= 1) return {0.0};
  Coeffs d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
  return d;
}

Coeffs multiply(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  Coeffs out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Coeffs add(std::span<const double> a, std::span<const double> b) {
  Coeffs out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

Coeffs scale(std::span<const double> a, double s) {
  Coeffs out(a.begin(), a.end());
  for (double& x : out) x *= s;
  return out;
}

Coeffs compose_square(std::span<const double> c) {
  if (c.empty()) return {};
  Coeffs out(2 * c.size() - 1, 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) out[2 * k] = c[k];
  return out;
}

Coeffs shift(std::span<const double> c, int k) {
  Coeffs out(static_cast<std::size_t>(k), 0.0);
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

double ratio(std::span<const double> num, std::span<const double> den, double x) {
  const int dn = degree(num);
  const int dd = degree(den);
  if (dd < 0) throw DomainError("poly::ratio: zero denominator polynomial");
  if (dn < 0) return 0.0;
  if (std::abs(x) <= 1.0) return eval(num.first(static_cast<std::size_t>(dn + 1)), x) / eval(den, x);
  const double v = 1.0 / x;
  const Coeffs rn = reversed(num, dn);
  const Coeffs rd = reversed(den, dd);
  const double core = eval(rn, v) / eval(rd, v);
  const int power = dn - dd;
  if (power == 0) return core;
  // |x|^power may itself overflow while the product does not.
  const double log_mag = power * std::log(std::abs(x)) + std::log(std::abs(core));
  const double sign = ((x < 0.0 && (power % 2 != 0)) ? -1.0 : 1.0) * (core < 0.0 ? -1.0 : 1.0);
  if (core == 0.0) return 0.0;
  return sign * std::exp(log_mag);
}

double log_abs_eval(std::span<const double> c, double x) {
  const int d = degree(c);
  if (d < 0) return -std::numeric_limits<double>::infinity();
  if (std::abs(x) <= 1.0) return std::log(std::abs(eval(c.first(static_cast<std::size_t>(d + 1)), x)));
  const Coeffs r = reversed(c, d);
  return d * std::log(std::abs(x)) + std::log(std::abs(eval(r, 1.0 / x)));
}

std::vector<double> real_roots(std::span<const double> c, double imag_tol) {
  const int d = degree(c);
  if (d < 0) throw DomainError("poly::real_roots: zero polynomial");
  std::vector<double> out;
  if (d == 0) return out;
  if (d == 1) {
    out.push_back(-c[0] / c[1]);
    return out;
  }
  Eigen::VectorXd coeffs(d + 1);
  for (int k = 0; k <= d; ++k) coeffs[k] = c[static_cast<std::size_t>(k)];
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(coeffs);
  for (const auto& z : solver.roots())
    if (std::abs(z.imag()) <= imag_tol * (1.0 + std::abs(z.real()))) out.push_back(z.real());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace kacrice::poly
