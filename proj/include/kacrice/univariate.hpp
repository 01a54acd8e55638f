#pragma once

#include <span>
#include <vector>

// Dense univariate polynomials, coefficients lowest degree first.
namespace kacrice::poly {

using Coeffs = std::vector<double>;

/// Compensated Horner evaluation (Graillat-Langlois-Louvet); about twice the
/// working precision of plain Horner.
double eval(std::span<const double> c, double x);

/// Index of the highest nonzero coefficient, or -1 for the zero polynomial.
int degree(std::span<const double> c);

Coeffs derivative(std::span<const double> c);
Coeffs multiply(std::span<const double> a, std::span<const double> b);
Coeffs add(std::span<const double> a, std::span<const double> b);
Coeffs scale(std::span<const double> a, double s);

/// Coefficients of p(x^2) as a polynomial in x.
Coeffs compose_square(std::span<const double> c);

/// Coefficients of p(x) * x^k.
Coeffs shift(std::span<const double> c, int k);

/// num(x) / den(x), evaluated through the reversed polynomials when |x| > 1 so
/// that neither factor overflows and leading-order cancellation is exact.
double ratio(std::span<const double> num, std::span<const double> den, double x);

/// ln |p(x)|, overflow-free for large |x|.
double log_abs_eval(std::span<const double> c, double x);

/// Real roots (companion-matrix eigenvalues with |Im| <= tol (1 + |Re|)),
/// ascending, with multiplicity.
std::vector<double> real_roots(std::span<const double> c, double imag_tol = 1e-8);

}  // namespace kacrice::poly
