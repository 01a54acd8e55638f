#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kacrice/errors.hpp"
#include "kacrice/rng.hpp"
#include "kacrice/special.hpp"
#include "oracles.hpp"

using namespace kacrice;
using doctest::Approx;

TEST_CASE("log_gamma at integer and half-integer points") {
  CHECK(log_gamma(1.0) == Approx(0.0).epsilon(1e-15));
  CHECK(log_gamma(0.5) == Approx(0.5 * std::log(std::numbers::pi)).epsilon(1e-14));
  CHECK(log_gamma(6.0) == Approx(std::log(120.0)).epsilon(1e-14));
  CHECK_THROWS_AS(log_gamma(0.0), DomainError);
  CHECK_THROWS_AS(log_gamma(-1.0), DomainError);
}

TEST_CASE("log_gamma recurrence") {
  for (double x : {0.1, 0.7, 3.3, 17.5, 250.25, 1e4})
    CHECK(log_gamma(x + 1.0) - log_gamma(x) == Approx(std::log(x)).epsilon(1e-12));
}

TEST_CASE("chi_mean small dimensions") {
  CHECK(chi_mean(1) == Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-15));
  CHECK(chi_mean(2) == Approx(std::sqrt(std::numbers::pi / 2.0)).epsilon(1e-15));
  CHECK(chi_mean(3) == Approx(2.0 * std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-15));
}

TEST_CASE("chi_mean agrees with a Monte Carlo norm average") {
  for (int k : {2, 3}) {
    const KeyedStream st(99, {static_cast<std::uint64_t>(k)});
    const std::size_t n = 1000000;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (int a = 0; a < k; ++a) {
        const double z = st.normal(i * k + a);
        s += z * z;
      }
      x[i] = std::sqrt(s);
    }
    const auto st_ = oracle::stat(x);
    CHECK(std::abs(st_.mean - chi_mean(k)) < 4.0 * st_.se);
  }
}

TEST_CASE("chi_mean stays finite for large k and grows like sqrt(k)") {
  for (int k : {100, 1000, 100000}) {
    CHECK(std::isfinite(chi_mean(k)));
    CHECK(chi_mean(k) / std::sqrt(k) == Approx(1.0).epsilon(1.0 / k));
  }
}

TEST_CASE("sphere_area") {
  CHECK(sphere_area(2).value() == Approx(2.0 * std::numbers::pi).epsilon(1e-14));
  CHECK(sphere_area(3).value() == Approx(4.0 * std::numbers::pi).epsilon(1e-14));
  // sigma_m = 2 pi sigma_{m-2} / (m - 2) for the sphere in R^m.
  double log_s = std::log(2.0 * std::numbers::pi);
  for (int m = 4; m <= 100; m += 2) log_s += std::log(2.0 * std::numbers::pi / (m - 2));
  CHECK(sphere_area(100).log_magnitude == Approx(log_s).epsilon(1e-13));
}

TEST_CASE("l_m product and closed form") {
  CHECK(l_m(1).value() == Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-15));
  CHECK(l_m(2).value() == Approx(1.0).epsilon(1e-15));
  double p = 1.0;
  for (int j = 1; j <= 5; ++j) p *= oracle::chi_mean(j);
  CHECK(l_m(5).value() == Approx(p).epsilon(1e-14));
  for (int m : {1, 7, 50, 400, 3000})
    CHECK(l_m(m).log_magnitude == Approx(l_m_closed_form(m).log_magnitude).epsilon(1e-11));
}

TEST_CASE("LogValue arithmetic keeps sign and handles overflow") {
  const auto a = LogValue::from(-3.0), b = LogValue::from(0.5);
  CHECK((a * b).value() == Approx(-1.5));
  CHECK((a / b).value() == Approx(-6.0));
  CHECK((a * LogValue::zero()).is_zero());
  const auto big = LogValue::from_log(800.0);
  CHECK(std::isinf(big.value()));
  CHECK((big / LogValue::from_log(799.0)).value() == Approx(std::exp(1.0)));
  CHECK_THROWS_AS(a / LogValue::zero(), DomainError);
}

TEST_CASE("gamma_shifted one-dimensional closed form") {
  CHECK(gamma_shifted_1d(0.0) == Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-15));
  for (double c : {0.1, 1.0, 3.0, 10.0})
    CHECK(gamma_shifted_1d(c) == Approx(oracle::shifted_norm_mean(1, c)).epsilon(1e-10));
  CHECK(gamma_shifted(1, 2.0).std_error == 0.0);
}

TEST_CASE("gamma_shifted Monte Carlo agrees with quadrature and the envelope") {
  CHECK(gamma_shifted(3, 0.0, 200000).value == Approx(chi_mean(3)).epsilon(0.01));
  const auto g = gamma_shifted(2, 1.0, 1000000);
  CHECK(std::abs(g.value - oracle::shifted_norm_mean(2, 1.0)) < 4.0 * g.std_error);
  CHECK(g.value <= gamma_bound(2, 1.0));
}

TEST_CASE("gamma_bound arithmetic") {
  CHECK(gamma_bound(1, 0.0) == Approx(std::sqrt(2.0 / std::numbers::pi)));
  CHECK(gamma_bound(2, 2.0) == Approx(std::sqrt(std::numbers::pi / 2.0) * 2.0).epsilon(1e-14));
  CHECK(gamma_bound(10, 1.0) == Approx(chi_mean(10) * 1.05).epsilon(1e-14));
  CHECK(gamma_bound(2, 2.0) >= oracle::shifted_norm_mean(2, 2.0));
  CHECK(gamma_bound(10, 1.0) >= oracle::shifted_norm_mean(10, 1.0));
}

TEST_CASE("gamma_shifted is nondecreasing in the shift under common random numbers") {
  double prev = 0.0;
  for (double c = 0.0; c <= 4.0; c += 0.25) {
    const double v = gamma_shifted_mc(4, c, 20000, 7).value;
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("abs_shifted_normal_mean limits") {
  CHECK(abs_shifted_normal_mean(1.0, 0.0) == Approx(std::sqrt(2.0 / std::numbers::pi)));
  CHECK(abs_shifted_normal_mean(0.0, -3.0) == Approx(3.0));
  CHECK(abs_shifted_normal_mean(1e-12, 2.0) == Approx(2.0));
  CHECK(abs_shifted_normal_mean(2.0, 1.0) == Approx(2.0 * gamma_shifted_1d(0.5)).epsilon(1e-14));
}

TEST_CASE("normal_cdf") {
  CHECK(normal_cdf(0.0) == Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == Approx(0.975).epsilon(1e-12));
  CHECK(normal_cdf(-40.0) >= 0.0);
}
