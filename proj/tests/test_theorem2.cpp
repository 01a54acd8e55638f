#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kacrice/errors.hpp"
#include "kacrice/theorem2.hpp"

using namespace kacrice;
using doctest::Approx;

namespace {

HypothesisReport kostlan_hyp(int m, int d) { return check_hypotheses(NoiseModel::uniform(m, shub_smale_q(d))); }

BoundConstants worked(ConstantOptions opt = {}) {
  const auto model = NoiseModel::uniform(2, shub_smale_q(2));
  const auto snr = snr_report(SignalSpec::radial(2, 2, 1.0), model, 2.0);
  return compute_constants(kostlan_hyp(2, 2), snr.ell, 2.0, uniform_aggregates(snr.H[0], snr.K[0]), opt);
}

}  // namespace

TEST_CASE("worked example constants") {
  ConstantOptions opt;
  opt.worked_example = true;
  const auto c = worked(opt);
  CHECK(c.ell == Approx(9.0 / 25.0).epsilon(1e-13));
  CHECK(c.theta1_radius_branch);
  CHECK(c.theta == Approx((3.0 + 2.0 * std::sqrt(2.0)) / 6.0).epsilon(1e-14));
  CHECK(c.C == Approx(15.0 * std::sqrt(5.0)).epsilon(1e-14));
  CHECK(c.theta_symbolic.value() == "(3+2*sqrt(2))/6");
  CHECK(c.C_symbolic.value() == "15*sqrt(5)");
  CHECK(c.tau == 1.0);
  // kappa = theta / theta1 = 3 / (4 sqrt 2) + 1/2
  CHECK(c.theta / c.theta1 == Approx(3.0 / (4.0 * std::sqrt(2.0)) + 0.5).epsilon(1e-14));
  REQUIRE(c.m0_worked.has_value());
  const double c1 = 8.0 * 4.0, lk = std::log(c.theta / c.theta1);
  auto holds = [&](int m) { return c1 + (c1 + 0.5) * std::log(double(m)) <= m * lk; };
  CHECK(holds(*c.m0_worked));
  CHECK_FALSE(holds(*c.m0_worked - 1));
}

TEST_CASE("ell branch of theta1") {
  const auto hyp = kostlan_hyp(1, 2);
  const auto c = compute_constants(hyp, 10.0, 0.1, uniform_aggregates(0.0, 0.0));
  CHECK(c.theta1_radius_branch);
  CHECK(c.theta1 == Approx(0.1 / std::sqrt(0.01 + 0.5)).epsilon(1e-14));
  const auto c2 = compute_constants(hyp, 0.01, 5.0, uniform_aggregates(0.0, 0.0));
  CHECK_FALSE(c2.theta1_radius_branch);
  CHECK(c2.theta1 == Approx(std::exp(-0.005)));
}

TEST_CASE("property: m0 is the least m from which both conditions hold") {
  for (double r0 : {1.5, 2.0, 3.0}) {  // r0 = r would put the cutoff on the zero set of the signal
    const auto c = [&] {
      const auto model = NoiseModel::uniform(2, shub_smale_q(2));
      const auto snr = snr_report(SignalSpec::radial(2, 2, 1.0), model, r0);
      return std::pair{compute_constants(kostlan_hyp(2, 2), snr.ell, r0, uniform_aggregates(snr.H[0], snr.K[0])),
                       uniform_aggregates(snr.H[0], snr.K[0])};
    }();
    const auto& [k, agg] = c;
    const auto at = m0_conditions(k, k.m0, agg);
    CHECK((at.first && at.second));
    if (k.m0 > 1) {
      const auto before = m0_conditions(k, k.m0 - 1, agg);
      CHECK_FALSE((before.first && before.second));
    }
    for (int m = k.m0; m < k.m0 + 200; ++m) {
      const auto x = m0_conditions(k, m, agg);
      CHECK((x.first && x.second));
    }
    CHECK(k.m0_half_pi <= k.m0);
  }
}

TEST_CASE("tau search for a covariance with a nonzero deficit") {
  const auto hyp = check_hypotheses(NoiseModel::uniform(2, real_roots_q({1.0, 3.0})));
  REQUIRE(hyp.E[0] > 0.0);
  const double r0 = 2.0;
  const auto c = compute_constants(hyp, 0.1, r0, uniform_aggregates(1.0, 1.0));
  CHECK(tau_condition(c.F_bar, c.tau, r0));
  CHECK_FALSE(tau_condition(c.F_bar, c.tau / 1.1, r0));
  CHECK(c.F_bar <= c.F_bar_ceiling + 1e-12);
}

TEST_CASE("preconditions") {
  const auto hyp = kostlan_hyp(1, 2);
  try {
    compute_constants(hyp, 0.0, 2.0, uniform_aggregates(1.0, 1.0));
    FAIL("expected H4 failure");
  } catch (const PreconditionError& e) {
    CHECK(e.hypothesis() == "H4");
  }
  auto bad = hyp;
  bad.h1_holds = false;
  CHECK_THROWS_AS(compute_constants(bad, 0.3, 2.0, uniform_aggregates(1.0, 1.0)), PreconditionError);
}

TEST_CASE("infeasible m0 scan is reported") {
  ConstantOptions opt;
  opt.m_scan_limit = 10;
  CHECK_THROWS_AS(worked(opt), InfeasibleError);
}

TEST_CASE("uniform aggregates use harmonic numbers") {
  const auto agg = uniform_aggregates(2.0, 3.0);
  double harm = 0.0;
  for (int i = 1; i <= 10; ++i) harm += 1.0 / i;
  CHECK(agg(10).first == Approx(4.0 * harm / 10).epsilon(1e-14));
  CHECK(agg(10).second == Approx(9.0 * harm / 10).epsilon(1e-14));
}

TEST_CASE("carried aggregates hold values between supplied m") {
  std::map<int, SnrReport> reps;
  reps[2].A_m = 1.0;
  reps[2].B_m = 2.0;
  reps[5].A_m = 0.5;
  reps[5].B_m = 0.25;
  const auto agg = carried_aggregates(reps);
  CHECK(agg(1).first == 1.0);
  CHECK(agg(4).second == 2.0);
  CHECK(agg(5).first == 0.5);
  CHECK(agg(1000).second == 0.25);
}

TEST_CASE("bound values") {
  const auto c = worked();
  CHECK(bound_value(c, 2, 2.0).value.value() == Approx(15.0 * std::sqrt(5.0) * std::pow(c.theta, 2) * 2.0).epsilon(1e-13));
  CHECK(bound_value(c, 2, 2.0).value.value() == Approx(63.3004).epsilon(1e-6));
  CHECK(bound_value(c, 3, 0.0).value.is_zero());
  for (int m = 1; m < 50; ++m)
    CHECK((bound_value(c, m + 1, 1.0).value / bound_value(c, m, 1.0).value).value() == Approx(c.theta).epsilon(1e-13));
}

TEST_CASE("decay table") {
  const auto c = worked();
  const std::vector<int> ms{2, 4, 8};
  const auto rows = decay_table(c, [](int m) { return LogValue::from_log(0.5 * m * std::log(2.0)); }, ms,
                                SignalRoots::product_of_degrees, 3);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].centered.value() == Approx(std::pow(2.0, ms[i] / 2.0)));
    CHECK(rows[i].n_p->value() == Approx(std::pow(3.0, ms[i])));
    CHECK(rows[i].ratio.value() == Approx(c.C * std::pow(c.theta, ms[i])).epsilon(1e-13));
  }
  CHECK(rows[0].ratio.log_magnitude > rows[1].ratio.log_magnitude);
  CHECK_THROWS_AS(decay_table(c, [](int) { return LogValue::from(1.0); }, {3, 2}), DomainError);
}

TEST_CASE("decay table stays finite far beyond double range") {
  const auto c = worked();
  std::vector<int> ms;
  for (int m = 1; m <= 100000; m *= 10) ms.push_back(m);
  const auto rows = decay_table(c, [](int m) { return LogValue::from_log(0.5 * m * std::log(2.0)); }, ms);
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.bound.log_magnitude));
    CHECK(r.bound.sign == 1);
  }
}
