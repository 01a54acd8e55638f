#include "kacrice/covariance.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "kacrice/errors.hpp"

namespace kacrice {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

CovarianceQ::CovarianceQ(poly::Coeffs coeffs, std::string family)
    : coeffs_(std::move(coeffs)), family_(std::move(family)) {
  if (coeffs_.size() < 2) throw DomainError("CovarianceQ: degree must be >= 1");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    if (!std::isfinite(coeffs_[k]) || coeffs_[k] < 0.0)
      throw ValidationError("CovarianceQ: coefficient c_" + std::to_string(k) + " = " + fmt(coeffs_[k]) +
                            " must be finite and >= 0");
  }
  if (coeffs_.front() <= 0.0) throw ValidationError("CovarianceQ: c_0 must be > 0 so that Q does not vanish on u >= 0");
  if (coeffs_.back() <= 0.0) throw ValidationError("CovarianceQ: leading coefficient must be > 0 (effective degree)");
}

CovarianceQ shub_smale_q(int d) {
  if (d < 1) throw DomainError("shub_smale_q: degree must be >= 1");
  poly::Coeffs c(static_cast<std::size_t>(d + 1));
  c[0] = 1.0;
  for (int k = 1; k <= d; ++k) c[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k - 1)] * (d - k + 1) / k;
  CovarianceQ q(std::move(c), "shub-smale");
  q.named_D = d;
  q.named_E = 0.0;
  return q;
}

CovarianceQ real_roots_q(std::vector<double> alphas) {
  if (alphas.empty()) throw DomainError("real_roots_q: need at least one root");
  for (double a : alphas) {
    if (!(a >= 1.0) || !std::isfinite(a))
      throw DomainError("real_roots_q: every alpha must be >= 1 (rescale t by sqrt(alpha_1) to normalize), got " +
                        fmt(a));
  }
  std::sort(alphas.begin(), alphas.end());
  poly::Coeffs c{1.0};
  for (double a : alphas) {
    const poly::Coeffs factor{a, 1.0};
    c = poly::multiply(c, factor);
  }
  const double d = static_cast<double>(alphas.size());
  CovarianceQ q(std::move(c), "real-roots");
  q.named_D = d;
  q.named_E = d * (alphas.back() - 1.0);
  return q;
}

CovarianceQ power_family_q(const CovarianceQ& base, int l) {
  if (l < 1) throw DomainError("power_family_q: exponent must be >= 1");
  const auto& b = base.coeffs();
  const int nu = base.degree();
  for (int k = 0; k <= nu; ++k) {
    if (!(b[static_cast<std::size_t>(k)] > 0.0))
      throw ValidationError("power_family_q: coefficient b_" + std::to_string(k) + " must be strictly positive");
  }
  for (int k = 1; k <= nu; ++k) {
    const double cap = static_cast<double>(nu - k + 1) / k * b[static_cast<std::size_t>(k - 1)];
    if (b[static_cast<std::size_t>(k)] > cap * (1.0 + 1e-15))
      throw ValidationError("power_family_q: coefficient condition b_k <= ((nu-k+1)/k) b_{k-1} fails at k = " +
                            std::to_string(k));
  }
  poly::Coeffs c{1.0};
  for (int i = 0; i < l; ++i) c = poly::multiply(c, b);
  CovarianceQ q(std::move(c), "power");
  q.named_D = static_cast<double>(nu * l);
  return q;
}

RadialProfile::RadialProfile(const CovarianceQ& q)
    : degree_(q.degree()), Q_(q.coeffs()), Qu_(poly::derivative(Q_)), Quu_(poly::derivative(Qu_)) {
  Q2_ = poly::multiply(Q_, Q_);
  r_num_ = poly::add(poly::multiply(Q_, Quu_), poly::scale(poly::multiply(Qu_, Qu_), -1.0));
  h_den_ = poly::multiply(Q_, Qu_);
  h_num_ = poly::add(h_den_, poly::shift(r_num_, 1));
  // The u^{2d-1} coefficient of h_num is d c_d^2 + d(d-1) c_d^2 - d^2 c_d^2 = 0.
  h_num_.resize(static_cast<std::size_t>(2 * degree_ - 1));
  if (h_num_.empty()) h_num_.push_back(0.0);
  const poly::Coeffs one_plus_u{1.0, 1.0};
  scaled_q_num_ = poly::multiply(one_plus_u, Qu_);
  scaled_h_num_ = poly::multiply(one_plus_u, h_num_);
}

RadialProfile radial_profile(const CovarianceQ& q) { return RadialProfile(q); }

void RadialProfile::check_u(double u) const {
  if (!(u >= 0.0)) throw DomainError("RadialProfile: argument must be >= 0, got " + fmt(u));
  if (poly::eval(Qu_, u) == 0.0) throw DomainError("RadialProfile: Q_u vanishes at u = " + fmt(u));
}

double RadialProfile::q(double u) const {
  check_u(u);
  return poly::ratio(Qu_, Q_, u);
}

double RadialProfile::r(double u) const {
  if (!(u >= 0.0)) throw DomainError("RadialProfile: argument must be >= 0, got " + fmt(u));
  return poly::ratio(r_num_, Q2_, u);
}

double RadialProfile::h(double u) const {
  check_u(u);
  return poly::ratio(h_num_, h_den_, u);
}

double RadialProfile::scaled_q(double u) const {
  check_u(u);
  return poly::ratio(scaled_q_num_, Q_, u);
}

double RadialProfile::scaled_h(double u) const {
  check_u(u);
  return poly::ratio(scaled_h_num_, h_den_, u);
}

double RadialProfile::q_deficit(double D, double u) const {
  check_u(u);
  const poly::Coeffs one_plus_u{1.0, 1.0};
  poly::Coeffs num = poly::add(poly::scale(Q_, D), poly::scale(poly::multiply(one_plus_u, Qu_), -1.0));
  if (D == static_cast<double>(degree_)) num.back() = 0.0;
  return poly::ratio(num, Q_, u);
}

double RadialProfile::scaled_h_limit() const {
  return Q_[static_cast<std::size_t>(degree_ - 1)] / (degree_ * Q_[static_cast<std::size_t>(degree_)]);
}

double RadialProfile::deficit_limit() const {
  return Q_[static_cast<std::size_t>(degree_ - 1)] / Q_[static_cast<std::size_t>(degree_)] - degree_;
}

std::vector<double> UGrid::points() const {
  if (n < 2 || !(max > 0.0)) throw DomainError("UGrid: need n >= 2 points and max > 0");
  std::vector<double> u(static_cast<std::size_t>(n));
  const double span = std::log1p(max);
  for (int k = 0; k < n; ++k) u[static_cast<std::size_t>(k)] = std::expm1(span * k / (n - 1));
  u.front() = 0.0;
  u.back() = max;
  return u;
}

std::string UGrid::describe() const {
  return "log-spaced u in [0, " + fmt(max) + "], " + std::to_string(n) +
         " points, tail points 1e4..1e12 and closed-form limits u->inf, golden-section refinement of extrema";
}

double HypothesisReport::D_bar() const { return D.empty() ? 0.0 : *std::max_element(D.begin(), D.end()); }
double HypothesisReport::E_bar() const { return E.empty() ? 0.0 : *std::max_element(E.begin(), E.end()); }

namespace {

struct Extremum {
  double lo = kInf;
  double hi = -kInf;
};

// Grid extrema of f, tightened by Brent's method between the neighbours of the
// best grid points.
template <class F>
Extremum grid_extrema(const std::vector<double>& u, F&& f) {
  std::vector<double> v(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) v[k] = f(u[k]);
  const auto imin = static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
  const auto imax = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  Extremum e{v[imin], v[imax]};
  auto bracket = [&](std::size_t i) {
    return std::pair{u[i == 0 ? 0 : i - 1], u[std::min(i + 1, u.size() - 1)]};
  };
  constexpr int bits = 40;
  {
    auto [a, b] = bracket(imin);
    if (b > a) e.lo = std::min(e.lo, boost::math::tools::brent_find_minima(f, a, b, bits).second);
  }
  {
    auto [a, b] = bracket(imax);
    if (b > a) {
      auto neg = [&](double x) { return -f(x); };
      e.hi = std::max(e.hi, -boost::math::tools::brent_find_minima(neg, a, b, bits).second);
    }
  }
  return e;
}

}  // namespace

struct NoiseModel::LazyReport {
  std::once_flag once;
  std::optional<HypothesisReport> report;
};

NoiseModel::NoiseModel(std::vector<std::shared_ptr<const CovarianceQ>> qs)
    : qs_(std::move(qs)), lazy_(std::make_shared<LazyReport>()) {
  if (qs_.empty()) throw DomainError("NoiseModel: need at least one equation");
  group_of_.resize(qs_.size());
  for (std::size_t i = 0; i < qs_.size(); ++i) {
    if (!qs_[i]) throw DomainError("NoiseModel: null covariance");
    auto it = std::find_if(groups_.begin(), groups_.end(),
                           [&](const Group& g) { return g.q == qs_[i] || *g.q == *qs_[i]; });
    if (it == groups_.end()) {
      groups_.push_back({qs_[i], std::make_shared<const RadialProfile>(*qs_[i]), {}});
      it = groups_.end() - 1;
    }
    it->members.push_back(static_cast<int>(i));
    group_of_[i] = static_cast<int>(it - groups_.begin());
  }
}

NoiseModel NoiseModel::uniform(int m, const CovarianceQ& q) {
  if (m < 1) throw DomainError("NoiseModel: m must be >= 1");
  auto shared = std::make_shared<const CovarianceQ>(q);
  return NoiseModel(std::vector<std::shared_ptr<const CovarianceQ>>(static_cast<std::size_t>(m), shared));
}

NoiseModel NoiseModel::from(std::vector<CovarianceQ> qs) {
  std::vector<std::shared_ptr<const CovarianceQ>> ptrs;
  ptrs.reserve(qs.size());
  for (auto& q : qs) ptrs.push_back(std::make_shared<const CovarianceQ>(std::move(q)));
  return NoiseModel(std::move(ptrs));
}

const RadialProfile& NoiseModel::profile(int i) const {
  return *groups_[static_cast<std::size_t>(group_of(i))].profile;
}

const HypothesisReport& NoiseModel::hypotheses() const {
  std::call_once(lazy_->once, [this] { lazy_->report = check_hypotheses(*this); });
  return *lazy_->report;
}

HypothesisReport check_hypotheses(const NoiseModel& model, double grid_max, int grid_n) {
  HypothesisReport rep;
  rep.grid = UGrid{grid_max, grid_n};
  rep.grid_description = rep.grid.describe();
  std::vector<double> pts = rep.grid.points();
  for (double u = 1e4; u <= 1e12; u *= 10.0)
    if (u > grid_max) pts.push_back(u);

  const auto& groups = model.groups();
  std::vector<double> gD(groups.size()), gE(groups.size());
  std::vector<std::optional<double>> gnD(groups.size()), gnE(groups.size());
  double q_lower = kInf, h_lower = kInf, h_upper = -kInf;
  bool named_ok = true;

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const RadialProfile& P = *groups[g].profile;
    const double d = P.degree();

    for (double u : pts) {
      const double hv = P.h(u);
      if (hv < -1e-10)
        throw DomainError("check_hypotheses: h(u) = " + fmt(hv) + " < 0 at u = " + fmt(u) +
                          " contradicts h >= 0; covariance is not admissible");
    }

    const Extremum sq = grid_extrema(pts, [&](double u) { return P.scaled_q(u); });
    const double sup_sq = std::max(sq.hi, d);
    q_lower = std::min({q_lower, sq.lo, d});
    const double D = (sup_sq <= d * (1.0 + 1e-12)) ? d : sup_sq;
    double E = kInf;
    if (D == d) {
      const Extremum def = grid_extrema(pts, [&](double u) { return (1.0 + u) * P.q_deficit(D, u); });
      E = std::max({0.0, def.hi, P.deficit_limit()});
    }
    gD[g] = D;
    gE[g] = E;

    const Extremum sh = grid_extrema(pts, [&](double u) { return P.scaled_h(u); });
    h_lower = std::min({h_lower, sh.lo, P.scaled_h_limit()});
    h_upper = std::max({h_upper, sh.hi, P.scaled_h_limit()});

    const auto& Q = *groups[g].q;
    gnD[g] = Q.named_D;
    gnE[g] = Q.named_E;
    if (Q.named_D) {
      const double nD = *Q.named_D;
      const double tol = 1e-10 * std::max(1.0, nD);
      for (double u : pts) {
        const double deficit = P.q_deficit(nD, u);
        if (deficit < -tol) named_ok = false;
        if (Q.named_E && (1.0 + u) * deficit > *Q.named_E + tol) named_ok = false;
      }
    }
  }

  double discrepancy = 0.0;
  for (std::size_t g = 1; g < groups.size(); ++g)
    for (double u : pts)
      discrepancy = std::max(discrepancy, std::abs(groups[g].profile->h(u) - groups[0].profile->h(u)));

  const int m = model.m();
  rep.D.resize(static_cast<std::size_t>(m));
  rep.E.resize(static_cast<std::size_t>(m));
  rep.named_D.resize(static_cast<std::size_t>(m));
  rep.named_E.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const auto g = static_cast<std::size_t>(model.group_of(i));
    rep.D[static_cast<std::size_t>(i)] = gD[g];
    rep.E[static_cast<std::size_t>(i)] = gE[g];
    rep.named_D[static_cast<std::size_t>(i)] = gnD[g];
    rep.named_E[static_cast<std::size_t>(i)] = gnE[g];
  }
  rep.q_lower = q_lower;
  rep.h_lower = h_lower;
  rep.h_upper = h_upper;
  rep.h1_discrepancy = discrepancy;
  rep.h1_holds = discrepancy <= 1e-10;
  rep.named_bounds_valid = named_ok;
  const bool finite = std::all_of(rep.E.begin(), rep.E.end(), [](double e) { return std::isfinite(e); });
  rep.h2_holds = finite && q_lower > 0.0 && h_lower > 0.0 && std::isfinite(h_upper);
  return rep;
}

}  // namespace kacrice
