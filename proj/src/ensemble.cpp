#include "kacrice/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "kacrice/errors.hpp"
#include "kacrice/rng.hpp"
#include "kacrice/special.hpp"

namespace kacrice {

int MultiIndex::norm() const {
  int s = 0;
  for (int x : e) s += x;
  return s;
}

std::size_t monomial_count(int m, int d) {
  if (m < 1 || d < 0) throw DomainError("monomial_count: need m >= 1 and d >= 0");
  // C(m+d, d) by the multiplicative formula; exact while it fits.
  std::size_t c = 1;
  for (int k = 1; k <= d; ++k) c = c * static_cast<std::size_t>(m + k) / static_cast<std::size_t>(k);
  return c;
}

namespace {

void enumerate(int m, int remaining, std::vector<int>& current, std::vector<MultiIndex>& out) {
  const auto pos = current.size();
  if (static_cast<int>(pos) == m) {
    out.push_back(MultiIndex{current});
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    current.push_back(k);
    enumerate(m, remaining - k, current, out);
    current.pop_back();
  }
}

}  // namespace

MonomialBasis::MonomialBasis(int m, int d) : m_(m), d_(d) {
  if (m < 1 || d < 0) throw DomainError("MonomialBasis: need m >= 1 and d >= 0");
  indices_.reserve(monomial_count(m, d));
  std::vector<int> current;
  enumerate(m, d, current, indices_);
}

std::shared_ptr<const MonomialBasis> MonomialBasis::get(int m, int d) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const MonomialBasis>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{m, d}];
  if (!slot) slot = std::make_shared<const MonomialBasis>(m, d);
  return slot;
}

std::size_t MonomialBasis::rank(const MultiIndex& j) const {
  if (static_cast<int>(j.size()) != m_) throw DomainError("MonomialBasis: multi-index dimension mismatch");
  if (std::any_of(j.e.begin(), j.e.end(), [](int x) { return x < 0; }))
    throw DomainError("MonomialBasis: negative exponent");
  if (j.norm() > d_)
    throw DomainError("MonomialBasis: |j| = " + std::to_string(j.norm()) + " exceeds degree " + std::to_string(d_));
  auto it = std::lower_bound(indices_.begin(), indices_.end(), j);
  return static_cast<std::size_t>(it - indices_.begin());
}

double coefficient_variance(const CovarianceQ& q, const MultiIndex& j) {
  const int n = j.norm();
  if (n > q.degree())
    throw DomainError("coefficient_variance: |j| = " + std::to_string(n) + " exceeds degree " +
                      std::to_string(q.degree()));
  const double c = q.coeffs()[static_cast<std::size_t>(n)];
  if (c == 0.0) return 0.0;
  double log_v = std::log(c) + log_gamma(n + 1.0);
  for (int x : j.e) log_v -= log_gamma(x + 1.0);
  return std::exp(log_v);
}

SampledPolynomial::SampledPolynomial(int m, int d)
    : basis_(MonomialBasis::get(m, d)), coeffs_(basis_->size(), 0.0) {}

SampledPolynomial::SampledPolynomial(std::shared_ptr<const MonomialBasis> basis, std::vector<double> coeffs)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
  if (!basis_ || coeffs_.size() != basis_->size())
    throw DomainError("SampledPolynomial: coefficient count does not match the basis");
}

SampledPolynomial SampledPolynomial::embedded(int d) const {
  if (d < degree()) throw DomainError("SampledPolynomial::embedded: target degree is smaller");
  if (d == degree()) return *this;
  SampledPolynomial out(m(), d);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) out.set(basis_->at(k), coeffs_[k]);
  return out;
}

SampledPolynomial& SampledPolynomial::operator+=(const SampledPolynomial& other) {
  if (other.m() != m()) throw DomainError("SampledPolynomial: dimension mismatch");
  if (other.degree() > degree()) *this = embedded(other.degree());
  if (other.basis_ == basis_) {
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
  } else {
    for (std::size_t k = 0; k < other.coeffs_.size(); ++k)
      coeffs_[basis_->rank(other.basis_->at(k))] += other.coeffs_[k];
  }
  return *this;
}

void SampledPolynomial::check_point(std::span<const double> t) const {
  if (static_cast<int>(t.size()) != m())
    throw DomainError("SampledPolynomial: point has dimension " + std::to_string(t.size()) + ", expected " +
                      std::to_string(m()));
}

namespace {

// Neumaier-compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double result() const { return sum + comp; }
};

std::vector<double> power_table(std::span<const double> t, int d) {
  const std::size_t stride = static_cast<std::size_t>(d + 1);
  std::vector<double> pw(t.size() * stride);
  for (std::size_t h = 0; h < t.size(); ++h) {
    pw[h * stride] = 1.0;
    for (int k = 1; k <= d; ++k) pw[h * stride + k] = pw[h * stride + k - 1] * t[h];
  }
  return pw;
}

}  // namespace

double SampledPolynomial::evaluate(std::span<const double> t) const {
  check_point(t);
  const int d = degree();
  const std::size_t stride = static_cast<std::size_t>(d + 1);
  const auto pw = power_table(t, d);
  CompensatedSum acc;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    if (coeffs_[k] == 0.0) continue;
    double term = coeffs_[k];
    const auto& j = basis_->at(k).e;
    for (std::size_t h = 0; h < j.size(); ++h) term *= pw[h * stride + static_cast<std::size_t>(j[h])];
    acc.add(term);
  }
  return acc.result();
}

std::vector<double> SampledPolynomial::gradient(std::span<const double> t) const {
  check_point(t);
  const int d = degree();
  const std::size_t stride = static_cast<std::size_t>(d + 1);
  const auto pw = power_table(t, d);
  const std::size_t mm = t.size();
  std::vector<CompensatedSum> acc(mm);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    if (coeffs_[k] == 0.0) continue;
    const auto& j = basis_->at(k).e;
    for (std::size_t a = 0; a < mm; ++a) {
      if (j[a] == 0) continue;
      double term = coeffs_[k] * j[a];
      for (std::size_t h = 0; h < mm; ++h) {
        const int e = (h == a) ? j[h] - 1 : j[h];
        term *= pw[h * stride + static_cast<std::size_t>(e)];
      }
      acc[a].add(term);
    }
  }
  std::vector<double> g(mm);
  for (std::size_t a = 0; a < mm; ++a) g[a] = acc[a].result();
  return g;
}

SampledSystem sample_system(const NoiseModel& model, std::uint64_t seed) {
  SampledSystem sys;
  sys.m = model.m();
  sys.seed = seed;
  sys.polys.reserve(static_cast<std::size_t>(sys.m));
  for (int i = 0; i < sys.m; ++i) {
    const CovarianceQ& q = model.q(i);
    const std::size_t terms = monomial_count(sys.m, q.degree());
    if (terms > kMaxSampledTerms)
      throw DomainError("sample_system: " + std::to_string(terms) + " coefficients per equation exceeds the cap of " +
                        std::to_string(kMaxSampledTerms) + " (m <= 10 with d <= 6)");
    auto basis = MonomialBasis::get(sys.m, q.degree());
    std::vector<double> coeffs(basis->size());
    for (std::size_t k = 0; k < basis->size(); ++k) {
      const double var = coefficient_variance(q, basis->at(k));
      const KeyedStream stream(seed, {0x636F656666ull, static_cast<std::uint64_t>(i), k});
      coeffs[k] = std::sqrt(var) * stream.normal(0);
    }
    sys.polys.emplace_back(std::move(basis), std::move(coeffs));
  }
  return sys;
}

}  // namespace kacrice
