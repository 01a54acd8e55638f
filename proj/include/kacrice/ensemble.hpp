#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "kacrice/covariance.hpp"

namespace kacrice {

/// Exponent vector j = (j_1, ..., j_m) of the monomial t^j.
struct MultiIndex {
  std::vector<int> e;

  int norm() const;
  std::size_t size() const { return e.size(); }
  auto operator<=>(const MultiIndex&) const = default;
};

/// C(m + d, d): number of multi-indices with |j| <= d in m variables.
std::size_t monomial_count(int m, int d);

/// All multi-indices with |j| <= d in m variables, in lexicographic order.
/// The lex rank of a multi-index keys its random substream when sampling.
class MonomialBasis {
 public:
  MonomialBasis(int m, int d);

  /// Shared instance for (m, d); thread safe.
  static std::shared_ptr<const MonomialBasis> get(int m, int d);

  int m() const { return m_; }
  int degree() const { return d_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& at(std::size_t k) const { return indices_.at(k); }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  /// Lex rank of j; throws DomainError when |j| > d or the dimension differs.
  std::size_t rank(const MultiIndex& j) const;

 private:
  int m_, d_;
  std::vector<MultiIndex> indices_;
};

/// Var(a_j) = c_{|j|} |j|! / (j_1! ... j_m!), computed in log domain.
double coefficient_variance(const CovarianceQ& q, const MultiIndex& j);

/// Dense polynomial in m variables with a coefficient for every |j| <= d.
class SampledPolynomial {
 public:
  SampledPolynomial(int m, int d);
  SampledPolynomial(std::shared_ptr<const MonomialBasis> basis, std::vector<double> coeffs);

  int m() const { return basis_->m(); }
  int degree() const { return basis_->degree(); }
  const MonomialBasis& basis() const { return *basis_; }
  const std::shared_ptr<const MonomialBasis>& basis_ptr() const { return basis_; }
  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }

  double coefficient(const MultiIndex& j) const { return coeffs_[basis_->rank(j)]; }
  void set(const MultiIndex& j, double value) { coeffs_[basis_->rank(j)] = value; }

  /// Same polynomial expressed on the basis of degree d >= degree().
  SampledPolynomial embedded(int d) const;
  SampledPolynomial& operator+=(const SampledPolynomial& other);

  double evaluate(std::span<const double> t) const;
  std::vector<double> gradient(std::span<const double> t) const;

 private:
  void check_point(std::span<const double> t) const;

  std::shared_ptr<const MonomialBasis> basis_;
  std::vector<double> coeffs_;
};

/// One draw of the noise system X_1..X_m.
struct SampledSystem {
  int m = 0;
  std::uint64_t seed = 0;
  std::vector<SampledPolynomial> polys;
};

/// Largest dense basis the sampler accepts (m = 10, d = 6).
inline constexpr std::size_t kMaxSampledTerms = 8008;

/// Draws every coefficient a_j^(i) ~ N(0, Var(a_j)) from the substream keyed
/// by (seed, i, lex rank of j).
SampledSystem sample_system(const NoiseModel& model, std::uint64_t seed);

}  // namespace kacrice
