#pragma once

// Exact information-theoretic quantities for the first-match scheme.
// All values are in bits.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mra/codebook.hpp"
#include "mra/sources.hpp"

namespace mra {

struct DivergenceReport {
  double d_pq = 0.0;  // +inf when support_violations > 0
  bool infinite = false;
  double q_max = 0.0;  // over the support of p
  double q_min = 0.0;
  // Sequences x with p(x) > 0 and q(x) = 0 (saturates at 2^64 - 1).
  std::uint64_t support_violations = 0;
};

// D(p||q) evaluated type by type. Both laws must share alphabet and k.
DivergenceReport kl_divergence(const ExchangeableSource& p, const ExchangeableSource& q);

// A lower value plus a certified bound on what truncation left out:
// the exact quantity lies in [value, value + radius].
struct CertifiedValue {
  double value = 0.0;
  double radius = 0.0;
  double upper() const noexcept { return value + radius; }
};

inline constexpr double kDefaultTailTolerance = 1e-12;

// Law of the match index: Pr(T = t) = sum_i w_i (1 - q_i)^(t-1) q_i.
class GeometricMixture {
 public:
  struct Atom {
    double weight;
    double q;
  };

  // Atoms with equal q are merged; weights must sum to 1 within 1e-9.
  explicit GeometricMixture(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  double q_min() const noexcept { return q_min_; }
  double q_max() const noexcept { return q_max_; }

  double pmf(std::uint64_t t) const;
  // Pr(T > t).
  double tail_mass(std::uint64_t t) const;
  double mean() const;

  // Smallest T0 with (1 - q_min)^T0 <= tail_tol * q_min.
  std::uint64_t truncation_point(double tail_tol) const;

  CertifiedValue entropy(double tail_tol = kDefaultTailTolerance) const;
  CertifiedValue expected_log2(double tail_tol = kDefaultTailTolerance) const;

 private:
  std::vector<Atom> atoms_;
  double q_min_ = 1.0;
  double q_max_ = 0.0;
};

// Match-index law when X ~ p and the codebook marginal is q.
// DivergenceError if q(x) = 0 somewhere on the support of p.
GeometricMixture match_index_law(const ExchangeableSource& p,
                                 const ExchangeableSource& q_marginal);
double match_index_pmf(const ExchangeableSource& p, const ExchangeableSource& q_marginal,
                       std::uint64_t t);
CertifiedValue match_index_entropy(const ExchangeableSource& p,
                                   const ExchangeableSource& q_marginal,
                                   double tail_tol = kDefaultTailTolerance);
CertifiedValue expected_log_T(const ExchangeableSource& p,
                              const ExchangeableSource& q_marginal,
                              double tail_tol = kDefaultTailTolerance);

// ---------------------------------------------------------------- bounds

// H + D + log(H + D + 1) + 1
double bound_theorem1(double h, double d);
// H + D + log(log(q_max / q_min) + 1) + 3
double bound_theorem1b(double h, double d, double q_max, double q_min);
// min{k log e, |X| log(k + 1)}
double bound_theorem2(std::uint32_t k, std::size_t alphabet_size);
// E[K] H + log(E[K] H + 1) + 1
double bound_theorem4(double expected_k, double h_p);
// log(d^k / d^(k falling)); requires 1 <= k <= d.
double theorem6_rhs(std::uint32_t d, std::uint32_t k);

struct BranchedBound {
  double value = 0.0;  // minimum over the defined branches
  double first = 0.0;
  std::optional<double> second;  // absent when undefined
  std::string note;
};

// min{log(d^k/d^(k falling)), (|X|-1) log((d-1)/(d-k))}; requires d >= k.
// The second branch is +inf when d = k.
BranchedBound bound_theorem3(std::uint32_t k, std::uint32_t d, std::size_t alphabet_size);
// first = (|X|-1) log((d-1)/(d-k)), second = -log(1 - k(k-1)/(2d)) when
// k(k-1) < 2d; requires d > k.
BranchedBound bound_theorem5(std::uint32_t k, std::uint32_t d, std::size_t alphabet_size);

// log(d^k/d^(k falling)) <= -log(1 - k(k-1)/(2d)) within 1e-12.
// DomainError unless k(k-1) < 2d.
bool definetti_chain_check(std::uint32_t k, std::uint32_t d);

struct Theorem6Result {
  double min_divergence = 0.0;
  double rhs = 0.0;
  double uniform_divergence = 0.0;
  std::size_t mixtures_evaluated = 0;
  std::size_t infinite_excluded = 0;
  bool holds = false;  // min_divergence >= rhs - 1e-9
};

// Sampled search over i.i.d. mixtures with at most three components against
// h = k draws without replacement from [d]; always includes uniform q.
// Verifies the inequality on the sampled q only. Requires 2 <= d <= 6, k < d.
Theorem6Result theorem6_verify(std::uint32_t d, std::uint32_t k, std::size_t trials,
                               std::uint64_t seed);

// ---------------------------------------------------------------- rates

struct EmpiricalRates {
  std::size_t trials = 0;
  double mean_log_T = 0.0;
  double mean_log_T_stderr = 0.0;
  double plugin_HT = 0.0;
  double plugin_HT_miller_madow = 0.0;
  double delta_bits_per_msg = 0.0;
  double delta_bits_stderr = 0.0;
};

struct RateReport {
  std::string name;
  double source_entropy = 0.0;
  DivergenceReport divergence;
  double bound_eq14 = 0.0;
  std::optional<double> bound_eq15;
  std::optional<CertifiedValue> exact_HT;
  std::optional<CertifiedValue> exact_E_log_T;
  std::optional<double> achievable;
  std::optional<double> converse;
  std::optional<double> d_max;
  std::optional<EmpiricalRates> empirical;
  std::vector<std::string> notes;
};

// H, D, both fixed-k rate bounds and the exact match-index quantities for
// source p under generator g (marginal taken at p.k()).
RateReport rate_report(const ExchangeableSource& p, const MixtureGeneratorSpec& g,
                       std::string name = {},
                       double tail_tol = kDefaultTailTolerance);

// log(n^k / n^(k falling))
double pool_penalty(std::uint64_t n, std::uint32_t k);

// Scheduling k of n users into b >= k slots with the (extended) urn codebook.
RateReport scheduling_rates(std::uint64_t n, std::uint32_t k, std::uint32_t b);
// C(b,k) (n/b)^k
double scheduling_d_max(std::uint64_t n, std::uint32_t k, std::uint32_t b);

struct CategorizationReport {
  RateReport rates;
  double k_h_rho = 0.0;
  // D(p||q_urn) - (k H(rho) - H(X)); zero up to rounding.
  double identity_residual = 0.0;
};

CategorizationReport categorization_rates(std::uint64_t n,
                                          std::span<const std::uint32_t> counts);

struct ResourceAllocationComparison {
  double h_x1 = 0.0;
  double r_marginal = 0.0;  // k H(X_1)
  double h_x = 0.0;
  double d_urn = 0.0;
  double r_urn = 0.0;  // H(X) + D(p||q_urn)
  double bound_urn = 0.0;  // log(k^k / k!)
  double gap = 0.0;  // r_marginal - r_urn
};

ResourceAllocationComparison resource_allocation_compare(std::uint32_t r, std::uint32_t k);

// Entropy in bits of a probability vector (zeros ignored).
double entropy_bits(std::span<const double> p);

}  // namespace mra
