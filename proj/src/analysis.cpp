#include "mra/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "mra/combinatorics.hpp"
#include "mra/errors.hpp"

namespace mra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWeightTolerance = 1e-9;
constexpr std::uint64_t kMaxTruncation = 200'000'000;

std::uint64_t saturating_add(std::uint64_t a, double b) {
  const double room = static_cast<double>(std::numeric_limits<std::uint64_t>::max() - a);
  if (b >= room) return std::numeric_limits<std::uint64_t>::max();
  return a + static_cast<std::uint64_t>(b);
}

// Largest entropy of a law on {1, 2, ...} with mean mu: the geometric one.
double max_entropy_with_mean(double mu) {
  if (mu <= 1.0) return 0.0;
  return std::log2(mu) + (mu - 1.0) * std::log2(mu / (mu - 1.0));
}

}  // namespace

DivergenceReport kl_divergence(const ExchangeableSource& p, const ExchangeableSource& q) {
  if (!(p.alphabet() == q.alphabet())) throw DomainError("kl_divergence: alphabets differ");
  if (p.k() != q.k()) throw DomainError("kl_divergence: lengths differ");
  DivergenceReport r;
  r.q_min = kInf;
  double acc = 0.0;
  for (const auto& [type, w] : p.type_weights()) {
    const double wq = q.weight(type);
    const double qx = wq / type.class_size();
    r.q_max = std::max(r.q_max, qx);
    r.q_min = std::min(r.q_min, qx);
    if (wq == 0.0) {
      r.support_violations = saturating_add(r.support_violations, type.class_size());
      continue;
    }
    // Both laws are uniform on the class, so the class-size factors cancel.
    acc += w * std::log2(w / wq);
  }
  if (r.q_min == kInf) r.q_min = 0.0;
  r.infinite = r.support_violations > 0;
  r.d_pq = r.infinite ? kInf : acc;
  return r;
}

// ---------------------------------------------------------------- GeometricMixture

GeometricMixture::GeometricMixture(std::vector<Atom> atoms) {
  std::map<double, double> merged;
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) {
      throw DomainError("GeometricMixture: invalid weight");
    }
    if (a.weight == 0.0) continue;
    if (!(a.q > 0.0)) throw DivergenceError("GeometricMixture: q = 0 on the support");
    if (a.q > 1.0 + kWeightTolerance) throw DomainError("GeometricMixture: q > 1");
    merged[std::min(a.q, 1.0)] += a.weight;
    total += a.weight;
  }
  if (merged.empty()) throw DomainError("GeometricMixture: no atoms");
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw DomainError("GeometricMixture: weights sum to " + std::to_string(total));
  }
  for (const auto& [q, w] : merged) atoms_.push_back({w, q});
  q_min_ = atoms_.front().q;
  q_max_ = atoms_.back().q;
}

double GeometricMixture::pmf(std::uint64_t t) const {
  if (t == 0) return 0.0;
  double s = 0.0;
  for (const auto& a : atoms_) {
    if (t == 1) {
      s += a.weight * a.q;
    } else if (a.q < 1.0) {
      s += a.weight * a.q * std::exp(static_cast<double>(t - 1) * std::log1p(-a.q));
    }
  }
  return s;
}

double GeometricMixture::tail_mass(std::uint64_t t) const {
  if (t == 0) return 1.0;
  double s = 0.0;
  for (const auto& a : atoms_) {
    if (a.q < 1.0) s += a.weight * std::exp(static_cast<double>(t) * std::log1p(-a.q));
  }
  return s;
}

double GeometricMixture::mean() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight / a.q;
  return s;
}

std::uint64_t GeometricMixture::truncation_point(double tail_tol) const {
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
    throw DomainError("truncation_point: tail_tol must lie in (0, 1)");
  }
  if (q_min_ >= 1.0) return 1;
  const double t0 = std::ceil(std::log(tail_tol * q_min_) / std::log1p(-q_min_));
  if (t0 > static_cast<double>(kMaxTruncation)) {
    throw CapabilityError("match-index truncation point exceeds 2e8 (q_min too small)");
  }
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(t0));
}

namespace {

// Calls visit(t, Pr(T = t)) for t = 1..t0 with running geometric factors.
template <class Visit>
void scan_pmf(const std::vector<GeometricMixture::Atom>& atoms, std::uint64_t t0,
              Visit&& visit) {
  std::vector<double> term(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) term[i] = atoms[i].weight * atoms[i].q;
  for (std::uint64_t t = 1; t <= t0; ++t) {
    double p = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      p += term[i];
      term[i] *= 1.0 - atoms[i].q;
    }
    visit(t, p);
  }
}

}  // namespace

CertifiedValue GeometricMixture::entropy(double tail_tol) const {
  const std::uint64_t t0 = truncation_point(tail_tol);
  CertifiedValue out;
  scan_pmf(atoms_, t0, [&](std::uint64_t, double p) {
    if (p > 0.0) out.value -= p * std::log2(p);
  });
  const double m = tail_mass(t0);
  if (m > 0.0) {
    double excess = 0.0;
    for (const auto& a : atoms_) {
      if (a.q < 1.0) {
        excess += a.weight * std::exp(static_cast<double>(t0) * std::log1p(-a.q)) / a.q;
      }
    }
    out.radius = m * (max_entropy_with_mean(excess / m) - std::log2(m));
  }
  return out;
}

CertifiedValue GeometricMixture::expected_log2(double tail_tol) const {
  const std::uint64_t t0 = truncation_point(tail_tol);
  CertifiedValue out;
  scan_pmf(atoms_, t0, [&](std::uint64_t t, double p) {
    if (t > 1) out.value += p * std::log2(static_cast<double>(t));
  });
  // Memoryless excess G ~ geometric(q); Jensen gives E log(t0 + G) <= log(t0 + 1/q).
  for (const auto& a : atoms_) {
    if (a.q < 1.0) {
      out.radius += a.weight * std::exp(static_cast<double>(t0) * std::log1p(-a.q)) *
                    std::log2(static_cast<double>(t0) + 1.0 / a.q);
    }
  }
  return out;
}

GeometricMixture match_index_law(const ExchangeableSource& p,
                                 const ExchangeableSource& q_marginal) {
  if (!(p.alphabet() == q_marginal.alphabet()) || p.k() != q_marginal.k()) {
    throw DomainError("match_index_law: alphabet or length mismatch");
  }
  std::vector<GeometricMixture::Atom> atoms;
  for (const auto& [type, w] : p.type_weights()) {
    const double q = q_marginal.sequence_probability(type);
    if (q == 0.0) throw DivergenceError("match_index_law: q(x) = 0 on the support of p");
    atoms.push_back({w, q});
  }
  return GeometricMixture(std::move(atoms));
}

double match_index_pmf(const ExchangeableSource& p, const ExchangeableSource& q_marginal,
                       std::uint64_t t) {
  return match_index_law(p, q_marginal).pmf(t);
}

CertifiedValue match_index_entropy(const ExchangeableSource& p,
                                   const ExchangeableSource& q_marginal, double tail_tol) {
  return match_index_law(p, q_marginal).entropy(tail_tol);
}

CertifiedValue expected_log_T(const ExchangeableSource& p,
                              const ExchangeableSource& q_marginal, double tail_tol) {
  return match_index_law(p, q_marginal).expected_log2(tail_tol);
}

// ---------------------------------------------------------------- bounds

double bound_theorem1(double h, double d) {
  if (h < 0.0 || d < 0.0) throw DomainError("bound_theorem1: H and D must be >= 0");
  return h + d + std::log2(h + d + 1.0) + 1.0;
}

double bound_theorem1b(double h, double d, double q_max, double q_min) {
  if (h < 0.0 || d < 0.0) throw DomainError("bound_theorem1b: H and D must be >= 0");
  if (!(q_min > 0.0) || q_max < q_min) {
    throw DomainError("bound_theorem1b: need q_max >= q_min > 0");
  }
  return h + d + std::log2(std::log2(q_max / q_min) + 1.0) + 3.0;
}

double bound_theorem2(std::uint32_t k, std::size_t alphabet_size) {
  if (k == 0 || alphabet_size == 0) throw DomainError("bound_theorem2: k, |X| >= 1");
  return std::min(k * std::numbers::log2e,
                  static_cast<double>(alphabet_size) * std::log2(k + 1.0));
}

double bound_theorem4(double expected_k, double h_p) {
  if (expected_k < 0.0 || h_p < 0.0) throw DomainError("bound_theorem4: E[K], H >= 0");
  return bound_theorem1(expected_k * h_p, 0.0);
}

double theorem6_rhs(std::uint32_t d, std::uint32_t k) {
  if (k == 0 || k > d) throw DomainError("theorem6_rhs: need 1 <= k <= d");
  return log2_power_over_falling(d, k);
}

BranchedBound bound_theorem3(std::uint32_t k, std::uint32_t d, std::size_t alphabet_size) {
  if (k == 0 || d < k || alphabet_size == 0) {
    throw DomainError("bound_theorem3: need 1 <= k <= d and |X| >= 1");
  }
  BranchedBound b;
  b.first = log2_power_over_falling(d, k);
  if (d == k) {
    b.second = kInf;
    b.note = "d = k: second branch is infinite";
  } else {
    b.second = static_cast<double>(alphabet_size - 1) *
               std::log2(static_cast<double>(d - 1) / static_cast<double>(d - k));
  }
  b.value = std::min(b.first, *b.second);
  return b;
}

BranchedBound bound_theorem5(std::uint32_t k, std::uint32_t d, std::size_t alphabet_size) {
  if (k == 0 || d <= k || alphabet_size == 0) {
    throw DomainError("bound_theorem5: need 1 <= k < d and |X| >= 1");
  }
  BranchedBound b;
  b.first = static_cast<double>(alphabet_size - 1) *
            std::log2(static_cast<double>(d - 1) / static_cast<double>(d - k));
  const double kk = static_cast<double>(k) * (k - 1.0);
  if (kk < 2.0 * d) {
    b.second = -std::log2(1.0 - kk / (2.0 * d));
    b.value = std::min(b.first, *b.second);
  } else {
    b.value = b.first;
    b.note = "k(k-1) >= 2d: second branch undefined and dropped";
  }
  return b;
}

bool definetti_chain_check(std::uint32_t k, std::uint32_t d) {
  const double kk = static_cast<double>(k) * (k - 1.0);
  if (k == 0 || !(kk < 2.0 * d)) {
    throw DomainError("definetti_chain_check: need k >= 1 and k(k-1) < 2d");
  }
  const double lhs = log2_power_over_falling(d, k);
  const double rhs = -std::log2(1.0 - kk / (2.0 * d));
  return lhs <= rhs + 1e-12;
}

Theorem6Result theorem6_verify(std::uint32_t d, std::uint32_t k, std::size_t trials,
                               std::uint64_t seed) {
  if (d < 2 || d > 6) throw CapabilityError("theorem6_verify: need 2 <= d <= 6");
  if (k == 0 || k >= d) throw DomainError("theorem6_verify: need 1 <= k < d");
  const ExchangeableSource h = make_urn_without_replacement(d, k).marginal();
  const Alphabet& alphabet = h.alphabet();

  Theorem6Result r;
  r.rhs = theorem6_rhs(d, k);
  const std::vector<double> uniform(d, 1.0 / d);
  r.uniform_divergence = kl_divergence(h, induced_marginal(iid_generator(alphabet, uniform), k)).d_pq;
  r.min_divergence = r.uniform_divergence;
  r.mixtures_evaluated = 1;

  RandomStream rng(seed);
  auto exponential = [&] { return -std::log1p(-rng.uniform01()); };
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t components = 1 + rng.uniform_below(3);
    // Every tenth draw removes one symbol from all components.
    const bool zero_symbol = rng.uniform_below(10) == 0;
    const std::size_t removed = rng.uniform_below(d);
    std::vector<MixtureComponent> mix(components);
    double wsum = 0.0;
    for (auto& c : mix) {
      c.weight = exponential();
      wsum += c.weight;
      c.symbol_probabilities.resize(d);
      double psum = 0.0;
      for (std::size_t s = 0; s < d; ++s) {
        const double v = zero_symbol && s == removed ? 0.0 : exponential();
        c.symbol_probabilities[s] = v;
        psum += v;
      }
      for (auto& v : c.symbol_probabilities) v /= psum;
    }
    for (auto& c : mix) c.weight /= wsum;
    const MixtureGeneratorSpec spec(alphabet, std::move(mix));
    const auto div = kl_divergence(h, induced_marginal(spec, k));
    ++r.mixtures_evaluated;
    if (div.infinite) {
      ++r.infinite_excluded;
      continue;
    }
    r.min_divergence = std::min(r.min_divergence, div.d_pq);
  }
  r.holds = r.min_divergence >= r.rhs - 1e-9;
  return r;
}

// ---------------------------------------------------------------- rates

double entropy_bits(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

double pool_penalty(std::uint64_t n, std::uint32_t k) {
  if (k > n) throw DomainError("pool_penalty: k > n");
  return log2_power_over_falling(n, k);
}

RateReport rate_report(const ExchangeableSource& p, const MixtureGeneratorSpec& g,
                       std::string name, double tail_tol) {
  RateReport r;
  r.name = std::move(name);
  r.source_entropy = p.entropy();
  const ExchangeableSource q = induced_marginal(g, p.k());
  r.divergence = kl_divergence(p, q);
  if (r.divergence.infinite) {
    r.bound_eq14 = kInf;
    r.notes.push_back("q(x) = 0 on the support of p: D and E[T] are infinite");
    return r;
  }
  const double h = std::max(0.0, r.source_entropy);
  const double d = std::max(0.0, r.divergence.d_pq);
  r.bound_eq14 = bound_theorem1(h, d);
  r.bound_eq15 = bound_theorem1b(h, d, r.divergence.q_max, r.divergence.q_min);
  const GeometricMixture law = match_index_law(p, q);
  r.exact_HT = law.entropy(tail_tol);
  r.exact_E_log_T = law.expected_log2(tail_tol);
  return r;
}

double scheduling_d_max(std::uint64_t n, std::uint32_t k, std::uint32_t b) {
  if (k == 0 || b < k) throw DomainError("scheduling_d_max: need 1 <= k <= b");
  double choose;
  try {
    choose = static_cast<double>(binomial_exact(b, k));
  } catch (const CapabilityError&) {
    choose = std::exp2(log2_binomial(b, k));
  }
  return choose *
         std::pow(static_cast<double>(n) / static_cast<double>(b), static_cast<double>(k));
}

RateReport scheduling_rates(std::uint64_t n, std::uint32_t k, std::uint32_t b) {
  if (k == 0) throw DomainError("scheduling_rates: k must be >= 1");
  if (b < k) throw DomainError("scheduling_rates: b < k");
  if (n < k) throw DomainError("scheduling_rates: n < k");
  const ExtendableSource src = make_scheduling(b, k);
  const MixtureGeneratorSpec g =
      b == k ? urn_generator(src.marginal()) : extended_urn_generator(src);
  RateReport r = rate_report(src.marginal(), g,
                             "scheduling n=" + std::to_string(n) + " k=" +
                                 std::to_string(k) + " b=" + std::to_string(b));
  r.achievable = r.source_entropy + r.divergence.d_pq + 3.0;
  r.converse = k * std::log2(static_cast<double>(b)) - pool_penalty(n, k);
  r.d_max = scheduling_d_max(n, k, b);
  if (n % b != 0) {
    r.notes.push_back("b does not divide n: d_max is the real-relaxation upper bound");
  }
  return r;
}

CategorizationReport categorization_rates(std::uint64_t n,
                                          std::span<const std::uint32_t> counts) {
  const ExchangeableSource p = make_categorization(counts);
  if (n < p.k()) throw DomainError("categorization_rates: n < k");
  CategorizationReport out;
  std::string name = "categorization n=" + std::to_string(n) + " counts=";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    name += (i ? "," : "") + std::to_string(counts[i]);
  }
  out.rates = rate_report(p, urn_generator(p), std::move(name));
  std::vector<double> rho;
  for (auto c : counts) rho.push_back(static_cast<double>(c) / p.k());
  out.k_h_rho = p.k() * entropy_bits(rho);
  out.rates.achievable = out.k_h_rho + 3.0;
  out.rates.converse = out.k_h_rho - pool_penalty(n, p.k());
  out.identity_residual =
      out.rates.divergence.d_pq - (out.k_h_rho - out.rates.source_entropy);
  return out;
}

ResourceAllocationComparison resource_allocation_compare(std::uint32_t r, std::uint32_t k) {
  const ExchangeableSource p = make_multinomial(r, k);
  ResourceAllocationComparison c;
  c.h_x1 = project(p, 1).entropy();
  c.r_marginal = k * c.h_x1;
  c.h_x = p.entropy();
  c.d_urn = kl_divergence(p, induced_marginal(urn_generator(p), k)).d_pq;
  c.r_urn = c.h_x + c.d_urn;
  c.bound_urn = theorem6_rhs(k, k);
  c.gap = c.r_marginal - c.r_urn;
  return c;
}

}  // namespace mra
