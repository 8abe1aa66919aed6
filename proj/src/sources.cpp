#include "mra/sources.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "mra/combinatorics.hpp"
#include "mra/errors.hpp"

namespace mra {

namespace {

constexpr double kNormalizationTolerance = 1e-9;

void check_distribution(std::span<const double> p, const char* what) {
  if (p.empty()) throw DomainError(std::string(what) + ": empty distribution");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError(std::string(what) + ": negative or non-finite probability");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw DomainError(std::string(what) + ": probabilities sum to " +
                      std::to_string(total));
  }
}

void check_composition_cap(std::uint32_t k, std::size_t parts) {
  if (composition_count(k, parts) > kMaxCompositions) {
    throw CapabilityError("more than 1e6 compositions of k=" + std::to_string(k) +
                          " over " + std::to_string(parts) + " symbols");
  }
}

// Uniform law on the single all-ones type over {1..d}, length d.
ExchangeableSource injective_base(std::uint32_t d) {
  TypeWeights w;
  w.emplace(Composition(std::vector<std::uint32_t>(d, 1)), 1.0);
  return ExchangeableSource(Alphabet::range(1, d), d, std::move(w));
}

// Visit every arrangement of a type (its class) in lexicographic order.
void for_each_arrangement(const Alphabet& alphabet, const Composition& type,
                          const std::function<void(std::span<const Symbol>)>& visit) {
  // Permute alphabet indices rather than labels: labels need not be sorted.
  std::vector<std::size_t> idx;
  idx.reserve(type.length());
  for (std::size_t i = 0; i < type.parts(); ++i) idx.insert(idx.end(), type[i], i);
  std::vector<Symbol> x(idx.size());
  do {
    for (std::size_t j = 0; j < idx.size(); ++j) x[j] = alphabet.label(idx[j]);
    visit(x);
  } while (std::next_permutation(idx.begin(), idx.end()));
}

}  // namespace

// ---------------------------------------------------------------- Alphabet

Alphabet::Alphabet(std::vector<Symbol> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw DomainError("Alphabet: must contain a symbol");
  std::set<Symbol> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size()) {
    throw DomainError("Alphabet: duplicate symbol");
  }
}

Alphabet Alphabet::range(Symbol first, std::size_t size) {
  std::vector<Symbol> labels(size);
  std::iota(labels.begin(), labels.end(), first);
  return Alphabet(std::move(labels));
}

bool Alphabet::contains(Symbol s) const {
  return std::find(labels_.begin(), labels_.end(), s) != labels_.end();
}

std::size_t Alphabet::index_of(Symbol s) const {
  const auto it = std::find(labels_.begin(), labels_.end(), s);
  if (it == labels_.end()) {
    throw DomainError("symbol " + std::to_string(s) + " is not in the alphabet");
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

std::vector<std::size_t> Alphabet::indices_of(std::span<const Symbol> x) const {
  std::vector<std::size_t> out;
  out.reserve(x.size());
  for (Symbol s : x) out.push_back(index_of(s));
  return out;
}

// ------------------------------------------------------------- Composition

Composition::Composition(std::vector<std::uint32_t> counts)
    : counts_(std::move(counts)) {
  std::uint64_t total = 0;
  for (auto c : counts_) total += c;
  if (total > std::numeric_limits<std::uint32_t>::max()) {
    throw DomainError("Composition: length overflow");
  }
  length_ = static_cast<std::uint32_t>(total);
}

Composition Composition::of(const Alphabet& alphabet, std::span<const Symbol> x) {
  std::vector<std::uint32_t> counts(alphabet.size(), 0);
  for (Symbol s : x) ++counts[alphabet.index_of(s)];
  return Composition(std::move(counts));
}

double Composition::class_size() const {
  const double lg = log2_multinomial(counts_);
  if (lg < 62.0) return static_cast<double>(multinomial_exact(counts_));
  return std::exp2(lg);
}

double Composition::log2_class_size() const {
  const double lg = log2_multinomial(counts_);
  if (lg < 62.0) return std::log2(static_cast<double>(multinomial_exact(counts_)));
  return lg;
}

std::uint64_t Composition::class_size_exact() const {
  return multinomial_exact(counts_);
}

bool ColexLess::operator()(const Composition& a, const Composition& b) const {
  return colex_less(a.counts(), b.counts());
}

// ------------------------------------------------------ ExchangeableSource

ExchangeableSource::ExchangeableSource(Alphabet alphabet, std::uint32_t k,
                                       TypeWeights weights)
    : ExchangeableSource(std::move(alphabet), k, std::move(weights), true) {}

ExchangeableSource ExchangeableSource::unnormalized(Alphabet alphabet,
                                                   std::uint32_t k,
                                                   TypeWeights weights) {
  return ExchangeableSource(std::move(alphabet), k, std::move(weights), false);
}

ExchangeableSource::ExchangeableSource(Alphabet alphabet, std::uint32_t k,
                                       TypeWeights weights,
                                       bool check_normalization)
    : alphabet_(std::move(alphabet)), k_(k) {
  if (k_ == 0) throw DomainError("ExchangeableSource: k must be positive");
  for (auto& [type, w] : weights) {
    if (type.parts() != alphabet_.size()) {
      throw DomainError("ExchangeableSource: composition has wrong number of parts");
    }
    if (type.length() != k_) {
      throw DomainError("ExchangeableSource: composition does not sum to k");
    }
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DomainError("ExchangeableSource: negative or non-finite weight");
    }
    if (w > 0.0) {
      weights_.emplace(type, w);
      total_ += w;
    }
  }
  if (weights_.empty()) throw DomainError("ExchangeableSource: no positive weight");
  if (check_normalization && std::abs(total_ - 1.0) > kNormalizationTolerance) {
    throw DomainError("ExchangeableSource: type weights sum to " +
                      std::to_string(total_));
  }
  std::vector<double> probs;
  probs.reserve(weights_.size());
  order_.reserve(weights_.size());
  for (const auto& [type, w] : weights_) {
    order_.push_back(type);
    probs.push_back(w);
  }
  type_sampler_ = DiscreteSampler(probs);
}

double ExchangeableSource::weight(const Composition& type) const {
  const auto it = weights_.find(type);
  return it == weights_.end() ? 0.0 : it->second;
}

double ExchangeableSource::sequence_probability(const Composition& type) const {
  const double w = weight(type);
  if (w == 0.0) return 0.0;
  return w / type.class_size();
}

double ExchangeableSource::pmf(std::span<const Symbol> x) const {
  if (x.size() != k_) {
    throw DomainError("pmf: sequence length " + std::to_string(x.size()) +
                      " != k=" + std::to_string(k_));
  }
  return sequence_probability(Composition::of(alphabet_, x));
}

double ExchangeableSource::entropy() const {
  double h = 0.0;
  for (const auto& [type, w] : weights_) {
    h += w * (type.log2_class_size() - std::log2(w));
  }
  return h;
}

std::vector<Symbol> ExchangeableSource::sample(RandomStream& rng) const {
  const Composition& type = order_[type_sampler_(rng.uniform01())];
  std::vector<Symbol> x;
  x.reserve(k_);
  for (std::size_t i = 0; i < type.parts(); ++i) {
    x.insert(x.end(), type[i], alphabet_.label(i));
  }
  for (std::size_t i = x.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_below(i);
    std::swap(x[i - 1], x[j]);
  }
  return x;
}

// -------------------------------------------------------- ExtendableSource

ExtendableSource::ExtendableSource(ExchangeableSource base, std::uint32_t k)
    : base_(std::move(base)), marginal_(project(base_, k)) {}

ExchangeableSource project(const ExchangeableSource& source, std::uint32_t k) {
  const std::uint32_t d = source.k();
  if (k == 0 || k > d) {
    throw DomainError("project: need 1 <= k <= d (k=" + std::to_string(k) +
                      ", d=" + std::to_string(d) + ")");
  }
  if (k == d) return source;
  check_composition_cap(k, source.alphabet().size());
  const double log2_total = log2_binomial(d, k);
  TypeWeights out;
  for (const auto& [type, w] : source.type_weights()) {
    const double log2_w = std::log2(w);
    for_each_bounded_composition(
        k, type.counts(), [&](std::span<const std::uint32_t> sigma) {
          double lg = log2_w - log2_total;
          for (std::size_t s = 0; s < sigma.size(); ++s) {
            lg += log2_binomial(type[s], sigma[s]);
          }
          Composition key(std::vector<std::uint32_t>(sigma.begin(), sigma.end()));
          out[key] += std::exp2(lg);
        });
  }
  return ExchangeableSource(source.alphabet(), k, std::move(out));
}

// ------------------------------------------------------------ constructors

ExchangeableSource make_iid(std::span<const double> p, std::uint32_t k) {
  return make_iid(Alphabet::range(0, p.size()), p, k);
}

ExchangeableSource make_iid(const Alphabet& alphabet, std::span<const double> p,
                            std::uint32_t k) {
  check_distribution(p, "make_iid");
  if (p.size() != alphabet.size()) {
    throw DomainError("make_iid: distribution size differs from alphabet size");
  }
  if (k == 0) throw DomainError("make_iid: k must be positive");
  check_composition_cap(k, p.size());
  TypeWeights w;
  for_each_composition(k, p.size(), [&](std::span<const std::uint32_t> tau) {
    double lg = log2_multinomial(tau);
    for (std::size_t s = 0; s < tau.size(); ++s) {
      if (tau[s] == 0) continue;
      if (p[s] == 0.0) return;
      lg += tau[s] * std::log2(p[s]);
    }
    w.emplace(Composition(std::vector<std::uint32_t>(tau.begin(), tau.end())),
              std::exp2(lg));
  });
  return ExchangeableSource(alphabet, k, std::move(w));
}

ExtendableSource make_scheduling(std::uint32_t b, std::uint32_t k) {
  if (k == 0) throw DomainError("make_scheduling: k must be positive");
  if (b < k) {
    throw DomainError("make_scheduling: need b >= k (b=" + std::to_string(b) +
                      ", k=" + std::to_string(k) + ")");
  }
  return ExtendableSource(injective_base(b), k);
}

ExchangeableSource make_categorization(std::span<const std::uint32_t> counts) {
  if (counts.empty()) throw DomainError("make_categorization: no categories");
  const std::uint64_t k = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (k == 0) throw DomainError("make_categorization: total count must be positive");
  TypeWeights w;
  w.emplace(Composition(std::vector<std::uint32_t>(counts.begin(), counts.end())), 1.0);
  return ExchangeableSource(Alphabet::range(1, counts.size()),
                            static_cast<std::uint32_t>(k), std::move(w));
}

ExchangeableSource make_two_point(std::uint32_t k) {
  if (k == 0) throw DomainError("make_two_point: k must be positive");
  TypeWeights w;
  w.emplace(Composition({k, 0}), 0.5);
  w.emplace(Composition({0, k}), 0.5);
  return ExchangeableSource(Alphabet::range(0, 2), k, std::move(w));
}

ExchangeableSource make_multinomial(std::uint32_t r, std::uint32_t k) {
  if (k == 0) throw DomainError("make_multinomial: k must be positive");
  const std::size_t parts = static_cast<std::size_t>(r) + 1;
  check_composition_cap(k, parts);
  // tau[v] = number of users receiving v units; a sequence of that type has
  // probability r! / prod(v!^tau[v]) * k^-r.
  const double log2_r_fact = log2_factorial(r);
  const double log2_k = std::log2(static_cast<double>(k));
  TypeWeights w;
  for_each_composition(k, parts, [&](std::span<const std::uint32_t> tau) {
    std::uint64_t units = 0;
    for (std::size_t v = 0; v < tau.size(); ++v) units += v * tau[v];
    if (units != r) return;
    double lg = log2_multinomial(tau) + log2_r_fact - r * log2_k;
    for (std::size_t v = 0; v < tau.size(); ++v) lg -= tau[v] * log2_factorial(v);
    w.emplace(Composition(std::vector<std::uint32_t>(tau.begin(), tau.end())),
              std::exp2(lg));
  });
  return ExchangeableSource(Alphabet::range(0, parts), k, std::move(w));
}

ExtendableSource make_urn_without_replacement(std::uint32_t d, std::uint32_t k) {
  if (k == 0) throw DomainError("make_urn_without_replacement: k must be positive");
  if (d < k) {
    throw DomainError("make_urn_without_replacement: need d >= k (d=" +
                      std::to_string(d) + ", k=" + std::to_string(k) + ")");
  }
  return ExtendableSource(injective_base(d), k);
}

// ------------------------------------------------------------ enumeration

void for_each_sequence(const Alphabet& alphabet, std::uint32_t k,
                       const std::function<void(std::span<const Symbol>)>& visit) {
  const double count = std::pow(static_cast<double>(alphabet.size()), k);
  if (count > kMaxSequences) {
    throw CapabilityError("|X|^k = " + std::to_string(count) +
                          " exceeds the 1e7 sequence cap");
  }
  std::vector<std::size_t> idx(k, 0);
  std::vector<Symbol> x(k, alphabet.label(0));
  if (k == 0) {
    visit(x);
    return;
  }
  for (;;) {
    visit(x);
    std::size_t pos = k;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < alphabet.size()) {
        x[pos] = alphabet.label(idx[pos]);
        break;
      }
      idx[pos] = 0;
      x[pos] = alphabet.label(0);
      if (pos == 0) return;
    }
  }
}

namespace {

void require_small_k(std::uint32_t k) {
  if (k > 8) {
    throw CapabilityError("verify_exchangeable: k=" + std::to_string(k) +
                          " exceeds the factorial enumeration guard (8)");
  }
}

}  // namespace

ExchangeabilityReport verify_exchangeable(const ExchangeableSource& source) {
  require_small_k(source.k());
  ExchangeabilityReport report;
  double total = 0.0;
  for (const auto& [type, w] : source.type_weights()) {
    std::vector<Symbol> reference;
    double reference_p = -1.0;
    for_each_arrangement(source.alphabet(), type, [&](std::span<const Symbol> x) {
      const double px = source.pmf(x);
      total += px;
      if (reference_p < 0.0) {
        reference_p = px;
        return;
      }
      report.worst_permutation_violation =
          std::max(report.worst_permutation_violation, std::abs(px - reference_p));
    });
  }
  report.permutation_invariant = report.worst_permutation_violation == 0.0;
  report.normalization_error = std::abs(total - 1.0);
  report.normalized = report.normalization_error <= kNormalizationTolerance;
  return report;
}

ExchangeabilityReport verify_exchangeable(const Alphabet& alphabet,
                                          std::uint32_t k,
                                          const SequenceTable& table) {
  require_small_k(k);
  ExchangeabilityReport report;
  double total = 0.0;
  for (const auto& [x, px] : table) {
    if (x.size() != k) throw DomainError("verify_exchangeable: wrong sequence length");
    for (Symbol s : x) alphabet.index_of(s);
    total += px;
    if (px == 0.0) continue;
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::vector<Symbol> permuted(k);
    do {
      for (std::size_t i = 0; i < k; ++i) permuted[i] = x[order[i]];
      const auto it = table.find(permuted);
      const double pp = it == table.end() ? 0.0 : it->second;
      report.worst_permutation_violation =
          std::max(report.worst_permutation_violation, std::abs(px - pp));
    } while (std::next_permutation(order.begin(), order.end()));
  }
  report.permutation_invariant = report.worst_permutation_violation == 0.0;
  report.normalization_error = std::abs(total - 1.0);
  report.normalized = report.normalization_error <= kNormalizationTolerance;
  return report;
}

}  // namespace mra
