#include "mra/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "mra/combinatorics.hpp"
#include "mra/errors.hpp"

namespace mra {

namespace {

constexpr double kTolerance = 1e-9;

// Empirical-distribution components keyed by their reduced rational form.
class EmpiricalMixtureBuilder {
 public:
  void add(double weight, std::span<const std::uint32_t> counts,
           std::uint32_t denominator) {
    std::uint32_t g = denominator;
    for (auto c : counts) g = std::gcd(g, c);
    std::vector<std::uint32_t> key(counts.begin(), counts.end());
    for (auto& c : key) c /= g;
    key.push_back(denominator / g);
    auto [it, inserted] = index_.emplace(key, components_.size());
    if (inserted) {
      MixtureComponent c;
      c.counts.assign(key.begin(), key.end() - 1);
      c.denominator = key.back();
      c.symbol_probabilities.reserve(c.counts.size());
      for (auto v : c.counts) {
        c.symbol_probabilities.push_back(static_cast<double>(v) / c.denominator);
      }
      components_.push_back(std::move(c));
    }
    components_[it->second].weight += weight;
  }

  std::vector<MixtureComponent> take() { return std::move(components_); }

 private:
  std::map<std::vector<std::uint32_t>, std::size_t> index_;
  std::vector<MixtureComponent> components_;
};

}  // namespace

MixtureGeneratorSpec::MixtureGeneratorSpec(Alphabet alphabet,
                                           std::vector<MixtureComponent> components)
    : alphabet_(std::move(alphabet)), components_(std::move(components)) {
  if (components_.empty()) throw DomainError("MixtureGeneratorSpec: no components");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) {
      throw DomainError("MixtureGeneratorSpec: negative or non-finite weight");
    }
    if (c.symbol_probabilities.size() != alphabet_.size()) {
      throw DomainError("MixtureGeneratorSpec: symbol distribution size != |X|");
    }
    double s = 0.0;
    for (double v : c.symbol_probabilities) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DomainError("MixtureGeneratorSpec: negative or non-finite probability");
      }
      s += v;
    }
    if (std::abs(s - 1.0) > kTolerance) {
      throw DomainError("MixtureGeneratorSpec: symbol distribution sums to " +
                        std::to_string(s));
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > kTolerance) {
    throw DomainError("MixtureGeneratorSpec: weights sum to " + std::to_string(total));
  }
}

double MixtureGeneratorSpec::sequence_probability(std::span<const std::size_t> x) const {
  double q = 0.0;
  for (const auto& c : components_) {
    if (c.weight == 0.0) continue;
    double prod = c.weight;
    for (std::size_t s : x) {
      prod *= c.symbol_probabilities.at(s);
      if (prod == 0.0) break;
    }
    q += prod;
  }
  return q;
}

double MixtureGeneratorSpec::probability(std::span<const Symbol> x) const {
  const auto idx = alphabet_.indices_of(x);
  return sequence_probability(idx);
}

MixtureGeneratorSpec iid_generator(const Alphabet& alphabet, std::span<const double> p) {
  MixtureComponent c;
  c.weight = 1.0;
  c.symbol_probabilities.assign(p.begin(), p.end());
  return MixtureGeneratorSpec(alphabet, {std::move(c)});
}

MixtureGeneratorSpec urn_generator(const ExchangeableSource& source) {
  EmpiricalMixtureBuilder builder;
  for (const auto& [type, w] : source.type_weights()) {
    builder.add(w, type.counts(), source.k());
  }
  return MixtureGeneratorSpec(source.alphabet(), builder.take());
}

MixtureGeneratorSpec extended_urn_generator(const ExtendableSource& source) {
  return urn_generator(source.base());
}

MixtureGeneratorSpec marginal_generator(const ExchangeableSource& source) {
  std::vector<double> p(source.alphabet().size(), 0.0);
  for (const auto& [type, w] : source.type_weights()) {
    for (std::size_t s = 0; s < type.parts(); ++s) {
      p[s] += w * type[s] / source.k();
    }
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= total;
  return iid_generator(source.alphabet(), p);
}

ExchangeableSource induced_marginal(const MixtureGeneratorSpec& spec, std::uint32_t k) {
  if (k == 0) throw DomainError("induced_marginal: k must be positive");
  const std::size_t m = spec.alphabet().size();
  if (composition_count(k, m) > kMaxCompositions) {
    throw CapabilityError("induced_marginal: more than 1e6 compositions");
  }
  // Per-component log2 q_j(s); -inf marks zero-probability symbols.
  std::vector<std::vector<double>> log_q;
  std::vector<double> log_w;
  for (const auto& c : spec.components()) {
    if (c.weight == 0.0) continue;
    log_w.push_back(std::log2(c.weight));
    auto& row = log_q.emplace_back(m);
    for (std::size_t s = 0; s < m; ++s) {
      row[s] = c.symbol_probabilities[s] > 0.0
                   ? std::log2(c.symbol_probabilities[s])
                   : -std::numeric_limits<double>::infinity();
    }
  }
  TypeWeights out;
  std::vector<double> terms(log_w.size());
  for_each_composition(k, m, [&](std::span<const std::uint32_t> tau) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < log_w.size(); ++j) {
      double lg = log_w[j];
      for (std::size_t s = 0; s < m && std::isfinite(lg); ++s) {
        if (tau[s] > 0) lg += tau[s] * log_q[j][s];
      }
      terms[j] = lg;
      best = std::max(best, lg);
    }
    if (!std::isfinite(best)) return;
    double acc = 0.0;
    for (double lg : terms) {
      if (std::isfinite(lg)) acc += std::exp2(lg - best);
    }
    const double log2_class = log2_multinomial(tau);
    out.emplace(Composition(std::vector<std::uint32_t>(tau.begin(), tau.end())),
                std::exp2(best + std::log2(acc) + log2_class));
  });
  return ExchangeableSource(spec.alphabet(), k, std::move(out));
}

// -------------------------------------------------------- CodebookStream

CodebookStream::CodebookStream(MixtureGeneratorSpec spec, std::uint64_t n,
                               std::uint64_t master_seed)
    : spec_(std::move(spec)), n_(n), master_seed_(master_seed) {
  if (n_ == 0) throw DomainError("CodebookStream: n must be positive");
  if (n_ > (std::uint64_t{1} << 32)) {
    throw DomainError("CodebookStream: n must not exceed 2^32");
  }
  std::vector<double> weights;
  for (const auto& c : spec_.components()) {
    weights.push_back(c.weight);
    symbol_samplers_.emplace_back(c.symbol_probabilities);
  }
  component_sampler_ = DiscreteSampler(weights);
}

void CodebookStream::check_t(std::uint64_t t) const {
  if (t == 0) throw DomainError("codeword index t must be >= 1");
}

std::size_t CodebookStream::component(std::uint64_t t) const {
  check_t(t);
  if (symbol_samplers_.size() == 1) return 0;
  const auto block = keyed_block(master_seed_, t, 0, Domain::kCodewordComponent);
  return component_sampler_(to_unit_double(block[0]));
}

std::size_t CodebookStream::entry_index(std::uint64_t t, std::size_t component,
                                        std::uint64_t position) const {
  const auto block = keyed_block(master_seed_, t, static_cast<std::uint32_t>(position - 1),
                                 Domain::kCodewordEntry);
  return symbol_samplers_[component](to_unit_double(block[0]));
}

std::vector<Symbol> CodebookStream::codeword(std::uint64_t t) const {
  const std::size_t j = component(t);
  std::vector<Symbol> out;
  out.reserve(n_);
  for (std::uint64_t u = 1; u <= n_; ++u) {
    out.push_back(alphabet().label(entry_index(t, j, u)));
  }
  return out;
}

std::vector<Symbol> CodebookStream::entries(std::uint64_t t,
                                            std::span<const std::uint64_t> positions) const {
  std::set<std::uint64_t> seen;
  for (auto u : positions) {
    if (u == 0 || u > n_) {
      throw DomainError("entries: position " + std::to_string(u) + " outside [1, " +
                        std::to_string(n_) + "]");
    }
    if (!seen.insert(u).second) {
      throw DomainError("entries: duplicate position " + std::to_string(u));
    }
  }
  const std::size_t j = component(t);
  std::vector<Symbol> out;
  out.reserve(positions.size());
  for (auto u : positions) out.push_back(alphabet().label(entry_index(t, j, u)));
  return out;
}

}  // namespace mra
