#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mra/random.hpp"
#include "mra/sources.hpp"

namespace mra {

struct MixtureComponent {
  double weight = 0.0;
  std::vector<double> symbol_probabilities;
  // Set when the component is an empirical distribution counts/denominator.
  std::vector<std::uint32_t> counts;
  std::uint32_t denominator = 0;
};

// Finitely supported i.i.d. mixture: pick component j with probability w_j,
// then draw every entry independently from q_j.
class MixtureGeneratorSpec {
 public:
  MixtureGeneratorSpec(Alphabet alphabet, std::vector<MixtureComponent> components);

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  const std::vector<MixtureComponent>& components() const noexcept {
    return components_;
  }

  // q(x) = sum_j w_j prod_i q_j(x_i) for alphabet indices x.
  double sequence_probability(std::span<const std::size_t> x) const;
  double probability(std::span<const Symbol> x) const;

 private:
  Alphabet alphabet_;
  std::vector<MixtureComponent> components_;
};

// Single component q(x|theta) = p(x): an i.i.d. codebook.
MixtureGeneratorSpec iid_generator(const Alphabet& alphabet, std::span<const double> p);

// One component per support type tau of the source, weight W(tau),
// symbol distribution tau/k. Components with equal empirical distributions
// are merged (exact rational comparison).
MixtureGeneratorSpec urn_generator(const ExchangeableSource& source);

// Same construction on the length-d base: symbol distribution tau/d.
MixtureGeneratorSpec extended_urn_generator(const ExtendableSource& source);

// I.i.d. codebook drawn from the one-dimensional marginal of the source.
MixtureGeneratorSpec marginal_generator(const ExchangeableSource& source);

// Exact law of any k distinct entries of one codeword, in type-weight form.
ExchangeableSource induced_marginal(const MixtureGeneratorSpec& spec, std::uint32_t k);

// Deterministic infinite codebook: codeword t (t >= 1) is a pure function of
// (spec, n, master_seed, t). The component of codeword t is drawn from the
// Philox block (master_seed; t, 0, component) and entry u from
// (master_seed; t, u-1, entry), so any subset of entries costs O(|subset|).
class CodebookStream {
 public:
  CodebookStream(MixtureGeneratorSpec spec, std::uint64_t n, std::uint64_t master_seed);

  const MixtureGeneratorSpec& spec() const noexcept { return spec_; }
  const Alphabet& alphabet() const noexcept { return spec_.alphabet(); }
  std::uint64_t n() const noexcept { return n_; }
  std::uint64_t master_seed() const noexcept { return master_seed_; }

  std::size_t component(std::uint64_t t) const;
  // Alphabet index of entry `position` (1-based) given codeword t's component.
  std::size_t entry_index(std::uint64_t t, std::size_t component,
                          std::uint64_t position) const;

  std::vector<Symbol> codeword(std::uint64_t t) const;
  // Restriction of codeword(t) to distinct 1-based positions.
  std::vector<Symbol> entries(std::uint64_t t,
                              std::span<const std::uint64_t> positions) const;

 private:
  void check_t(std::uint64_t t) const;

  MixtureGeneratorSpec spec_;
  std::uint64_t n_;
  std::uint64_t master_seed_;
  DiscreteSampler component_sampler_;
  std::vector<DiscreteSampler> symbol_samplers_;
};

}  // namespace mra
