#pragma once

// Finite exchangeable distributions stored by type class.
//
// An exchangeable law on X^k is uniform on every type class, so it is fully
// described by the probability W(tau) of each composition tau of k. The
// per-sequence pmf is W(tau) / |class(tau)|. Exchangeability is therefore a
// property of the representation, not something that has to be checked.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mra/random.hpp"

namespace mra {

using Symbol = std::int64_t;

// Ordered finite set of symbol labels; index i <-> labels()[i].
class Alphabet {
 public:
  explicit Alphabet(std::vector<Symbol> labels);
  // {first, first+1, ..., first+size-1}
  static Alphabet range(Symbol first, std::size_t size);

  std::size_t size() const noexcept { return labels_.size(); }
  Symbol label(std::size_t index) const { return labels_.at(index); }
  const std::vector<Symbol>& labels() const noexcept { return labels_; }
  bool contains(Symbol s) const;
  // Throws DomainError for symbols outside the alphabet.
  std::size_t index_of(Symbol s) const;
  std::vector<std::size_t> indices_of(std::span<const Symbol> x) const;

  bool operator==(const Alphabet&) const = default;

 private:
  std::vector<Symbol> labels_;
};

// Symbol counts of a sequence, one entry per alphabet index.
class Composition {
 public:
  Composition() = default;
  explicit Composition(std::vector<std::uint32_t> counts);
  static Composition of(const Alphabet& alphabet, std::span<const Symbol> x);

  std::span<const std::uint32_t> counts() const noexcept { return counts_; }
  std::uint32_t operator[](std::size_t i) const { return counts_[i]; }
  std::size_t parts() const noexcept { return counts_.size(); }
  std::uint32_t length() const noexcept { return length_; }

  // |class| as a double: exact up to 2^62, log-gamma beyond.
  double class_size() const;
  double log2_class_size() const;
  // Exact |class|; CapabilityError if it does not fit in 64 bits.
  std::uint64_t class_size_exact() const;

  bool operator==(const Composition& other) const {
    return counts_ == other.counts_;
  }

 private:
  std::vector<std::uint32_t> counts_;
  std::uint32_t length_ = 0;
};

struct ColexLess {
  bool operator()(const Composition& a, const Composition& b) const;
};

using TypeWeights = std::map<Composition, double, ColexLess>;

class ExchangeableSource {
 public:
  // Validates compositions and weights; zero weights are dropped.
  // Throws DomainError unless the weights sum to 1 within 1e-9.
  ExchangeableSource(Alphabet alphabet, std::uint32_t k, TypeWeights weights);

  // Same as the constructor but without the normalization check; used to
  // inspect hand-built inputs with verify_exchangeable.
  static ExchangeableSource unnormalized(Alphabet alphabet, std::uint32_t k,
                                         TypeWeights weights);

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::uint32_t k() const noexcept { return k_; }
  const TypeWeights& type_weights() const noexcept { return weights_; }
  double weight(const Composition& type) const;
  double total_weight() const noexcept { return total_; }

  // Probability of one sequence of the given type.
  double sequence_probability(const Composition& type) const;
  double pmf(std::span<const Symbol> x) const;

  // Exact entropy in bits.
  double entropy() const;

  // Draw a type by weight, then a uniformly random arrangement of it.
  std::vector<Symbol> sample(RandomStream& rng) const;

 private:
  ExchangeableSource(Alphabet alphabet, std::uint32_t k, TypeWeights weights,
                     bool check_normalization);

  Alphabet alphabet_;
  std::uint32_t k_;
  TypeWeights weights_;
  double total_ = 0.0;
  std::vector<Composition> order_;
  DiscreteSampler type_sampler_;
};

// k-marginal of an exchangeable law on X^d.
class ExtendableSource {
 public:
  ExtendableSource(ExchangeableSource base, std::uint32_t k);

  const ExchangeableSource& base() const noexcept { return base_; }
  std::uint32_t d() const noexcept { return base_.k(); }
  std::uint32_t k() const noexcept { return marginal_.k(); }
  const ExchangeableSource& marginal() const noexcept { return marginal_; }

 private:
  ExchangeableSource base_;
  ExchangeableSource marginal_;
};

// Law of the first k coordinates of an exchangeable source (k <= source.k()).
ExchangeableSource project(const ExchangeableSource& source, std::uint32_t k);

ExchangeableSource make_iid(std::span<const double> p, std::uint32_t k);
ExchangeableSource make_iid(const Alphabet& alphabet, std::span<const double> p,
                            std::uint32_t k);
// Uniform non-colliding assignment of k users to b slots labelled 1..b.
ExtendableSource make_scheduling(std::uint32_t b, std::uint32_t k);
// Uniform arrangement of counts[l] users with label l+1.
ExchangeableSource make_categorization(std::span<const std::uint32_t> counts);
// (0,...,0) or (1,...,1), each with probability 1/2.
ExchangeableSource make_two_point(std::uint32_t k);
// r resource units thrown uniformly at k users; alphabet {0..r}.
ExchangeableSource make_multinomial(std::uint32_t r, std::uint32_t k);
// k draws without replacement from {1..d}.
ExtendableSource make_urn_without_replacement(std::uint32_t d, std::uint32_t k);

// Calls visit(x) for every x in X^k in lexicographic index order.
// Throws CapabilityError if |X|^k exceeds kMaxSequences.
void for_each_sequence(const Alphabet& alphabet, std::uint32_t k,
                       const std::function<void(std::span<const Symbol>)>& visit);

using SequenceTable = std::map<std::vector<Symbol>, double>;

struct ExchangeabilityReport {
  bool permutation_invariant = true;
  double worst_permutation_violation = 0.0;
  double normalization_error = 0.0;
  bool normalized = true;

  bool ok() const noexcept { return permutation_invariant && normalized; }
};

// Checks pmf(x) == pmf(sigma(x)) for every support sequence and every
// permutation, and that the pmf sums to 1 within 1e-9. Requires k <= 8.
ExchangeabilityReport verify_exchangeable(const ExchangeableSource& source);
ExchangeabilityReport verify_exchangeable(const Alphabet& alphabet,
                                          std::uint32_t k,
                                          const SequenceTable& table);

}  // namespace mra
