#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mra/codebook.hpp"

namespace mra {

// Ordered distinct 1-based user indices in [1, n].
class ActivityPattern {
 public:
  ActivityPattern(std::vector<std::uint64_t> active, std::uint64_t n);

  const std::vector<std::uint64_t>& active() const noexcept { return active_; }
  std::size_t size() const noexcept { return active_.size(); }
  std::uint64_t n() const noexcept { return n_; }
  std::uint64_t operator[](std::size_t i) const { return active_[i]; }

 private:
  std::vector<std::uint64_t> active_;
  std::uint64_t n_;
};

struct MatchIndex {
  std::uint64_t t = 1;
};

struct EncodeBudget {
  std::uint64_t t_max = std::uint64_t{1} << 40;
  // Refuse to scan when q(x) * t_max < kEarlyAbortThreshold: the search would
  // almost surely exhaust the budget.
  bool early_abort = true;
  static constexpr double kEarlyAbortThreshold = 1e-3;
};

// Smallest t <= t_max whose codeword agrees with x at every active user.
// Throws UnencodableError if q(x) = 0 and BudgetExhausted past t_max.
MatchIndex encode(const CodebookStream& stream, std::span<const Symbol> x,
                  const ActivityPattern& a, const EncodeBudget& budget = {});

// Same rule with the pattern length free; an empty pattern matches at t = 1.
MatchIndex encode_random_k(const CodebookStream& stream, std::span<const Symbol> x,
                           const ActivityPattern& a, const EncodeBudget& budget = {});

// Entry u of codeword t: what user u reads from the common message.
Symbol decode(const CodebookStream& stream, MatchIndex t, std::uint64_t u);

// Analytic q(x) under the stream's mixture.
double match_probability(const CodebookStream& stream, std::span<const Symbol> x);

// ---------------------------------------------------------------- integer codes

class BitString {
 public:
  BitString() = default;
  explicit BitString(std::string_view bits);  // characters '0' / '1'

  std::size_t size() const noexcept { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i]; }
  void push_back(bool bit) { bits_.push_back(bit); }
  void append(const BitString& other);
  std::string str() const;

  // MSB-first, zero-padded final byte.
  std::vector<std::uint8_t> pack() const;
  static BitString unpack(std::span<const std::uint8_t> bytes, std::size_t bit_length);

  bool operator==(const BitString&) const = default;

 private:
  std::vector<bool> bits_;
};

BitString elias_gamma(std::uint64_t t);
BitString elias_delta(std::uint64_t t);

// Parse one codeword starting at *pos and advance it. DecodeError on
// truncated or malformed input.
std::uint64_t elias_gamma_decode(const BitString& bits, std::size_t& pos);
std::uint64_t elias_delta_decode(const BitString& bits, std::size_t& pos);

// Whole-string decoders: the string must be exactly one codeword.
std::uint64_t elias_gamma_decode(const BitString& bits);
std::uint64_t elias_delta_decode(const BitString& bits);

}  // namespace mra
