#include "mra/codec.hpp"

#include <bit>
#include <set>

#include "mra/errors.hpp"

namespace mra {

ActivityPattern::ActivityPattern(std::vector<std::uint64_t> active, std::uint64_t n)
    : active_(std::move(active)), n_(n) {
  std::set<std::uint64_t> seen;
  for (auto u : active_) {
    if (u == 0 || u > n_) {
      throw DomainError("ActivityPattern: user " + std::to_string(u) + " outside [1, " +
                        std::to_string(n_) + "]");
    }
    if (!seen.insert(u).second) {
      throw DomainError("ActivityPattern: duplicate user " + std::to_string(u));
    }
  }
}

double match_probability(const CodebookStream& stream, std::span<const Symbol> x) {
  return stream.spec().probability(x);
}

MatchIndex encode_random_k(const CodebookStream& stream, std::span<const Symbol> x,
                           const ActivityPattern& a, const EncodeBudget& budget) {
  if (x.size() != a.size()) {
    throw DomainError("encode: |x| = " + std::to_string(x.size()) + " but |a| = " +
                      std::to_string(a.size()));
  }
  if (a.n() != stream.n()) throw DomainError("encode: pattern and codebook disagree on n");
  if (budget.t_max == 0) throw DomainError("encode: t_max must be >= 1");
  if (x.empty()) return {1};

  const auto idx = stream.alphabet().indices_of(x);
  const auto& spec = stream.spec();
  const double q = spec.sequence_probability(idx);
  if (q == 0.0) throw UnencodableError("encode: q(x) = 0 under the codebook mixture");
  if (budget.early_abort &&
      q * static_cast<double>(budget.t_max) < EncodeBudget::kEarlyAbortThreshold) {
    throw BudgetExhausted(budget.t_max, q, true);
  }

  // Components that give x zero probability can be skipped without drawing
  // any entry.
  std::vector<bool> viable(spec.components().size());
  for (std::size_t j = 0; j < viable.size(); ++j) {
    bool ok = spec.components()[j].weight > 0.0;
    for (std::size_t i = 0; ok && i < idx.size(); ++i) {
      ok = spec.components()[j].symbol_probabilities[idx[i]] > 0.0;
    }
    viable[j] = ok;
  }

  for (std::uint64_t t = 1; t <= budget.t_max; ++t) {
    const std::size_t j = stream.component(t);
    if (!viable[j]) continue;
    bool match = true;
    for (std::size_t i = 0; i < idx.size() && match; ++i) {
      match = stream.entry_index(t, j, a[i]) == idx[i];
    }
    if (match) return {t};
  }
  throw BudgetExhausted(budget.t_max, q, false);
}

MatchIndex encode(const CodebookStream& stream, std::span<const Symbol> x,
                  const ActivityPattern& a, const EncodeBudget& budget) {
  if (x.empty()) throw DomainError("encode: k must be positive");
  return encode_random_k(stream, x, a, budget);
}

Symbol decode(const CodebookStream& stream, MatchIndex t, std::uint64_t u) {
  if (t.t == 0) throw DomainError("decode: t must be >= 1");
  if (u == 0 || u > stream.n()) {
    throw DomainError("decode: user " + std::to_string(u) + " outside [1, " +
                      std::to_string(stream.n()) + "]");
  }
  const std::uint64_t pos[1] = {u};
  return stream.entries(t.t, pos)[0];
}

// ---------------------------------------------------------------- BitString

BitString::BitString(std::string_view bits) {
  bits_.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') throw DomainError("BitString: expected '0' or '1'");
    bits_.push_back(c == '1');
  }
}

void BitString::append(const BitString& other) {
  bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
}

std::string BitString::str() const {
  std::string s;
  s.reserve(bits_.size());
  for (bool b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

std::vector<std::uint8_t> BitString::pack() const {
  std::vector<std::uint8_t> out((bits_.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

BitString BitString::unpack(std::span<const std::uint8_t> bytes, std::size_t bit_length) {
  if (bytes.size() != (bit_length + 7) / 8) {
    throw DecodeError("unpack: byte count does not match bit length");
  }
  BitString out;
  for (std::size_t i = 0; i < bit_length; ++i) {
    out.push_back((bytes[i / 8] >> (7 - i % 8)) & 1u);
  }
  for (std::size_t i = bit_length; i < bytes.size() * 8; ++i) {
    if ((bytes[i / 8] >> (7 - i % 8)) & 1u) throw DecodeError("unpack: nonzero padding");
  }
  return out;
}

// ---------------------------------------------------------------- Elias codes

namespace {

void append_binary(BitString& out, std::uint64_t value, int width) {
  for (int i = width - 1; i >= 0; --i) out.push_back((value >> i) & 1u);
}

std::uint64_t read_binary(const BitString& bits, std::size_t& pos, int width) {
  if (bits.size() - pos < static_cast<std::size_t>(width)) {
    throw DecodeError("truncated integer code");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v = (v << 1) | bits[pos++];
  return v;
}

}  // namespace

BitString elias_gamma(std::uint64_t t) {
  if (t == 0) throw DomainError("elias_gamma: t must be >= 1");
  const int n = std::bit_width(t) - 1;
  BitString out;
  for (int i = 0; i < n; ++i) out.push_back(false);
  append_binary(out, t, n + 1);
  return out;
}

BitString elias_delta(std::uint64_t t) {
  if (t == 0) throw DomainError("elias_delta: t must be >= 1");
  const int n = std::bit_width(t) - 1;
  BitString out = elias_gamma(static_cast<std::uint64_t>(n) + 1);
  append_binary(out, t, n);
  return out;
}

std::uint64_t elias_gamma_decode(const BitString& bits, std::size_t& pos) {
  int zeros = 0;
  while (pos < bits.size() && !bits[pos]) {
    ++zeros;
    ++pos;
    if (zeros > 63) throw DecodeError("elias_gamma: value exceeds 64 bits");
  }
  if (pos >= bits.size()) throw DecodeError("elias_gamma: missing terminating one");
  return read_binary(bits, pos, zeros + 1);
}

std::uint64_t elias_delta_decode(const BitString& bits, std::size_t& pos) {
  const std::uint64_t len = elias_gamma_decode(bits, pos);
  if (len > 64) throw DecodeError("elias_delta: value exceeds 64 bits");
  const int n = static_cast<int>(len) - 1;
  const std::uint64_t low = read_binary(bits, pos, n);
  return n == 0 ? 1 : ((std::uint64_t{1} << n) | low);
}

std::uint64_t elias_gamma_decode(const BitString& bits) {
  std::size_t pos = 0;
  const auto v = elias_gamma_decode(bits, pos);
  if (pos != bits.size()) throw DecodeError("elias_gamma: trailing bits");
  return v;
}

std::uint64_t elias_delta_decode(const BitString& bits) {
  std::size_t pos = 0;
  const auto v = elias_delta_decode(bits, pos);
  if (pos != bits.size()) throw DecodeError("elias_delta: trailing bits");
  return v;
}

}  // namespace mra
