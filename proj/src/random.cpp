#include "mra/random.hpp"

#include <algorithm>

#include "mra/errors.hpp"

namespace mra {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

inline PhiloxKey split_key(std::uint64_t key) {
  return {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::array<std::uint64_t, 2> keyed_block(std::uint64_t key, std::uint64_t a,
                                         std::uint32_t b, Domain domain) {
  const PhiloxCounter ctr{static_cast<std::uint32_t>(a),
                          static_cast<std::uint32_t>(a >> 32), b,
                          static_cast<std::uint32_t>(domain)};
  const PhiloxCounter out = philox4x32_10(ctr, split_key(key));
  return {(static_cast<std::uint64_t>(out[0]) << 32) | out[1],
          (static_cast<std::uint64_t>(out[2]) << 32) | out[3]};
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return keyed_block(master, index, 0, Domain::kDerive)[0];
}

std::uint64_t RandomStream::next_u64() {
  if (used_ == 2) {
    buffer_ = keyed_block(seed_, block_++, 0, Domain::kStream);
    used_ = 0;
  }
  return buffer_[used_++];
}

std::uint64_t RandomStream::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw DomainError("uniform_below: bound must be positive");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const unsigned __int128 m =
        static_cast<unsigned __int128>(next_u64()) * bound;
    if (static_cast<std::uint64_t>(m) >= threshold) {
      return static_cast<std::uint64_t>(m >> 64);
    }
  }
}

DiscreteSampler::DiscreteSampler(std::span<const double> probabilities) {
  if (probabilities.empty()) throw DomainError("DiscreteSampler: empty");
  cumulative_.resize(probabilities.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (!(probabilities[i] >= 0.0)) {
      throw DomainError("DiscreteSampler: negative or NaN probability");
    }
    acc += probabilities[i];
    cumulative_[i] = acc;
    if (probabilities[i] > 0.0) last_positive_ = i;
  }
  if (!(acc > 0.0)) throw DomainError("DiscreteSampler: zero total mass");
  for (auto& c : cumulative_) c /= acc;
}

std::size_t DiscreteSampler::operator()(double u) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) return last_positive_;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

}  // namespace mra
