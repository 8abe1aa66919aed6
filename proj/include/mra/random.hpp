#pragma once

// Counter-based randomness. Every random quantity in the library is a pure
// function of a 64-bit key and a 128-bit counter evaluated with
// Philox4x32-10 (Salmon et al., SC'11), so codewords, trial seeds and
// samples are reproducible across runs, platforms and worker counts.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace mra {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

// Domain tags occupy the last counter word so that distinct uses of the same
// key never share a counter.
enum class Domain : std::uint32_t {
  kCodewordComponent = 0,
  kCodewordEntry = 1,
  kStream = 2,
  kDerive = 3,
};

// Two 64-bit outputs for (key, a, b, domain); a is 64-bit, b is 32-bit.
std::array<std::uint64_t, 2> keyed_block(std::uint64_t key, std::uint64_t a,
                                         std::uint32_t b, Domain domain);

// Child seed for index `index` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// [0, 1) with 53 random bits.
inline double to_unit_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Sequential stream over consecutive counters of one key. A copy continues
// with exactly the same outputs as the original, which is what "seed-state"
// means throughout the library.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64();
  double uniform01() { return to_unit_double(next_u64()); }
  // Uniform on [0, bound) by Lemire's multiply-and-reject; bound >= 1.
  std::uint64_t uniform_below(std::uint64_t bound);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int used_ = 2;
};

// Inverse-CDF lookup over a precomputed cumulative table. Zero-probability
// categories have empty intervals and are never returned.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  explicit DiscreteSampler(std::span<const double> probabilities);

  std::size_t operator()(double u) const;
  std::size_t size() const noexcept { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
  std::size_t last_positive_ = 0;
};

}  // namespace mra
