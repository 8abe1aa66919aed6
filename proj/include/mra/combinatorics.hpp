#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mra {

// Enumeration guards shared by every desk-scale routine.
inline constexpr double kMaxSequences = 1e7;     // |X|^k
inline constexpr double kMaxCompositions = 1e6;  // C(k+|X|-1, |X|-1)

double log2_factorial(std::uint64_t n);
double log2_binomial(std::uint64_t n, std::uint64_t r);

// log2 of k! / (c_0! ... c_{m-1}!) with k = sum(c).
double log2_multinomial(std::span<const std::uint32_t> counts);

// Exact multinomial coefficient; throws CapabilityError on uint64 overflow.
std::uint64_t multinomial_exact(std::span<const std::uint32_t> counts);
std::uint64_t binomial_exact(std::uint64_t n, std::uint64_t r);

// log2(d^k / d(d-1)...(d-k+1)); requires k <= d.
double log2_power_over_falling(std::uint64_t d, std::uint64_t k);

// Number of compositions of `total` into `parts` nonnegative parts, as a
// double so callers can compare against the caps without overflow.
double composition_count(std::uint64_t total, std::uint64_t parts);

// Visit every composition of `total` into `parts` parts in colexicographic
// order (last coordinate most significant, ascending).
void for_each_composition(
    std::uint32_t total, std::size_t parts,
    const std::function<void(std::span<const std::uint32_t>)>& visit);

// Visit every sigma with sigma <= bound componentwise and sum(sigma) = total.
void for_each_bounded_composition(
    std::uint32_t total, std::span<const std::uint32_t> bound,
    const std::function<void(std::span<const std::uint32_t>)>& visit);

// true if a precedes b in colexicographic order.
bool colex_less(std::span<const std::uint32_t> a,
                std::span<const std::uint32_t> b);

}  // namespace mra
