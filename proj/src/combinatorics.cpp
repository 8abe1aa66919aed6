#include "mra/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "mra/errors.hpp"

namespace mra {

namespace {

constexpr double kInvLn2 = 1.0 / std::numbers::ln2;

void composition_step(std::uint32_t remaining, std::size_t index,
                      std::vector<std::uint32_t>& current,
                      const std::function<void(std::span<const std::uint32_t>)>& visit) {
  if (index == 0) {
    current[0] = remaining;
    visit(current);
    return;
  }
  for (std::uint32_t c = 0; c <= remaining; ++c) {
    current[index] = c;
    composition_step(remaining - c, index - 1, current, visit);
  }
}

void bounded_step(std::uint32_t remaining, std::size_t index,
                  std::span<const std::uint32_t> bound,
                  std::vector<std::uint32_t>& current,
                  const std::function<void(std::span<const std::uint32_t>)>& visit) {
  if (index == 0) {
    if (remaining <= bound[0]) {
      current[0] = remaining;
      visit(current);
    }
    return;
  }
  // The remaining coordinates can absorb at most `room` units.
  std::uint64_t room = 0;
  for (std::size_t i = 0; i < index; ++i) room += bound[i];
  const std::uint32_t hi = std::min(bound[index], remaining);
  for (std::uint32_t c = 0; c <= hi; ++c) {
    if (remaining - c > room) continue;
    current[index] = c;
    bounded_step(remaining - c, index - 1, bound, current, visit);
  }
}

}  // namespace

double log2_factorial(std::uint64_t n) {
  return std::lgamma(static_cast<double>(n) + 1.0) * kInvLn2;
}

double log2_binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) throw DomainError("log2_binomial: r > n");
  return log2_factorial(n) - log2_factorial(r) - log2_factorial(n - r);
}

double log2_multinomial(std::span<const std::uint32_t> counts) {
  std::uint64_t total = 0;
  double acc = 0.0;
  for (auto c : counts) {
    total += c;
    acc -= log2_factorial(c);
  }
  return acc + log2_factorial(total);
}

std::uint64_t binomial_exact(std::uint64_t n, std::uint64_t r) {
  if (r > n) throw DomainError("binomial_exact: r > n");
  r = std::min(r, n - r);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    // acc holds C(n-r+i-1, i-1) here, so the division is exact.
    acc = acc * (n - r + i) / i;
    if (acc > std::numeric_limits<std::uint64_t>::max()) {
      throw CapabilityError("binomial_exact: overflow");
    }
  }
  return static_cast<std::uint64_t>(acc);
}

std::uint64_t multinomial_exact(std::span<const std::uint32_t> counts) {
  unsigned __int128 acc = 1;
  std::uint64_t running = 0;
  for (auto c : counts) {
    running += c;
    acc *= binomial_exact(running, c);
    if (acc > std::numeric_limits<std::uint64_t>::max()) {
      throw CapabilityError("multinomial_exact: overflow");
    }
  }
  return static_cast<std::uint64_t>(acc);
}

double log2_power_over_falling(std::uint64_t d, std::uint64_t k) {
  if (k > d) throw DomainError("log2_power_over_falling: k > d");
  if (d == 0) return 0.0;
  const double dd = static_cast<double>(d);
  if (k <= 4096) {
    // -sum log2(1 - i/d) avoids the cancellation between two large lgammas.
    double acc = 0.0;
    for (std::uint64_t i = 1; i < k; ++i) {
      acc -= std::log1p(-static_cast<double>(i) / dd);
    }
    return acc * kInvLn2;
  }
  const double falling =
      (std::lgamma(dd + 1.0) - std::lgamma(dd - static_cast<double>(k) + 1.0)) *
      kInvLn2;
  return static_cast<double>(k) * std::log2(dd) - falling;
}

double composition_count(std::uint64_t total, std::uint64_t parts) {
  if (parts == 0) return total == 0 ? 1.0 : 0.0;
  return std::round(std::exp2(log2_binomial(total + parts - 1, parts - 1)));
}

void for_each_composition(
    std::uint32_t total, std::size_t parts,
    const std::function<void(std::span<const std::uint32_t>)>& visit) {
  if (parts == 0) {
    if (total == 0) visit({});
    return;
  }
  std::vector<std::uint32_t> current(parts, 0);
  composition_step(total, parts - 1, current, visit);
}

void for_each_bounded_composition(
    std::uint32_t total, std::span<const std::uint32_t> bound,
    const std::function<void(std::span<const std::uint32_t>)>& visit) {
  if (bound.empty()) {
    if (total == 0) visit({});
    return;
  }
  std::vector<std::uint32_t> current(bound.size(), 0);
  bounded_step(total, bound.size() - 1, bound, current, visit);
}

bool colex_less(std::span<const std::uint32_t> a,
                std::span<const std::uint32_t> b) {
  std::size_t i = std::max(a.size(), b.size());
  while (i-- > 0) {
    const std::uint32_t ai = i < a.size() ? a[i] : 0;
    const std::uint32_t bi = i < b.size() ? b[i] : 0;
    if (ai != bi) return ai < bi;
  }
  return false;
}

}  // namespace mra
