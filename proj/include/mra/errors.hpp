#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mra {

// Invalid argument: symbol outside the alphabet, wrong length, bad parameters.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A desk-scale enumeration cap would be exceeded.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed bit string handed to an integer-code decoder.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// q(x) = 0 for some x on the support of p, so D(p||q) and E[T] are infinite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The codebook assigns probability zero to the requested source symbols.
class UnencodableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No matching codeword within the search budget.
class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted(std::uint64_t t_max, double match_probability,
                  bool aborted_early)
      : std::runtime_error(describe(t_max, match_probability, aborted_early)),
        t_max_(t_max),
        match_probability_(match_probability),
        aborted_early_(aborted_early) {}

  std::uint64_t t_max() const noexcept { return t_max_; }
  double match_probability() const noexcept { return match_probability_; }
  bool aborted_early() const noexcept { return aborted_early_; }

 private:
  static std::string describe(std::uint64_t t_max, double q, bool early) {
    std::string s = early ? "expected budget exhaustion (not scanned): "
                          : "no matching codeword: ";
    s += "t_max=" + std::to_string(t_max) + " q(x)=" + std::to_string(q);
    return s;
  }

  std::uint64_t t_max_;
  double match_probability_;
  bool aborted_early_;
};

// An active user decoded the wrong symbol. Always a bug.
class DecodeMismatch : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mra
