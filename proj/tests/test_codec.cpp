#include <doctest.h>

#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mra/codec.hpp"
#include "mra/errors.hpp"
#include "mra/montecarlo.hpp"

using namespace mra;
using Seq = std::vector<Symbol>;

namespace {

std::vector<std::uint64_t> random_pattern(RandomStream& rng, std::uint64_t n, std::size_t k) {
  std::vector<std::uint64_t> all(n);
  std::iota(all.begin(), all.end(), 1);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(all[i], all[i + rng.uniform_below(n - i)]);
  }
  all.resize(k);
  return all;
}

std::string hex(std::span<const std::uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (auto b : bytes) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

}  // namespace

TEST_CASE("activity pattern validation") {
  CHECK_NOTHROW(ActivityPattern({3, 1}, 3));
  CHECK_THROWS_AS(ActivityPattern({0}, 3), DomainError);
  CHECK_THROWS_AS(ActivityPattern({4}, 3), DomainError);
  CHECK_THROWS_AS(ActivityPattern({2, 2}, 3), DomainError);
}

TEST_CASE("point mass codebook encodes at t = 1 and decodes the point") {
  const MixtureGeneratorSpec g(Alphabet::range(0, 3), {{1.0, {0.0, 0.0, 1.0}}});
  const CodebookStream s(g, 10, 4);
  const Seq x{2, 2, 2};
  const ActivityPattern a({9, 1, 4}, 10);
  CHECK(encode(s, x, a).t == 1);
  for (std::uint64_t u = 1; u <= 10; ++u) CHECK(decode(s, MatchIndex{1}, u) == 2);
  CHECK_THROWS_AS(decode(s, MatchIndex{1}, 11), DomainError);
  CHECK_THROWS_AS(decode(s, MatchIndex{1}, 0), DomainError);
}

TEST_CASE("mismatched support is unencodable") {
  const MixtureGeneratorSpec g(Alphabet::range(0, 2), {{1.0, {1.0, 0.0}}});
  const CodebookStream s(g, 5, 1);
  CHECK_THROWS_AS(encode(s, Seq{0, 1}, ActivityPattern({1, 2}, 5)), UnencodableError);
  CHECK(match_probability(s, Seq{0, 1}) == 0.0);
}

TEST_CASE("budget exhaustion and early abort") {
  const auto g = iid_generator(Alphabet::range(0, 4), std::vector<double>(4, 0.25));
  const CodebookStream s(g, 20, 3);
  const Seq x(10, 1);  // q = 4^-10
  const ActivityPattern a({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 20);

  try {
    encode(s, x, a, EncodeBudget{1000, true});
    FAIL("expected early abort");
  } catch (const BudgetExhausted& e) {
    CHECK(e.aborted_early());
    CHECK(e.t_max() == 1000);
    CHECK(e.match_probability() == doctest::Approx(std::pow(0.25, 10)));
  }
  try {
    encode(s, x, a, EncodeBudget{1000, false});
    FAIL("expected exhaustion");
  } catch (const BudgetExhausted& e) {
    CHECK_FALSE(e.aborted_early());
  }
  // t_max = 1 with early abort off scans exactly one codeword.
  const Seq first = s.entries(1, a.active());
  CHECK(encode(s, first, a, EncodeBudget{1, false}).t == 1);
}

TEST_CASE("round trip on random sources and patterns") {
  const auto g = urn_generator(make_multinomial(3, 4));
  const auto p = make_multinomial(3, 4);
  RandomStream rng(2718);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const CodebookStream s(g, 30, rng.next_u64());
    const auto x = p.sample(rng);
    const ActivityPattern a(random_pattern(rng, 30, 4), 30);
    const auto t = encode(s, x, a);
    for (std::size_t i = 0; i < x.size(); ++i) mismatches += decode(s, t, a[i]) != x[i];
    // Nothing earlier matched.
    if (t.t > 1) CHECK(s.entries(t.t - 1, a.active()) != x);
  }
  CHECK(mismatches == 0);
}

TEST_CASE("dropping active users never increases the match index") {
  const auto g = urn_generator(make_iid(std::vector<double>{0.6, 0.4}, 5));
  const auto p = make_iid(std::vector<double>{0.6, 0.4}, 5);
  RandomStream rng(99);
  for (int trial = 0; trial < 2000; ++trial) {
    const CodebookStream s(g, 12, rng.next_u64());
    const auto x = p.sample(rng);
    const auto users = random_pattern(rng, 12, 5);
    std::uint64_t previous = encode(s, x, ActivityPattern(users, 12)).t;
    for (std::size_t k = 4; k >= 1; --k) {
      const std::vector<std::uint64_t> fewer(users.begin(), users.begin() + k);
      const Seq xs(x.begin(), x.begin() + k);
      const auto t = encode(s, xs, ActivityPattern(fewer, 12)).t;
      CHECK(t <= previous);
      previous = t;
    }
  }
}

TEST_CASE("random-k encoder edge cases") {
  const auto g = iid_generator(Alphabet::range(0, 2), std::vector<double>{0.5, 0.5});
  const CodebookStream s(g, 6, 10);
  CHECK(encode_random_k(s, Seq{}, ActivityPattern({}, 6)).t == 1);
  CHECK_THROWS_AS(encode(s, Seq{}, ActivityPattern({}, 6)), DomainError);
  // K = n: the whole codeword must match.
  const auto target = s.codeword(7);
  const ActivityPattern all({1, 2, 3, 4, 5, 6}, 6);
  const auto t = encode_random_k(s, target, all).t;
  CHECK(t <= 7);
  CHECK(s.codeword(t) == target);
  CHECK_THROWS_AS(encode_random_k(s, Seq{0, 1}, ActivityPattern({1}, 6)), DomainError);
}

TEST_CASE("two-point source: Pr(T = 1) = 1/2 over seeds") {
  const auto g = urn_generator(make_two_point(4));
  const Seq zeros(4, 0);
  const ActivityPattern a({1, 2, 3, 4}, 8);
  int ones = 0;
  const int seeds = 10000;
  for (int i = 0; i < seeds; ++i) {
    ones += encode(CodebookStream(g, 8, derive_seed(1, i)), zeros, a).t == 1;
  }
  CHECK(std::abs(ones - seeds / 2.0) <= 4 * std::sqrt(seeds * 0.25));
}

TEST_CASE("given x, T is geometric with parameter q(x)") {
  const auto g = urn_generator(make_multinomial(2, 2));
  const Seq x{0, 2};  // q = 1/8
  const ActivityPattern a({3, 5}, 6);
  CHECK(match_probability(CodebookStream(g, 6, 0), x) == doctest::Approx(0.125));
  std::map<std::uint64_t, std::uint64_t> counts;
  for (int i = 0; i < 20000; ++i) ++counts[encode(CodebookStream(g, 6, derive_seed(3, i)), x, a).t];
  const GeometricMixture law({{1.0, 0.125}});
  CHECK(chi_square_gof(counts, law).p_value > 0.001);
}

TEST_CASE("Elias code examples and lengths") {
  CHECK(elias_gamma(1).str() == "1");
  CHECK(elias_gamma(5).str() == "00101");
  CHECK(elias_delta(1).str() == "1");
  CHECK(elias_delta(2).str() == "0100");
  CHECK(elias_delta(17).str() == "001010001");
  CHECK_THROWS_AS(elias_gamma(0), DomainError);
  CHECK_THROWS_AS(elias_delta(0), DomainError);
  for (std::uint64_t t : {1ULL, 2ULL, 3ULL, 1000ULL, 1ULL << 40, ~0ULL}) {
    const auto floor_log = static_cast<std::size_t>(std::bit_width(t) - 1);
    CHECK(elias_gamma(t).size() == 2 * floor_log + 1);
    CHECK(elias_gamma_decode(elias_gamma(t)) == t);
    CHECK(elias_delta_decode(elias_delta(t)) == t);
  }
}

TEST_CASE("malformed bit strings are rejected") {
  CHECK_THROWS_AS(elias_gamma_decode(BitString("000")), DecodeError);
  CHECK_THROWS_AS(elias_gamma_decode(BitString("")), DecodeError);
  CHECK_THROWS_AS(elias_gamma_decode(BitString("0010")), DecodeError);
  CHECK_THROWS_AS(elias_gamma_decode(BitString("11")), DecodeError);  // trailing bit
  CHECK_THROWS_AS(elias_delta_decode(BitString("011")), DecodeError);
  CHECK_THROWS_AS(BitString("01x"), DomainError);
  // 65 leading zeros cannot be a 64-bit value.
  CHECK_THROWS_AS(elias_gamma_decode(BitString(std::string(65, '0') + "1")), DecodeError);
}

TEST_CASE("concatenated codes parse uniquely") {
  RandomStream rng(123456);
  for (int seq = 0; seq < 100000; ++seq) {
    const std::size_t len = 1 + rng.uniform_below(4);
    std::vector<std::uint64_t> values(len);
    BitString g, d;
    for (auto& v : values) {
      // Log-uniform magnitudes so short and long codewords mix.
      const auto bits = 1 + rng.uniform_below(63);
      v = (rng.next_u64() >> (64 - bits)) | (std::uint64_t{1} << (bits - 1));
      g.append(elias_gamma(v));
      d.append(elias_delta(v));
    }
    std::size_t pg = 0, pd = 0;
    for (auto v : values) {
      REQUIRE(elias_gamma_decode(g, pg) == v);
      REQUIRE(elias_delta_decode(d, pd) == v);
    }
    CHECK(pg == g.size());
    CHECK(pd == d.size());
  }
}

TEST_CASE("bit packing") {
  const BitString b("1011000011");
  const auto bytes = b.pack();
  REQUIRE(bytes.size() == 2);
  CHECK(bytes[0] == 0xB0);
  CHECK(bytes[1] == 0xC0);
  CHECK(BitString::unpack(bytes, 10) == b);
  CHECK_THROWS_AS(BitString::unpack(bytes, 17), DecodeError);
  CHECK_THROWS_AS(BitString::unpack(bytes, 8), DecodeError);
  const std::vector<std::uint8_t> dirty{0xB0, 0xC1};
  CHECK_THROWS_AS(BitString::unpack(dirty, 10), DecodeError);
  CHECK(BitString().pack().empty());
}

TEST_CASE("conformance vectors for t = 1..64") {
  std::ifstream in(std::string(MRA_TEST_DATA) + "/elias_vectors.csv");
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,gamma,delta,gamma_bits,delta_bits,delta_packed_hex");
  std::uint64_t expected_t = 1;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string t, gamma, delta, gbits, dbits, packed;
    std::getline(ss, t, ',');
    std::getline(ss, gamma, ',');
    std::getline(ss, delta, ',');
    std::getline(ss, gbits, ',');
    std::getline(ss, dbits, ',');
    std::getline(ss, packed, ',');
    const auto v = std::stoull(t);
    CHECK(v == expected_t++);
    CHECK(elias_gamma(v).str() == gamma);
    CHECK(elias_delta(v).str() == delta);
    CHECK(elias_gamma(v).size() == std::stoull(gbits));
    CHECK(elias_delta(v).size() == std::stoull(dbits));
    CHECK(hex(elias_delta(v).pack()) == packed);
  }
  CHECK(expected_t == 65);
}
