#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mra/combinatorics.hpp"
#include "mra/errors.hpp"
#include "mra/codebook.hpp"
#include "mra/montecarlo.hpp"
#include "oracles.hpp"

using namespace mra;
using Seq = std::vector<Symbol>;

namespace {

std::vector<std::string> read_lines(const std::string& name) {
  std::ifstream in(std::string(MRA_TEST_DATA) + "/" + name);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

void check_dump(const CodebookStream& s, const std::string& file, std::uint64_t t_last) {
  const auto lines = read_lines(file);
  REQUIRE(lines.size() == 1 + t_last * s.n());
  CHECK(lines[0] == "t,position,symbol");
  std::size_t row = 1;
  for (std::uint64_t t = 1; t <= t_last; ++t) {
    const auto c = s.codeword(t);
    for (std::uint64_t u = 1; u <= s.n(); ++u, ++row) {
      const std::string expect =
          std::to_string(t) + "," + std::to_string(u) + "," + std::to_string(c[u - 1]);
      CHECK(lines[row] == expect);
    }
  }
}

}  // namespace

TEST_CASE("mixture spec validation") {
  const auto a = Alphabet::range(0, 2);
  CHECK_THROWS_AS(MixtureGeneratorSpec(a, {}), DomainError);
  CHECK_THROWS_AS(MixtureGeneratorSpec(a, {{0.5, {0.5, 0.5}}}), DomainError);
  CHECK_THROWS_AS(MixtureGeneratorSpec(a, {{1.0, {0.6, 0.5}}}), DomainError);
  CHECK_THROWS_AS(MixtureGeneratorSpec(a, {{1.0, {0.5, 0.25, 0.25}}}), DomainError);
  const MixtureGeneratorSpec g(a, {{0.25, {1.0, 0.0}}, {0.75, {0.5, 0.5}}});
  CHECK(g.probability(Seq{0, 0}) == doctest::Approx(0.25 + 0.75 * 0.25));
  CHECK(g.probability(Seq{1, 1}) == doctest::Approx(0.75 * 0.25));
}

TEST_CASE("urn generator examples") {
  const auto two = urn_generator(make_two_point(5));
  REQUIRE(two.components().size() == 2);
  for (const auto& c : two.components()) {
    CHECK(c.weight == doctest::Approx(0.5));
    CHECK(std::max(c.symbol_probabilities[0], c.symbol_probabilities[1]) == 1.0);
  }

  const auto sched = urn_generator(make_scheduling(4, 4).marginal());
  REQUIRE(sched.components().size() == 1);
  for (double q : sched.components()[0].symbol_probabilities) CHECK(q == doctest::Approx(0.25));

  const auto cat = urn_generator(make_categorization(std::vector<std::uint32_t>{3, 1, 2}));
  REQUIRE(cat.components().size() == 1);
  CHECK(cat.components()[0].symbol_probabilities[0] == doctest::Approx(0.5));
  CHECK(cat.components()[0].symbol_probabilities[1] == doctest::Approx(1.0 / 6));
  CHECK(cat.components()[0].symbol_probabilities[2] == doctest::Approx(1.0 / 3));
}

TEST_CASE("one urn component per support type") {
  const auto p = make_iid(std::vector<double>{0.5, 0.5}, 4);
  CHECK(urn_generator(p).components().size() == 5);
  const ExchangeableSource base(Alphabet::range(0, 2), 4,
                                TypeWeights{{Composition({2, 2}), 0.5},
                                            {Composition({1, 3}), 0.25},
                                            {Composition({3, 1}), 0.25}});
  const auto g = extended_urn_generator(ExtendableSource(base, 2));
  REQUIRE(g.components().size() == 3);
  double total = 0.0;
  for (const auto& c : g.components()) {
    total += c.weight;
    // Stored in lowest terms, so (2, 2) comes out as (1, 1) / 2.
    CHECK(4 % c.denominator == 0);
    for (std::size_t i = 0; i < c.counts.size(); ++i) {
      CHECK(c.symbol_probabilities[i] == doctest::Approx(double(c.counts[i]) / c.denominator));
    }
  }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("extended urn examples") {
  const auto s = extended_urn_generator(make_scheduling(5, 2));
  REQUIRE(s.components().size() == 1);
  CHECK(s.alphabet().size() == 5);
  for (double q : s.components()[0].symbol_probabilities) CHECK(q == doctest::Approx(0.2));

  const auto u = extended_urn_generator(make_urn_without_replacement(3, 2));
  REQUIRE(u.components().size() == 1);
  for (double q : u.components()[0].symbol_probabilities) CHECK(q == doctest::Approx(1.0 / 3));

  const auto same = extended_urn_generator(make_urn_without_replacement(3, 3));
  const auto direct = urn_generator(make_urn_without_replacement(3, 3).marginal());
  CHECK(same.components().size() == direct.components().size());
  CHECK(same.components()[0].symbol_probabilities == direct.components()[0].symbol_probabilities);
}

TEST_CASE("induced marginal examples") {
  const auto half = induced_marginal(
      iid_generator(Alphabet::range(0, 2), std::vector<double>{0.5, 0.5}), 2);
  for (const Seq& x : {Seq{0, 0}, Seq{0, 1}, Seq{1, 0}, Seq{1, 1}}) {
    CHECK(half.pmf(x) == doctest::Approx(0.25));
  }

  const auto q = induced_marginal(urn_generator(make_multinomial(2, 2)), 2);
  CHECK(q.pmf(Seq{1, 1}) == doctest::Approx(0.5));
  for (const Seq& x : {Seq{0, 0}, Seq{0, 2}, Seq{2, 0}, Seq{2, 2}}) {
    CHECK(q.pmf(x) == doctest::Approx(0.125));
  }
  for (const Seq& x : {Seq{0, 1}, Seq{1, 0}, Seq{1, 2}, Seq{2, 1}}) CHECK(q.pmf(x) == 0.0);

  const auto two = induced_marginal(urn_generator(make_two_point(3)), 3);
  CHECK(two.pmf(Seq{0, 0, 0}) == doctest::Approx(0.5));
  CHECK(two.pmf(Seq{1, 1, 1}) == doctest::Approx(0.5));
  CHECK(two.pmf(Seq{0, 1, 1}) == 0.0);
  CHECK(verify_exchangeable(two).ok());

  const auto wide = iid_generator(Alphabet::range(0, 10), std::vector<double>(10, 0.1));
  CHECK_THROWS_AS(induced_marginal(wide, 4000), CapabilityError);
}

TEST_CASE("induced marginal equals the direct mixture sum") {
  RandomStream rng(31);
  for (int i = 0; i < 20; ++i) {
    const auto p = oracle::random_source(rng, 2 + i % 3, 2 + i % 4);
    const auto g = urn_generator(p);
    const auto q = induced_marginal(g, p.k());
    CHECK(verify_exchangeable(q).ok());
    for_each_sequence(p.alphabet(), p.k(), [&](std::span<const Symbol> x) {
      CHECK(q.pmf(x) == doctest::Approx(oracle::mixture_probability(g, x)).epsilon(1e-11));
    });
  }
}

TEST_CASE("urn codebooks dominate the source by k!/k^k") {
  RandomStream rng(2);
  for (int i = 0; i < 40; ++i) {
    const std::uint32_t k = 1 + i % 5;
    const auto p = oracle::random_source(rng, 1 + i % 4, k);
    const auto q = induced_marginal(urn_generator(p), k);
    const double factor = std::exp2(log2_factorial(k) - k * std::log2(static_cast<double>(k)));
    for (const auto& [c, w] : p.type_weights()) {
      CHECK(q.weight(c) >= factor * w * (1 - 1e-12));
    }
  }
}

TEST_CASE("extended urn marginal is sampling with replacement from the base") {
  RandomStream rng(17);
  for (int i = 0; i < 12; ++i) {
    const std::uint32_t d = 2 + i % 5;  // up to 6
    const auto base = oracle::random_source(rng, 2 + i % 2, d);
    const std::uint32_t k = 1 + i % d;
    const ExtendableSource ext(base, k);
    const auto q = induced_marginal(extended_urn_generator(ext), k);
    const auto table = oracle::table_of(base);
    for_each_sequence(base.alphabet(), k, [&](std::span<const Symbol> x) {
      double expect = 0.0;
      for (const auto& [s, v] : table) {
        double m = v;
        for (Symbol xi : x) {
          m *= static_cast<double>(std::count(s.begin(), s.end(), xi)) / d;
        }
        expect += m;
      }
      CHECK(q.pmf(x) == doctest::Approx(expect).epsilon(1e-11));
    });
  }
}

TEST_CASE("codewords are deterministic and lazy entries agree") {
  const auto g = urn_generator(make_multinomial(3, 3));
  const CodebookStream s(g, 40, 123);
  const CodebookStream again(g, 40, 123);
  const CodebookStream other(g, 40, 124);
  bool any_diff = false;
  for (std::uint64_t t = 1; t <= 50; ++t) {
    const auto c = s.codeword(t);
    CHECK(c.size() == 40);
    CHECK(c == again.codeword(t));
    any_diff = any_diff || c != other.codeword(t);
    std::vector<std::uint64_t> all(40);
    std::iota(all.begin(), all.end(), 1);
    CHECK(s.entries(t, all) == c);
    const std::vector<std::uint64_t> some{17, 3, 40};
    CHECK(s.entries(t, some) == Seq{c[16], c[2], c[39]});
  }
  CHECK(any_diff);
}

TEST_CASE("point-mass codebooks") {
  const MixtureGeneratorSpec g(Alphabet({4, 8}), {{1.0, {0.0, 1.0}}});
  const CodebookStream s(g, 6, 1);
  for (std::uint64_t t = 1; t <= 5; ++t) CHECK(s.codeword(t) == Seq(6, 8));
}

TEST_CASE("entries and codeword argument checks") {
  const CodebookStream s(iid_generator(Alphabet::range(0, 2), std::vector<double>{0.5, 0.5}),
                         10, 1);
  CHECK_THROWS_AS(s.codeword(0), DomainError);
  CHECK_THROWS_AS(s.entries(1, std::vector<std::uint64_t>{0}), DomainError);
  CHECK_THROWS_AS(s.entries(1, std::vector<std::uint64_t>{11}), DomainError);
  CHECK_THROWS_AS(s.entries(1, std::vector<std::uint64_t>{2, 2}), DomainError);
  CHECK_THROWS_AS(CodebookStream(s.spec(), 0, 1), DomainError);
  // n = 10^6 is fine because only the requested entries are drawn.
  const CodebookStream huge(s.spec(), 1000000, 9);
  CHECK(huge.entries(3, std::vector<std::uint64_t>{999999}).size() == 1);
}

TEST_CASE("single-component symbol frequencies match q within 3 sigma") {
  const std::vector<double> q{0.2, 0.5, 0.3};
  const CodebookStream s(iid_generator(Alphabet::range(0, 3), q), 5, 77);
  std::vector<double> freq(3, 0.0);
  const int draws = 10000;
  for (std::uint64_t t = 1; t <= static_cast<std::uint64_t>(draws); ++t) {
    ++freq[s.entries(t, std::vector<std::uint64_t>{1})[0]];
  }
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(freq[i] - draws * q[i]) <= 3 * std::sqrt(draws * q[i] * (1 - q[i])));
  }
}

TEST_CASE("entry pairs at different positions have the same law") {
  const auto g = urn_generator(make_multinomial(2, 2));
  const CodebookStream s(g, 10, 5);
  std::map<std::uint64_t, std::uint64_t> a, b;
  for (std::uint64_t t = 1; t <= 100000; ++t) {
    const auto x = s.entries(t, std::vector<std::uint64_t>{2, 7});
    const auto y = s.entries(t, std::vector<std::uint64_t>{1, 3});
    ++a[1 + static_cast<std::uint64_t>(x[0] * 3 + x[1])];
    ++b[1 + static_cast<std::uint64_t>(y[0] * 3 + y[1])];
  }
  CHECK(chi_square_two_sample(a, b).p_value > 0.001);
}

TEST_CASE("codeword dumps match the independent reference") {
  check_dump(CodebookStream(iid_generator(Alphabet::range(0, 2), std::vector<double>{0.7, 0.3}),
                            8, 42),
             "codewords_bernoulli.csv", 16);
  const MixtureGeneratorSpec mix(Alphabet::range(0, 3),
                                 {{0.5, {0.0, 1.0, 0.0}}, {0.5, {0.5, 0.0, 0.5}}});
  check_dump(CodebookStream(mix, 6, 0x243F6A8885A308D3ULL), "codewords_mixture.csv", 32);
}
