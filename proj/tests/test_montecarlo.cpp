#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "mra/errors.hpp"
#include "mra/montecarlo.hpp"

using namespace mra;

namespace {

TrialPlan iid_plan(std::vector<double> p, std::uint32_t k, std::uint64_t n, std::size_t trials,
                   std::uint64_t seed) {
  const auto a = Alphabet::range(0, p.size());
  return TrialPlan{"iid", make_iid(a, p, k), std::nullopt, iid_generator(a, p), n, trials, seed};
}

SuiteCase find_case(const std::string& name) {
  for (auto& c : default_suite()) {
    if (c.name == name) return c;
  }
  FAIL("no suite case " << name);
  throw;
}

}  // namespace

TEST_CASE("point-mass source always matches at t = 1") {
  const Alphabet a = Alphabet::range(0, 2);
  TrialPlan plan{"point", make_iid(a, std::vector<double>{1.0, 0.0}, 3), std::nullopt,
                 iid_generator(a, std::vector<double>{1.0, 0.0}), 20, 500, 1};
  const auto s = run(plan);
  CHECK(s.successes == 500);
  CHECK(s.mean_log_T == 0.0);
  CHECK(s.max_T == 1);
  CHECK(s.t_counts.size() == 1);
  const auto gof = gof_match_index(plan, exact_match_law(plan));
  CHECK(gof.statistic == 0.0);
  CHECK(gof.p_value == 1.0);
}

TEST_CASE("Bernoulli(1/2), k = 1: mean log T matches the exact value") {
  auto plan = iid_plan({0.5, 0.5}, 1, 10, 100000, 77);
  plan.workers = 4;
  const auto s = run(plan);
  CHECK(s.failures() == 0);
  const double exact = 0.732649482117484;
  CHECK(std::abs(s.mean_log_T - exact) <= 3 * s.mean_log_T_stderr);
  CHECK(s.mean_log_T_stderr > 0.0);
  CHECK(s.plugin_HT_miller_madow > s.plugin_HT);
  CHECK(std::abs(s.plugin_HT - 2.0) < 0.02);
}

TEST_CASE("summaries do not depend on the worker count") {
  for (const auto& c : default_suite()) {
    auto one = make_plan(c, 3000, 12345, 1);
    auto many = make_plan(c, 3000, 12345, 7);
    const auto a = run(one);
    const auto b = run(many);
    CHECK(a.t_counts == b.t_counts);
    CHECK(a.mean_log_T == b.mean_log_T);
    CHECK(a.mean_log_T_stderr == b.mean_log_T_stderr);
    CHECK(a.mean_delta_bits == b.mean_delta_bits);
    CHECK(a.plugin_HT == b.plugin_HT);
    const auto c2 = run(make_plan(c, 3000, 12346, 1));
    CHECK(c2.t_counts != a.t_counts);
  }
}

TEST_CASE("full default suite decodes without failures") {
  for (const auto& c : default_suite()) {
    const auto s = run(make_plan(c, 5000, 99, 4));
    CHECK(s.failures() == 0);
    CHECK(s.successes == 5000);
  }
}

TEST_CASE("goodness of fit and its power") {
  const auto c = find_case("two-point-k4");
  const auto plan = make_plan(c, 100000, 5, 4);
  const auto law = exact_match_law(plan);
  const auto s = run(plan);
  const auto good = chi_square_gof(s.t_counts, law);
  CHECK(good.p_value > 0.001);
  CHECK(good.dof + 1 == good.bins);
  const auto bad = chi_square_gof(s.t_counts, GeometricMixture({{0.5, 0.4}, {0.5, 0.6}}));
  CHECK(bad.p_value < 1e-6);
}

TEST_CASE("random K mixes the exact law over K") {
  RandomK rk{{0.0, 0.5, 0.5}, {0.5, 0.5}};
  CHECK(rk.mean() == doctest::Approx(1.5));
  const Alphabet a = Alphabet::range(0, 2);
  TrialPlan plan{"rk", std::nullopt, rk, iid_generator(a, std::vector<double>{0.5, 0.5}),
                 10, 100000, 21};
  plan.workers = 4;
  const auto law = exact_match_law(plan);
  const auto s = run(plan);
  CHECK(s.failures() == 0);
  CHECK(chi_square_gof(s.t_counts, law).p_value > 0.001);
  CHECK(s.mean_log_T <= rk.mean() * 1.0 + 4 * s.mean_log_T_stderr);
  // K = 0 is a point mass at t = 1.
  RandomK zero{{1.0}, {0.5, 0.5}};
  TrialPlan none{"none", std::nullopt, zero, plan.generator, 10, 100, 1};
  const auto z = run(none);
  CHECK(z.t_counts.size() == 1);
  CHECK(z.t_counts.begin()->first == 1);
}

TEST_CASE("position invariance of the match index") {
  auto c = find_case("multinomial-r2-k2");
  auto first = make_plan(c, 50000, 8, 4);
  first.fixed_activity = std::vector<std::uint64_t>{1, 2};
  auto second = make_plan(c, 50000, 9, 4);
  second.fixed_activity = std::vector<std::uint64_t>{97, 40};
  const auto a = run(first);
  const auto b = run(second);
  CHECK(chi_square_two_sample(a.t_counts, b.t_counts).p_value > 0.001);
}

TEST_CASE("two-sample test detects different laws") {
  std::map<std::uint64_t, std::uint64_t> a{{1, 5000}, {2, 2500}, {3, 1250}, {4, 1250}};
  std::map<std::uint64_t, std::uint64_t> b{{1, 4000}, {2, 3000}, {3, 1500}, {4, 1500}};
  CHECK(chi_square_two_sample(a, b).p_value < 1e-6);
  CHECK(chi_square_two_sample(a, a).statistic == doctest::Approx(0.0));
}

TEST_CASE("chi-square survival function") {
  CHECK(chi_square_survival(0.0, 3) == doctest::Approx(1.0));
  CHECK(chi_square_survival(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(chi_square_survival(18.307038053275146, 10) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("budget exhaustion is counted per trial") {
  auto plan = iid_plan({0.25, 0.25, 0.25, 0.25}, 6, 20, 300, 4);
  plan.budget = EncodeBudget{1, false};
  const auto s = run(plan);
  CHECK(s.budget_exhausted > 0);
  CHECK(s.successes + s.budget_exhausted == 300);
  for (const auto& [t, n] : s.t_counts) CHECK(t == 1);
  plan.budget = EncodeBudget{};
  CHECK(run(plan).failures() == 0);
}

TEST_CASE("unencodable sources are counted") {
  const Alphabet a = Alphabet::range(0, 2);
  TrialPlan plan{"bad", make_iid(a, std::vector<double>{0.5, 0.5}, 2), std::nullopt,
                 iid_generator(a, std::vector<double>{1.0, 0.0}), 10, 400, 3};
  const auto s = run(plan);
  CHECK(s.unencodable > 0);
  CHECK(s.unencodable + s.successes == 400);
}

TEST_CASE("fixed codebook mode is deterministic") {
  auto c = find_case("scheduling-b3-k3");
  auto plan = make_plan(c, 2000, 3, 1);
  plan.fixed_codebook = true;
  const auto a = run(plan);
  plan.workers = 3;
  const auto b = run(plan);
  CHECK(a.t_counts == b.t_counts);
  CHECK(a.failures() == 0);
}

TEST_CASE("histogram cap keeps an overflow bucket") {
  EmpiricalSummary s;
  for (std::uint64_t t = 1; t <= 10; ++t) s.t_counts[t] = t;
  const auto h = s.histogram(4);
  CHECK(h.bins.size() == 4);
  CHECK(h.bins.back().first == 4);
  CHECK(h.overflow == 5 + 6 + 7 + 8 + 9 + 10);
  CHECK(s.histogram().overflow == 0);
}

TEST_CASE("rates against bounds: named rows") {
  SuiteCase cat{"cat-1-1", make_categorization(std::vector<std::uint32_t>{1, 1}),
                urn_generator(make_categorization(std::vector<std::uint32_t>{1, 1})), 10,
                Family::kCategorization, 0, {1, 1}};
  const auto row = empirical_rate_vs_bounds(cat, make_plan(cat, 20000, 1, 4));
  CHECK(row.violations.empty());
  CHECK(*row.report.achievable <= 5.0 + 1e-12);
  CHECK(row.report.exact_HT->value <= *row.report.achievable);

  const auto sched = make_scheduling(2, 2);
  SuiteCase s{"sched-2-2", sched.marginal(), urn_generator(sched.marginal()), 6,
              Family::kScheduling, 2, {}};
  const auto srow = empirical_rate_vs_bounds(s, make_plan(s, 20000, 2, 4));
  CHECK(srow.violations.empty());
  CHECK(srow.report.exact_HT->upper() >= *srow.report.converse);

  const auto a = Alphabet::range(0, 2);
  SuiteCase u{"uniform-k4", make_iid(a, std::vector<double>{0.5, 0.5}, 4),
              iid_generator(a, std::vector<double>{0.5, 0.5}), 100, Family::kGeneric, 0, {}};
  const auto urow = empirical_rate_vs_bounds(u, make_plan(u, 20000, 3, 4));
  CHECK(urow.violations.empty());
  // delta length <= log t + 2 log(log t + 1) + 1, averaged and pushed through Jensen.
  const double h = urow.report.source_entropy;
  CHECK(urow.summary.mean_delta_bits <=
        h + 2 * std::log2(h + 1) + 1 + 4 * urow.summary.delta_bits_stderr);
  CHECK(urow.bound_eq17 == doctest::Approx(h + std::log2(h + 1) + 1));
}
