#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mra/analysis.hpp"
#include "mra/codebook.hpp"
#include "mra/codec.hpp"
#include "mra/sources.hpp"

namespace mra {

// K ~ k_pmf (index = K), then K i.i.d. symbols from symbol_pmf.
struct RandomK {
  std::vector<double> k_pmf;
  std::vector<double> symbol_pmf;

  double mean() const;
};

struct TrialPlan {
  std::string name;
  // Exactly one of source / random_k is set.
  std::optional<ExchangeableSource> source;
  std::optional<RandomK> random_k;
  MixtureGeneratorSpec generator;
  std::uint64_t n = 100;
  std::size_t trials = 1000;
  std::uint64_t master_seed = 1;
  EncodeBudget budget{};
  // One codebook shared by every trial: estimates H(f_m(X, A)) for that m,
  // not the ensemble law of T.
  bool fixed_codebook = false;
  std::optional<std::vector<std::uint64_t>> fixed_activity;
  unsigned workers = 1;
};

struct EmpiricalSummary {
  std::size_t trials_run = 0;
  std::size_t successes = 0;
  std::size_t budget_exhausted = 0;
  std::size_t unencodable = 0;
  double mean_log_T = 0.0;
  double mean_log_T_stderr = 0.0;
  double plugin_HT = 0.0;
  // plugin + (bins - 1) / (2 N ln 2)
  double plugin_HT_miller_madow = 0.0;
  double mean_delta_bits = 0.0;
  double delta_bits_stderr = 0.0;
  double mean_gamma_bits = 0.0;
  std::uint64_t max_T = 0;
  std::map<std::uint64_t, std::uint64_t> t_counts;  // successful trials only

  std::size_t failures() const noexcept { return budget_exhausted + unencodable; }
  // 95% normal interval radius.
  double mean_log_T_ci() const noexcept { return 1.959963984540054 * mean_log_T_stderr; }

  struct Histogram {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> bins;
    std::uint64_t overflow = 0;  // trials with T beyond the last kept value
  };
  static constexpr std::size_t kHistogramCap = 4096;
  Histogram histogram(std::size_t cap = kHistogramCap) const;
};

// Runs every trial; aggregation is in trial order so the summary does not
// depend on plan.workers. Throws DecodeMismatch if an active user decodes
// the wrong symbol.
EmpiricalSummary run(const TrialPlan& plan);

// Exact law of T averaged over sources, activity and codebooks.
GeometricMixture exact_match_law(const TrialPlan& plan);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t bins = 0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

// Pearson test of observed T counts against `law`; bins are pooled so each
// expected count is at least 5, with a final tail bin.
ChiSquareResult chi_square_gof(const std::map<std::uint64_t, std::uint64_t>& counts,
                               const GeometricMixture& law);
ChiSquareResult gof_match_index(const TrialPlan& plan, const GeometricMixture& law);

// Homogeneity test of two T samples (pooled so combined counts are >= 10).
ChiSquareResult chi_square_two_sample(const std::map<std::uint64_t, std::uint64_t>& a,
                                      const std::map<std::uint64_t, std::uint64_t>& b);

// Upper-tail probability of a chi-square variable.
double chi_square_survival(double statistic, std::size_t dof);

// ---------------------------------------------------------------- suite

enum class Family { kGeneric, kScheduling, kCategorization };

struct SuiteCase {
  std::string name;
  ExchangeableSource source;
  MixtureGeneratorSpec generator;
  std::uint64_t n = 100;
  Family family = Family::kGeneric;
  std::uint32_t slots = 0;                // scheduling b
  std::vector<std::uint32_t> counts;      // categorization
};

// Exact rate analysis with achievable / converse where the family has them.
RateReport analyze(const SuiteCase& c);

TrialPlan make_plan(const SuiteCase& c, std::size_t trials, std::uint64_t master_seed,
                    unsigned workers = 1);

// Built-in cases, n = 100, each with its automatic urn generator.
std::vector<SuiteCase> default_suite();

struct BoundsRow {
  RateReport report;
  double bound_eq17 = 0.0;  // H + log(H + 1) + 1
  EmpiricalSummary summary;
  std::vector<std::string> violations;
};

// Exact values, bounds and the empirical run side by side; every bound
// that the exact or empirical rate exceeds is listed in violations. The
// comparison with the exact E[log T] is skipped for fixed-codebook plans.
BoundsRow empirical_rate_vs_bounds(const SuiteCase& c, const TrialPlan& plan);

}  // namespace mra
