#include "mra/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <set>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>

#include "mra/errors.hpp"

namespace mra {

double RandomK::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < k_pmf.size(); ++k) m += k * k_pmf[k];
  return m;
}

EmpiricalSummary::Histogram EmpiricalSummary::histogram(std::size_t cap) const {
  Histogram h;
  for (const auto& [t, c] : t_counts) {
    if (h.bins.size() < cap) {
      h.bins.emplace_back(t, c);
    } else {
      h.overflow += c;
    }
  }
  return h;
}

namespace {

enum class Outcome : std::uint8_t { kMatched, kBudget, kUnencodable };

struct TrialResult {
  Outcome outcome = Outcome::kMatched;
  std::uint64_t t = 0;
};

void validate(const TrialPlan& plan) {
  if (plan.source.has_value() == plan.random_k.has_value()) {
    throw DomainError("TrialPlan: set exactly one of source and random_k");
  }
  if (plan.trials == 0) throw DomainError("TrialPlan: trials must be >= 1");
  if (plan.n == 0) throw DomainError("TrialPlan: n must be >= 1");
  if (plan.source) {
    if (!(plan.source->alphabet() == plan.generator.alphabet())) {
      throw DomainError("TrialPlan: source and generator alphabets differ");
    }
    if (plan.source->k() > plan.n) throw DomainError("TrialPlan: k > n");
  } else {
    const auto& rk = *plan.random_k;
    if (rk.k_pmf.empty() || rk.k_pmf.size() > plan.n + 1) {
      throw DomainError("TrialPlan: K distribution must be supported on [0, n]");
    }
    if (rk.symbol_pmf.size() != plan.generator.alphabet().size()) {
      throw DomainError("TrialPlan: symbol distribution size != |X|");
    }
    for (double v : rk.k_pmf) {
      if (!(v >= 0.0)) throw DomainError("TrialPlan: negative K probability");
    }
    const double s = std::accumulate(rk.k_pmf.begin(), rk.k_pmf.end(), 0.0);
    if (std::abs(s - 1.0) > 1e-9) throw DomainError("TrialPlan: K pmf does not sum to 1");
  }
  if (plan.fixed_activity) {
    const std::size_t k = plan.fixed_activity->size();
    if (!plan.source || k != plan.source->k()) {
      throw DomainError("TrialPlan: fixed activity needs a fixed-k source of matching length");
    }
    ActivityPattern(*plan.fixed_activity, plan.n);
  }
}

// Uniform ordered tuple of k distinct users from [1, n].
std::vector<std::uint64_t> draw_activity(RandomStream& rng, std::uint64_t n, std::size_t k) {
  std::vector<std::uint64_t> out;
  out.reserve(k);
  if (2 * k <= n) {
    std::set<std::uint64_t> seen;
    while (out.size() < k) {
      const std::uint64_t u = 1 + rng.uniform_below(n);
      if (seen.insert(u).second) out.push_back(u);
    }
    return out;
  }
  std::vector<std::uint64_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::uint64_t{1});
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(pool[i], pool[i + rng.uniform_below(n - i)]);
    out.push_back(pool[i]);
  }
  return out;
}

class TrialRunner {
 public:
  explicit TrialRunner(const TrialPlan& plan)
      : plan_(plan),
        shared_(plan.generator, plan.n, derive_seed(plan.master_seed, ~std::uint64_t{0})) {
    if (plan.random_k) {
      k_sampler_ = DiscreteSampler(plan.random_k->k_pmf);
      symbol_sampler_ = DiscreteSampler(plan.random_k->symbol_pmf);
    }
  }

  TrialResult operator()(std::size_t index) const {
    RandomStream rng(derive_seed(plan_.master_seed, index));
    std::vector<Symbol> x;
    if (plan_.source) {
      x = plan_.source->sample(rng);
    } else {
      const std::size_t k = k_sampler_(rng.uniform01());
      const auto& alphabet = plan_.generator.alphabet();
      for (std::size_t i = 0; i < k; ++i) {
        x.push_back(alphabet.label(symbol_sampler_(rng.uniform01())));
      }
    }
    const ActivityPattern a(plan_.fixed_activity ? *plan_.fixed_activity
                                                 : draw_activity(rng, plan_.n, x.size()),
                            plan_.n);
    const std::uint64_t codebook_seed = rng.next_u64();
    const CodebookStream fresh = plan_.fixed_codebook
                                     ? shared_
                                     : CodebookStream(plan_.generator, plan_.n, codebook_seed);
    TrialResult r;
    try {
      r.t = encode_random_k(fresh, x, a, plan_.budget).t;
    } catch (const BudgetExhausted&) {
      r.outcome = Outcome::kBudget;
      return r;
    } catch (const UnencodableError&) {
      r.outcome = Outcome::kUnencodable;
      return r;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (decode(fresh, {r.t}, a[i]) != x[i]) {
        throw DecodeMismatch("trial " + std::to_string(index) + ": user " +
                             std::to_string(a[i]) + " decoded the wrong symbol at t=" +
                             std::to_string(r.t));
      }
    }
    return r;
  }

 private:
  const TrialPlan& plan_;
  CodebookStream shared_;
  DiscreteSampler k_sampler_;
  DiscreteSampler symbol_sampler_;
};

}  // namespace

EmpiricalSummary run(const TrialPlan& plan) {
  validate(plan);
  const TrialRunner runner(plan);
  std::vector<TrialResult> results(plan.trials);

  const std::size_t workers =
      std::clamp<std::size_t>(plan.workers, 1, std::max<std::size_t>(1, plan.trials));
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](std::size_t w) {
    const std::size_t begin = plan.trials * w / workers;
    const std::size_t end = plan.trials * (w + 1) / workers;
    try {
      for (std::size_t i = begin; i < end; ++i) results[i] = runner(i);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EmpiricalSummary s;
  s.trials_run = plan.trials;
  double sum_log = 0.0, sum_log2 = 0.0, sum_delta = 0.0, sum_delta2 = 0.0, sum_gamma = 0.0;
  for (const auto& r : results) {
    switch (r.outcome) {
      case Outcome::kBudget: ++s.budget_exhausted; continue;
      case Outcome::kUnencodable: ++s.unencodable; continue;
      case Outcome::kMatched: break;
    }
    ++s.successes;
    ++s.t_counts[r.t];
    s.max_T = std::max(s.max_T, r.t);
    const double lg = std::log2(static_cast<double>(r.t));
    const double db = static_cast<double>(elias_delta(r.t).size());
    sum_log += lg;
    sum_log2 += lg * lg;
    sum_delta += db;
    sum_delta2 += db * db;
    sum_gamma += static_cast<double>(elias_gamma(r.t).size());
  }
  const double n = static_cast<double>(s.successes);
  if (s.successes > 0) {
    s.mean_log_T = sum_log / n;
    s.mean_delta_bits = sum_delta / n;
    s.mean_gamma_bits = sum_gamma / n;
    if (s.successes > 1) {
      const double var_log = std::max(0.0, (sum_log2 - n * s.mean_log_T * s.mean_log_T) / (n - 1));
      const double var_delta =
          std::max(0.0, (sum_delta2 - n * s.mean_delta_bits * s.mean_delta_bits) / (n - 1));
      s.mean_log_T_stderr = std::sqrt(var_log / n);
      s.delta_bits_stderr = std::sqrt(var_delta / n);
    }
    for (const auto& [t, c] : s.t_counts) {
      const double f = static_cast<double>(c) / n;
      s.plugin_HT -= f * std::log2(f);
    }
    s.plugin_HT_miller_madow =
        s.plugin_HT + (static_cast<double>(s.t_counts.size()) - 1.0) / (2.0 * n * std::log(2.0));
  }
  return s;
}

GeometricMixture exact_match_law(const TrialPlan& plan) {
  validate(plan);
  if (plan.source) {
    return match_index_law(*plan.source, induced_marginal(plan.generator, plan.source->k()));
  }
  const auto& rk = *plan.random_k;
  std::vector<GeometricMixture::Atom> atoms;
  for (std::size_t k = 0; k < rk.k_pmf.size(); ++k) {
    const double pk = rk.k_pmf[k];
    if (pk == 0.0) continue;
    if (k == 0) {
      atoms.push_back({pk, 1.0});
      continue;
    }
    const auto kk = static_cast<std::uint32_t>(k);
    const ExchangeableSource p = make_iid(plan.generator.alphabet(), rk.symbol_pmf, kk);
    const ExchangeableSource q = induced_marginal(plan.generator, kk);
    const GeometricMixture law = match_index_law(p, q);
    for (const auto& atom : law.atoms()) {
      atoms.push_back({pk * atom.weight, atom.q});
    }
  }
  return GeometricMixture(std::move(atoms));
}

// ---------------------------------------------------------------- chi-square

double chi_square_survival(double statistic, std::size_t dof) {
  if (dof == 0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  const boost::math::chi_squared_distribution<double> dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

ChiSquareResult chi_square_gof(const std::map<std::uint64_t, std::uint64_t>& counts,
                               const GeometricMixture& law) {
  std::uint64_t total = 0;
  for (const auto& [t, c] : counts) total += c;
  const double n = static_cast<double>(total);
  if (n < 5.0) throw CapabilityError("chi_square_gof: fewer than 5 observations");

  // Bins [lo, hi] grown until the expected count reaches 5; the remainder
  // becomes the tail bin once it can no longer fill two more bins.
  struct Bin {
    double expected = 0.0;
    double observed = 0.0;
  };
  std::vector<Bin> bins;
  std::vector<std::uint64_t> upper;  // last t of each closed bin
  std::uint64_t t = 1;
  Bin cur;
  for (;;) {
    if (n * law.tail_mass(t - 1) < 10.0) break;
    cur.expected += n * law.pmf(t);
    if (cur.expected >= 5.0) {
      bins.push_back(cur);
      upper.push_back(t);
      cur = {};
    }
    ++t;
  }
  // Tail: everything after the last closed bin.
  const std::uint64_t last = upper.empty() ? 0 : upper.back();
  Bin tail;
  tail.expected = n * law.tail_mass(last);
  if (tail.expected > 0.0 || bins.empty()) {
    if (tail.expected < 5.0 && !bins.empty()) {
      bins.back().expected += tail.expected;
      upper.back() = ~std::uint64_t{0};
    } else {
      bins.push_back(tail);
      upper.push_back(~std::uint64_t{0});
    }
  } else {
    upper.back() = ~std::uint64_t{0};
  }

  double unexpected = 0.0;  // observations where the law has no mass
  for (const auto& [tv, c] : counts) {
    const auto it = std::lower_bound(upper.begin(), upper.end(), tv);
    bins[static_cast<std::size_t>(it - upper.begin())].observed += static_cast<double>(c);
    if (law.pmf(tv) == 0.0) unexpected += static_cast<double>(c);
  }

  ChiSquareResult r;
  r.bins = bins.size();
  r.dof = bins.size() - 1;
  for (const auto& b : bins) {
    if (b.expected > 0.0) {
      const double diff = b.observed - b.expected;
      r.statistic += diff * diff / b.expected;
    }
  }
  if (unexpected > 0.0) {
    r.statistic = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    return r;
  }
  r.p_value = chi_square_survival(r.statistic, r.dof);
  return r;
}

ChiSquareResult gof_match_index(const TrialPlan& plan, const GeometricMixture& law) {
  return chi_square_gof(run(plan).t_counts, law);
}

ChiSquareResult chi_square_two_sample(const std::map<std::uint64_t, std::uint64_t>& a,
                                      const std::map<std::uint64_t, std::uint64_t>& b) {
  std::map<std::uint64_t, std::pair<double, double>> joint;
  double na = 0.0, nb = 0.0;
  for (const auto& [t, c] : a) {
    joint[t].first += static_cast<double>(c);
    na += static_cast<double>(c);
  }
  for (const auto& [t, c] : b) {
    joint[t].second += static_cast<double>(c);
    nb += static_cast<double>(c);
  }
  if (na == 0.0 || nb == 0.0) throw CapabilityError("chi_square_two_sample: empty sample");

  std::vector<std::pair<double, double>> bins;
  std::pair<double, double> cur{0.0, 0.0};
  for (const auto& [t, ab] : joint) {
    cur.first += ab.first;
    cur.second += ab.second;
    if (cur.first + cur.second >= 10.0) {
      bins.push_back(cur);
      cur = {0.0, 0.0};
    }
  }
  if (cur.first + cur.second > 0.0) {
    if (bins.empty()) {
      bins.push_back(cur);
    } else {
      bins.back().first += cur.first;
      bins.back().second += cur.second;
    }
  }
  ChiSquareResult r;
  r.bins = bins.size();
  r.dof = bins.size() - 1;
  const double n = na + nb;
  for (const auto& [oa, ob] : bins) {
    const double col = oa + ob;
    const double ea = na * col / n;
    const double eb = nb * col / n;
    r.statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
  }
  r.p_value = chi_square_survival(r.statistic, r.dof);
  return r;
}

// ---------------------------------------------------------------- suite

RateReport analyze(const SuiteCase& c) {
  switch (c.family) {
    case Family::kScheduling: {
      RateReport r = scheduling_rates(c.n, c.source.k(), c.slots);
      r.name = c.name;
      return r;
    }
    case Family::kCategorization: {
      RateReport r = categorization_rates(c.n, c.counts).rates;
      r.name = c.name;
      return r;
    }
    case Family::kGeneric:
      break;
  }
  return rate_report(c.source, c.generator, c.name);
}

TrialPlan make_plan(const SuiteCase& c, std::size_t trials, std::uint64_t master_seed,
                    unsigned workers) {
  TrialPlan plan{.name = c.name,
                 .source = c.source,
                 .random_k = std::nullopt,
                 .generator = c.generator,
                 .n = c.n,
                 .trials = trials,
                 .master_seed = master_seed};
  plan.workers = workers;
  return plan;
}

std::vector<SuiteCase> default_suite() {
  std::vector<SuiteCase> suite;
  auto iid = [&](std::string name, std::vector<double> p, std::uint32_t k) {
    const Alphabet alphabet = Alphabet::range(0, p.size());
    suite.push_back({std::move(name), make_iid(alphabet, p, k), iid_generator(alphabet, p)});
  };
  iid("iid-bernoulli-0.5-k4", {0.5, 0.5}, 4);
  iid("iid-bernoulli-0.3-k3", {0.7, 0.3}, 3);
  iid("iid-uniform4-k2", {0.25, 0.25, 0.25, 0.25}, 2);
  {
    const ExchangeableSource p = make_iid(std::vector<double>{0.7, 0.3}, 3);
    suite.push_back({"iid-bernoulli-0.3-k3-urn", p, urn_generator(p)});
  }
  {
    const ExtendableSource s = make_scheduling(3, 3);
    SuiteCase c{"scheduling-b3-k3", s.marginal(), urn_generator(s.marginal())};
    c.family = Family::kScheduling;
    c.slots = 3;
    suite.push_back(std::move(c));
  }
  {
    const ExtendableSource s = make_scheduling(4, 2);
    SuiteCase c{"scheduling-b4-k2", s.marginal(), extended_urn_generator(s)};
    c.family = Family::kScheduling;
    c.slots = 4;
    suite.push_back(std::move(c));
  }
  for (const auto& counts : {std::vector<std::uint32_t>{1, 1}, std::vector<std::uint32_t>{2, 1, 1}}) {
    const ExchangeableSource p = make_categorization(counts);
    std::string name = "categorization";
    for (auto v : counts) name += "-" + std::to_string(v);
    SuiteCase c{std::move(name), p, urn_generator(p)};
    c.family = Family::kCategorization;
    c.counts = counts;
    suite.push_back(std::move(c));
  }
  {
    const ExchangeableSource p = make_multinomial(2, 2);
    suite.push_back({"multinomial-r2-k2", p, urn_generator(p)});
  }
  {
    const ExtendableSource s = make_urn_without_replacement(3, 2);
    suite.push_back({"urn-d3-k2", s.marginal(), extended_urn_generator(s)});
  }
  {
    const ExchangeableSource p = make_two_point(4);
    suite.push_back({"two-point-k4", p, urn_generator(p)});
  }
  return suite;
}

BoundsRow empirical_rate_vs_bounds(const SuiteCase& c, const TrialPlan& plan) {
  BoundsRow row;
  row.report = analyze(c);
  const auto& r = row.report;
  row.bound_eq17 = bound_theorem1(std::max(0.0, r.source_entropy), 0.0);
  row.summary = run(plan);
  const EmpiricalSummary& s = row.summary;
  EmpiricalRates e;
  e.trials = s.successes;
  e.mean_log_T = s.mean_log_T;
  e.mean_log_T_stderr = s.mean_log_T_stderr;
  e.plugin_HT = s.plugin_HT;
  e.plugin_HT_miller_madow = s.plugin_HT_miller_madow;
  e.delta_bits_per_msg = s.mean_delta_bits;
  e.delta_bits_stderr = s.delta_bits_stderr;
  row.report.empirical = e;

  constexpr double kSlack = 1e-9;
  if (s.failures() > 0) {
    row.violations.push_back(std::to_string(s.failures()) + " trials failed to encode");
  }
  if (r.exact_HT) {
    if (r.exact_HT->value > r.bound_eq14 + kSlack) {
      row.violations.push_back("exact H(T) exceeds the H + D + log(H + D + 1) + 1 bound");
    }
    if (r.bound_eq15 && r.exact_HT->value > *r.bound_eq15 + kSlack) {
      row.violations.push_back("exact H(T) exceeds the log-log(q_max/q_min) bound");
    }
    if (r.converse && *r.converse > r.exact_HT->upper() + kSlack) {
      row.violations.push_back("converse exceeds exact H(T)");
    }
    if (r.achievable && r.exact_HT->value > *r.achievable + kSlack) {
      row.violations.push_back("exact H(T) exceeds the achievable rate");
    }
  }
  if (r.exact_E_log_T) {
    const double h_plus_d = r.source_entropy + r.divergence.d_pq;
    if (r.exact_E_log_T->value > h_plus_d + kSlack) {
      row.violations.push_back("exact E[log T] exceeds H + D");
    }
    const double z = (s.mean_log_T - r.exact_E_log_T->value) /
                     std::max(s.mean_log_T_stderr, 1e-300);
    if (!plan.fixed_codebook && s.successes > 1 && s.mean_log_T_stderr > 0.0 &&
        std::abs(z) > 4.0) {
      row.violations.push_back("empirical mean log T is more than 4 sigma from exact");
    }
  }
  return row;
}

}  // namespace mra
