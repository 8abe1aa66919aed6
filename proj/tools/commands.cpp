#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mra/analysis.hpp"
#include "mra/combinatorics.hpp"
#include "mra/errors.hpp"
#include "mra/report.hpp"

namespace mra::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kSlack = 1e-9;

std::ofstream open_output(const fs::path& out, const std::string& name) {
  fs::create_directories(out);
  std::ofstream f(out / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (out / name).string());
  return f;
}

void header(JsonWriter& w, std::string_view command, const RunConfig& c) {
  w.key("command").value(command);
  w.key("config_hash").value(c.hash());
  w.key("seed").value(c.seed);
}

void write_branched(JsonWriter& w, const BranchedBound& b) {
  w.begin_object();
  w.field_bits("value", b.value);
  w.field_bits("first", b.first);
  w.key("second");
  b.second ? void(w.bits(*b.second)) : void(w.null());
  if (b.second && std::isinf(*b.second)) w.key("second_infinite").value(true);
  w.key("note").value(b.note);
  w.end_object();
}

void write_violations(JsonWriter& w, const std::vector<std::string>& v) {
  w.key("violations").begin_array();
  for (const auto& s : v) w.value(s);
  w.end_array();
}

std::string join_counts(std::span<const std::uint32_t> counts) {
  std::string s;
  for (std::size_t i = 0; i < counts.size(); ++i) s += (i ? ";" : "") + std::to_string(counts[i]);
  return s;
}

}  // namespace

// ---------------------------------------------------------------- source-info

int cmd_source_info(const RunConfig& c, const fs::path& out, std::ostream& log) {
  if (!c.source) throw ConfigError("source-info needs a source");
  const ExchangeableSource& p = *c.source->source;
  std::ofstream jf = open_output(out, "source_info.json");
  std::ofstream cf = open_output(out, "source_info.csv");
  JsonWriter w(jf);
  w.begin_object();
  header(w, "source-info", c);
  w.key("kind").value(c.source->kind);
  w.key("alphabet").begin_array();
  for (auto s : p.alphabet().labels()) w.value(static_cast<std::int64_t>(s));
  w.end_array();
  w.key("k").value(p.k());
  w.key("entropy").bits(p.entropy());
  cf << "counts,weight,sequence_probability,class_size\n";
  w.key("types").begin_array();
  for (const auto& [type, weight] : p.type_weights()) {
    w.begin_object();
    w.key("counts").begin_array();
    for (auto v : type.counts()) w.value(v);
    w.end_array();
    w.key("weight").number(weight);
    w.key("sequence_probability").number(p.sequence_probability(type));
    w.key("class_size").number(type.class_size());
    w.end_object();
    std::ostringstream row;
    row << join_counts(type.counts()) << ',';
    JsonWriter(row).number(weight);
    row << ',';
    JsonWriter(row).number(p.sequence_probability(type));
    row << ',';
    JsonWriter(row).number(type.class_size());
    cf << row.str() << '\n';
  }
  w.end_array();
  w.key("exchangeability").begin_object();
  if (p.k() <= 8) {
    const auto rep = verify_exchangeable(p);
    w.key("checked").value(true);
    w.key("permutation_invariant").value(rep.permutation_invariant);
    w.key("worst_permutation_violation").number(rep.worst_permutation_violation);
    w.key("normalization_error").number(rep.normalization_error);
    w.key("ok").value(rep.ok());
  } else {
    w.key("checked").value(false);
    w.key("note").value("k > 8: exchangeable by construction (type-weight form), not enumerated");
  }
  w.end_object();
  w.end_object();
  w.finish();
  log << "source " << c.source->kind << ": |X|=" << p.alphabet().size() << " k=" << p.k()
      << " types=" << p.type_weights().size() << " entropy=" << format_bits(p.entropy())
      << " bits\n";
  return kExitOk;
}

// ---------------------------------------------------------------- bounds

int cmd_bounds(const RunConfig& c, const fs::path& out, std::ostream& log) {
  std::vector<std::string> violations;
  std::ofstream jf = open_output(out, "bounds.json");
  JsonWriter w(jf);
  w.begin_object();
  header(w, "bounds", c);

  if (c.random_k) {
    const TrialPlan plan = c.plan();
    const double ek = c.random_k->mean();
    const double hp = entropy_bits(c.random_k->symbol_pmf);
    const auto law = exact_match_law(plan);
    const auto elog = law.expected_log2(c.tail_tol);
    const double b4 = bound_theorem4(ek, hp);
    w.key("random_k").begin_object();
    w.key("expected_k").number(ek);
    w.key("h_p").bits(hp);
    w.key("bound_theorem4").bits(b4);
    w.key("exact_E_log_T");
    write_json(w, elog);
    w.key("exact_HT");
    write_json(w, law.entropy(c.tail_tol));
    w.end_object();
    if (elog.value > ek * hp + kSlack) violations.push_back("exact E[log T] exceeds E[K] H(p)");
    write_violations(w, violations);
    w.end_object();
    w.finish();
    log << "random K: E[K]=" << ek << " bound_theorem4=" << format_bits(b4)
        << " exact E[log T]=" << format_bits(elog.value) << '\n';
    return violations.empty() ? kExitOk : kExitViolation;
  }

  const SuiteCase sc = c.suite_case();
  const ExchangeableSource& p = sc.source;
  RateReport r = analyze(sc);
  w.key("generator").value(c.generator_kind);
  w.key("report");
  write_json(w, r);

  std::ofstream cf = open_output(out, "bounds.csv");
  cf << rate_csv_header() << '\n' << rate_csv_row(r) << '\n';

  if (r.exact_HT) {
    if (r.exact_HT->value > r.bound_eq14 + kSlack) violations.push_back("exact H(T) > bound_eq14");
    if (r.bound_eq15 && r.exact_HT->value > *r.bound_eq15 + kSlack) {
      violations.push_back("exact H(T) > bound_eq15");
    }
  }

  // Urn divergence against its universal bound.
  const double d_urn = kl_divergence(p, induced_marginal(urn_generator(p), p.k())).d_pq;
  const double b2 = bound_theorem2(p.k(), p.alphabet().size());
  w.key("theorem2").begin_object();
  w.field_bits("urn_divergence", d_urn);
  w.key("bound").bits(b2);
  w.key("holds").value(d_urn <= b2 + kSlack);
  w.end_object();
  if (!(d_urn <= b2 + kSlack)) violations.push_back("D(p||q_urn) exceeds min{k log e, |X| log(k+1)}");

  if (c.source->extendable && c.source->extendable->d() > p.k()) {
    const auto& ext = *c.source->extendable;
    const std::uint32_t d = ext.d();
    const std::size_t m = p.alphabet().size();
    const double d_ext = kl_divergence(p, induced_marginal(extended_urn_generator(ext), p.k())).d_pq;
    const auto b3 = bound_theorem3(p.k(), d, m);
    const auto b5 = bound_theorem5(p.k(), d, m);
    w.key("extendable").begin_object();
    w.key("d").value(d);
    w.field_bits("extended_urn_divergence", d_ext);
    w.key("theorem3");
    write_branched(w, b3);
    w.key("theorem5");
    write_branched(w, b5);
    w.key("theorem6_rhs").bits(theorem6_rhs(d, p.k()));
    w.key("holds_theorem3").value(d_ext <= b3.value + kSlack);
    w.key("holds_theorem5").value(d_ext <= b5.value + kSlack);
    w.end_object();
    if (!(d_ext <= b3.value + kSlack)) violations.push_back("extended-urn D exceeds bound_theorem3");
    if (!(d_ext <= b5.value + kSlack)) violations.push_back("extended-urn D exceeds bound_theorem5");
  }

  if (sc.family == Family::kScheduling && r.achievable && r.converse) {
    const std::uint32_t k = p.k();
    const double penalty = pool_penalty(c.n, k);
    const double envelope = log2_factorial(k) + k * std::numbers::log2e + 3.0 + penalty;
    const double gap = *r.achievable - *r.converse;
    w.key("scheduling").begin_object();
    w.key("gap").bits(gap);
    w.key("envelope").bits(envelope);
    w.key("tight_envelope").bits(3.0 + penalty);
    w.key("holds").value(gap <= envelope + kSlack);
    w.end_object();
    if (!(gap <= envelope + kSlack)) violations.push_back("achievable - converse exceeds envelope");
  }
  if (sc.family == Family::kCategorization) {
    const auto cat = categorization_rates(c.n, c.source->counts);
    w.key("categorization").begin_object();
    w.key("k_h_rho").bits(cat.k_h_rho);
    w.key("identity_residual").number(cat.identity_residual);
    w.end_object();
    if (std::abs(cat.identity_residual) > kSlack) violations.push_back("D != kH(rho) - H(X)");
  }
  if (r.converse && r.exact_HT && *r.converse > r.exact_HT->upper() + kSlack) {
    violations.push_back("converse exceeds exact H(T)");
  }
  if (c.source->kind == "multinomial") {
    const auto ra = resource_allocation_compare(c.source->resources, p.k());
    w.key("resource_allocation").begin_object();
    w.key("h_x1").bits(ra.h_x1);
    w.key("r_marginal").bits(ra.r_marginal);
    w.key("h_x").bits(ra.h_x);
    w.key("d_urn").bits(ra.d_urn);
    w.key("r_urn").bits(ra.r_urn);
    w.key("bound_urn").bits(ra.bound_urn);
    w.key("gap").bits(ra.gap);
    w.end_object();
  }
  write_violations(w, violations);
  w.end_object();
  w.finish();

  log << r.name << ": H=" << format_bits(r.source_entropy)
      << " D=" << format_bits(r.divergence.d_pq) << " eq14=" << format_bits(r.bound_eq14);
  if (r.exact_HT) log << " H(T)=" << format_bits(r.exact_HT->value);
  if (r.achievable) log << " achievable=" << format_bits(*r.achievable);
  if (r.converse) log << " converse=" << format_bits(*r.converse);
  log << '\n';
  for (const auto& v : violations) log << "violation: " << v << '\n';
  return violations.empty() ? kExitOk : kExitViolation;
}

// ---------------------------------------------------------------- simulate

namespace {

void write_case(JsonWriter& w, const BoundsRow& row, const std::optional<ChiSquareResult>& gof) {
  w.begin_object();
  w.key("name").value(row.report.name);
  w.key("report");
  write_json(w, row.report);
  w.key("bound_eq17").bits(row.bound_eq17);
  w.key("summary");
  write_json(w, row.summary);
  w.key("gof");
  gof ? write_json(w, *gof) : void(w.null());
  write_violations(w, row.violations);
  w.end_object();
}

std::optional<ChiSquareResult> try_gof(const EmpiricalSummary& s, const GeometricMixture& law) {
  try {
    return chi_square_gof(s.t_counts, law);
  } catch (const CapabilityError&) {
    return std::nullopt;
  }
}

}  // namespace

int cmd_simulate(const RunConfig& c, const fs::path& out, std::ostream& log) {
  std::ofstream jf = open_output(out, "simulate.json");
  std::ofstream cf = open_output(out, "simulate.csv");
  std::ofstream hf = open_output(out, "simulate_histogram.csv");
  cf << rate_csv_header() << '\n';
  hf << "case,T,count\n";
  JsonWriter w(jf);
  w.begin_object();
  header(w, "simulate", c);
  w.key("trials").value(static_cast<std::uint64_t>(c.trials));
  w.key("fixed_codebook").value(c.fixed_codebook);
  if (c.fixed_codebook) {
    w.key("fixed_codebook_note")
        .value("one shared codebook: estimates H(f_m(X,A)) for that m, not the ensemble law of T");
  }
  w.key("cases").begin_array();
  bool any_violation = false;

  auto run_case = [&](const SuiteCase& sc, TrialPlan plan) {
    const BoundsRow row = empirical_rate_vs_bounds(sc, plan);
    std::optional<ChiSquareResult> gof;
    if (!c.fixed_codebook && row.report.exact_HT) gof = try_gof(row.summary, exact_match_law(plan));
    write_case(w, row, gof);
    cf << rate_csv_row(row.report) << '\n';
    write_histogram_csv(hf, row.summary, sc.name);
    log << sc.name << ": trials=" << row.summary.trials_run << " failures=" << row.summary.failures()
        << " mean_log_T=" << format_bits(row.summary.mean_log_T);
    if (row.report.exact_E_log_T) log << " exact=" << format_bits(row.report.exact_E_log_T->value);
    log << '\n';
    for (const auto& v : row.violations) log << "violation: " << v << '\n';
    any_violation = any_violation || !row.violations.empty();
  };

  if (c.suite) {
    const auto suite = default_suite();
    for (std::size_t i = 0; i < suite.size(); ++i) {
      SuiteCase sc = suite[i];
      sc.n = c.n;
      TrialPlan plan = make_plan(sc, c.trials, derive_seed(c.seed, i), c.workers);
      plan.budget = c.budget;
      plan.fixed_codebook = c.fixed_codebook;
      run_case(sc, std::move(plan));
    }
  } else if (c.source) {
    run_case(c.suite_case(), c.plan());
  } else if (c.random_k) {
    const TrialPlan plan = c.plan();
    const EmpiricalSummary s = run(plan);
    const double ek = c.random_k->mean();
    const double hp = entropy_bits(c.random_k->symbol_pmf);
    const auto law = exact_match_law(plan);
    const auto elog = law.expected_log2(c.tail_tol);
    std::vector<std::string> violations;
    if (s.failures() > 0) violations.push_back(std::to_string(s.failures()) + " trials failed to encode");
    if (s.mean_log_T > ek * hp + 4.0 * s.mean_log_T_stderr) {
      violations.push_back("empirical mean log T exceeds E[K] H(p) + 4 sigma");
    }
    w.begin_object();
    w.key("name").value("random-k");
    w.key("expected_k").number(ek);
    w.key("h_p").bits(hp);
    w.key("bound_theorem4").bits(bound_theorem4(ek, hp));
    w.key("exact_E_log_T");
    write_json(w, elog);
    w.key("summary");
    write_json(w, s);
    w.key("gof");
    const auto gof = c.fixed_codebook ? std::nullopt : try_gof(s, law);
    gof ? write_json(w, *gof) : void(w.null());
    write_violations(w, violations);
    w.end_object();
    write_histogram_csv(hf, s, "random-k");
    log << "random-k: trials=" << s.trials_run << " failures=" << s.failures()
        << " mean_log_T=" << format_bits(s.mean_log_T) << " E[K]H=" << format_bits(ek * hp) << '\n';
    for (const auto& v : violations) log << "violation: " << v << '\n';
    any_violation = any_violation || !violations.empty();
  } else {
    throw ConfigError("simulate needs a source, random_k, or \"suite\": true");
  }
  w.end_array();
  w.end_object();
  w.finish();
  return any_violation ? kExitViolation : kExitOk;
}

// ---------------------------------------------------------------- definetti

int cmd_definetti(const RunConfig& c, const fs::path& out, std::ostream& log) {
  const auto& dc = c.definetti;
  const Theorem6Result t6 = theorem6_verify(dc.d, dc.k, dc.trials, c.seed);
  std::vector<std::string> violations;
  if (!t6.holds) violations.push_back("sampled mixture beats theorem6_rhs");
  if (std::abs(t6.uniform_divergence - t6.rhs) > kSlack) {
    violations.push_back("uniform mixture does not attain theorem6_rhs");
  }

  std::ofstream jf = open_output(out, "definetti.json");
  std::ofstream cf = open_output(out, "definetti_grid.csv");
  JsonWriter w(jf);
  w.begin_object();
  header(w, "definetti", c);
  w.key("theorem6").begin_object();
  w.key("d").value(dc.d);
  w.key("k").value(dc.k);
  w.key("rhs").bits(t6.rhs);
  w.key("uniform_divergence").bits(t6.uniform_divergence);
  w.key("min_divergence").bits(t6.min_divergence);
  w.key("mixtures_evaluated").value(static_cast<std::uint64_t>(t6.mixtures_evaluated));
  w.key("infinite_excluded").value(static_cast<std::uint64_t>(t6.infinite_excluded));
  w.key("holds").value(t6.holds);
  w.key("scope").value("inequality checked on sampled mixtures only; equality at the uniform mixture");
  w.end_object();

  cf << "k,d,chain_lhs,chain_rhs,chain_status,theorem5_first,theorem5_second,theorem5_note\n";
  w.key("grid").begin_array();
  for (std::uint32_t k = 1; k <= dc.grid_k_max; ++k) {
    for (std::uint32_t d = std::max<std::uint32_t>(k, 2); d <= dc.grid_d_max; ++d) {
      w.begin_object();
      w.key("k").value(k);
      w.key("d").value(d);
      const double kk = static_cast<double>(k) * (k - 1.0);
      const double lhs = log2_power_over_falling(d, k);
      std::string status;
      std::string rhs_s;
      w.key("chain_lhs").bits(lhs);
      if (kk < 2.0 * d) {
        const double rhs = -std::log2(1.0 - kk / (2.0 * d));
        const bool ok = definetti_chain_check(k, d);
        status = ok ? "holds" : "fails";
        rhs_s = format_bits(rhs);
        w.key("chain_rhs").bits(rhs);
        if (!ok) violations.push_back("chain inequality fails at k=" + std::to_string(k) +
                                      " d=" + std::to_string(d));
      } else {
        status = "branch undefined";
        w.key("chain_rhs").null();
      }
      w.key("chain_status").value(status);
      std::string t5a, t5b, note;
      if (d > k) {
        const auto b5 = bound_theorem5(k, d, d);
        t5a = format_bits(b5.first);
        t5b = b5.second ? format_bits(*b5.second) : "";
        note = b5.note;
        w.key("theorem5");
        write_branched(w, b5);
      }
      w.end_object();
      cf << k << ',' << d << ',' << format_bits(lhs) << ',' << rhs_s << ',' << csv_field(status)
         << ',' << t5a << ',' << t5b << ',' << csv_field(note) << '\n';
    }
  }
  w.end_array();
  write_violations(w, violations);
  w.end_object();
  w.finish();
  log << "theorem6 d=" << dc.d << " k=" << dc.k << ": rhs=" << format_bits(t6.rhs)
      << " uniform=" << format_bits(t6.uniform_divergence)
      << " sampled_min=" << format_bits(t6.min_divergence) << (t6.holds ? " holds" : " FAILS")
      << '\n';
  for (const auto& v : violations) log << "violation: " << v << '\n';
  return violations.empty() ? kExitOk : kExitViolation;
}

// ---------------------------------------------------------------- codes

int cmd_codes(const RunConfig& c, const fs::path& out, std::ostream& log) {
  std::ofstream cf = open_output(out, "codes.csv");
  cf << "t,gamma,delta,gamma_bits,delta_bits,delta_packed_hex\n";
  for (std::uint64_t t = c.t_first; t <= c.t_last; ++t) {
    const BitString g = elias_gamma(t);
    const BitString d = elias_delta(t);
    std::string hex;
    for (auto b : d.pack()) {
      static constexpr char kHex[] = "0123456789abcdef";
      hex += kHex[b >> 4];
      hex += kHex[b & 15];
    }
    cf << t << ',' << g.str() << ',' << d.str() << ',' << g.size() << ',' << d.size() << ','
       << hex << '\n';
  }
  log << "wrote Elias codes for t=" << c.t_first << ".." << c.t_last << '\n';
  return kExitOk;
}

int cmd_codewords(const RunConfig& c, const fs::path& out, std::ostream& log) {
  if (!c.generator) throw ConfigError("codewords needs a source or a generator mixture");
  const double cells = static_cast<double>(c.n) * static_cast<double>(c.t_last - c.t_first + 1);
  if (cells > kMaxSequences) throw CapabilityError("codewords: more than 1e7 entries requested");
  const CodebookStream stream(*c.generator, c.n, c.seed);
  std::ofstream cf = open_output(out, "codewords.csv");
  cf << "t,position,symbol\n";
  for (std::uint64_t t = c.t_first; t <= c.t_last; ++t) {
    const auto cw = stream.codeword(t);
    for (std::size_t u = 0; u < cw.size(); ++u) cf << t << ',' << (u + 1) << ',' << cw[u] << '\n';
  }
  log << "wrote codewords t=" << c.t_first << ".." << c.t_last << " n=" << c.n << '\n';
  return kExitOk;
}

}  // namespace mra::cli
