#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "mra/errors.hpp"
#include "mra/report.hpp"

namespace mra::cli {

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.contains(k)) throw ConfigError(path + ": unknown field \"" + k + "\"");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(path + ": missing field \"" + key + "\"");
  return obj.at(key);
}

std::uint64_t as_uint(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  throw ConfigError(path + ": expected a non-negative integer");
}

std::uint32_t as_u32(const json& v, const std::string& path) {
  const auto x = as_uint(v, path);
  if (x > 0xffffffffu) throw ConfigError(path + ": value exceeds 2^32 - 1");
  return static_cast<std::uint32_t>(x);
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
  return v.get<bool>();
}

std::vector<double> as_doubles(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_double(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::uint32_t> as_u32s(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of integers");
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_u32(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<Symbol> as_labels(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of integer labels");
  std::vector<Symbol> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) {
      throw ConfigError(path + "[" + std::to_string(i) + "]: expected an integer");
    }
    out.push_back(v[i].get<Symbol>());
  }
  return out;
}

Alphabet labels_or_range(const json& obj, std::size_t size, const std::string& path) {
  if (!obj.contains("labels")) return Alphabet::range(0, size);
  auto labels = as_labels(obj.at("labels"), path + ".labels");
  if (labels.size() != size) throw ConfigError(path + ".labels: length does not match");
  return Alphabet(std::move(labels));
}

SourceConfig parse_source(const json& j) {
  const std::string path = "source";
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  const auto& kind_v = require(j, "kind", path);
  if (!kind_v.is_string()) throw ConfigError(path + ".kind: expected a string");
  SourceConfig s;
  s.kind = kind_v.get<std::string>();
  const std::string& kind = s.kind;
  if (kind == "iid") {
    check_keys(j, {"kind", "p", "k", "labels"}, path);
    s.iid_p = as_doubles(require(j, "p", path), path + ".p");
    const auto k = as_u32(require(j, "k", path), path + ".k");
    s.source = make_iid(labels_or_range(j, s.iid_p.size(), path), s.iid_p, k);
  } else if (kind == "scheduling") {
    check_keys(j, {"kind", "b", "k"}, path);
    s.slots = as_u32(require(j, "b", path), path + ".b");
    s.extendable = make_scheduling(s.slots, as_u32(require(j, "k", path), path + ".k"));
    s.source = s.extendable->marginal();
  } else if (kind == "categorization") {
    check_keys(j, {"kind", "counts"}, path);
    s.counts = as_u32s(require(j, "counts", path), path + ".counts");
    s.source = make_categorization(s.counts);
  } else if (kind == "multinomial") {
    check_keys(j, {"kind", "r", "k"}, path);
    s.resources = as_u32(require(j, "r", path), path + ".r");
    s.source = make_multinomial(s.resources, as_u32(require(j, "k", path), path + ".k"));
  } else if (kind == "urn") {
    check_keys(j, {"kind", "d", "k"}, path);
    s.extendable = make_urn_without_replacement(as_u32(require(j, "d", path), path + ".d"),
                                                as_u32(require(j, "k", path), path + ".k"));
    s.source = s.extendable->marginal();
  } else if (kind == "two-point") {
    check_keys(j, {"kind", "k"}, path);
    s.source = make_two_point(as_u32(require(j, "k", path), path + ".k"));
  } else if (kind == "custom") {
    check_keys(j, {"kind", "alphabet", "k", "types"}, path);
    Alphabet alphabet(as_labels(require(j, "alphabet", path), path + ".alphabet"));
    const auto k = as_u32(require(j, "k", path), path + ".k");
    const auto& types = require(j, "types", path);
    if (!types.is_array()) throw ConfigError(path + ".types: expected an array");
    TypeWeights w;
    for (std::size_t i = 0; i < types.size(); ++i) {
      const std::string tp = path + ".types[" + std::to_string(i) + "]";
      check_keys(types[i], {"counts", "weight"}, tp);
      Composition c(as_u32s(require(types[i], "counts", tp), tp + ".counts"));
      const double weight = as_double(require(types[i], "weight", tp), tp + ".weight");
      if (!w.emplace(std::move(c), weight).second) throw ConfigError(tp + ": duplicate type");
    }
    s.source = ExchangeableSource(std::move(alphabet), k, std::move(w));
  } else {
    throw ConfigError(path + ".kind: unknown kind \"" + kind +
                      "\" (iid, scheduling, categorization, multinomial, urn, two-point, custom)");
  }
  return s;
}

RandomK parse_random_k(const json& j, Alphabet& alphabet) {
  const std::string path = "random_k";
  check_keys(j, {"k_pmf", "symbol_pmf", "labels"}, path);
  RandomK rk;
  rk.k_pmf = as_doubles(require(j, "k_pmf", path), path + ".k_pmf");
  rk.symbol_pmf = as_doubles(require(j, "symbol_pmf", path), path + ".symbol_pmf");
  alphabet = labels_or_range(j, rk.symbol_pmf.size(), path);
  double s = 0.0;
  for (double v : rk.symbol_pmf) {
    if (!(v >= 0.0)) throw ConfigError(path + ".symbol_pmf: negative probability");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9) throw ConfigError(path + ".symbol_pmf: does not sum to 1");
  return rk;
}

MixtureGeneratorSpec parse_mixture(const json& j, const std::optional<Alphabet>& fallback) {
  const std::string path = "generator";
  check_keys(j, {"mixture", "labels"}, path);
  const auto& comps = require(j, "mixture", path);
  if (!comps.is_array() || comps.empty()) {
    throw ConfigError(path + ".mixture: expected a non-empty array");
  }
  std::vector<MixtureComponent> out;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string cp = path + ".mixture[" + std::to_string(i) + "]";
    check_keys(comps[i], {"weight", "probs"}, cp);
    MixtureComponent c;
    c.weight = as_double(require(comps[i], "weight", cp), cp + ".weight");
    c.symbol_probabilities = as_doubles(require(comps[i], "probs", cp), cp + ".probs");
    out.push_back(std::move(c));
  }
  Alphabet alphabet = j.contains("labels")
                          ? labels_or_range(j, out[0].symbol_probabilities.size(), path)
                          : fallback.value_or(
                                Alphabet::range(0, out[0].symbol_probabilities.size()));
  return MixtureGeneratorSpec(std::move(alphabet), std::move(out));
}

// Resolves "auto" and builds the generator for a fixed-k source.
void resolve_generator(RunConfig& c, const json* g) {
  const SourceConfig& s = *c.source;
  std::string kind = "auto";
  if (g != nullptr) {
    if (g->is_object()) {
      c.generator = parse_mixture(*g, s.source->alphabet());
      c.generator_kind = "mixture";
      return;
    }
    if (!g->is_string()) throw ConfigError("generator: expected a string or an object");
    kind = g->get<std::string>();
  }
  const bool extendable = s.extendable && s.extendable->d() > s.extendable->k();
  if (kind == "auto") {
    kind = s.kind == "iid" ? "source-iid" : extendable ? "auto-extended-urn" : "auto-urn";
  }
  if (kind == "auto-urn") {
    c.generator = urn_generator(*s.source);
  } else if (kind == "auto-extended-urn") {
    if (!s.extendable) {
      throw ConfigError("generator: auto-extended-urn needs a scheduling or urn source");
    }
    c.generator = extended_urn_generator(*s.extendable);
  } else if (kind == "source-iid") {
    if (s.kind != "iid") throw ConfigError("generator: source-iid needs an iid source");
    c.generator = iid_generator(s.source->alphabet(), s.iid_p);
  } else if (kind == "marginal") {
    c.generator = marginal_generator(*s.source);
  } else {
    throw ConfigError("generator: unknown choice \"" + kind +
                      "\" (auto, auto-urn, auto-extended-urn, source-iid, marginal, or "
                      "{\"mixture\": [...]})");
  }
  c.generator_kind = kind;
}

}  // namespace

RunConfig parse_config(json doc, const Overrides& overrides) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  if (overrides.seed) doc["seed"] = *overrides.seed;
  if (overrides.trials) doc["trials"] = *overrides.trials;
  if (overrides.workers) doc["workers"] = *overrides.workers;
  check_keys(doc,
             {"description", "source", "random_k", "generator", "n", "seed", "trials",
              "workers", "t_max", "early_abort", "fixed_codebook", "fixed_activity",
              "tail_tol", "suite", "definetti", "t_range"},
             "config");
  RunConfig c;
  c.document = doc;
  try {
    if (doc.contains("n")) c.n = as_uint(doc["n"], "n");
    if (doc.contains("seed")) c.seed = as_uint(doc["seed"], "seed");
    if (doc.contains("trials")) c.trials = as_uint(doc["trials"], "trials");
    if (doc.contains("workers")) c.workers = as_u32(doc["workers"], "workers");
    if (doc.contains("t_max")) c.budget.t_max = as_uint(doc["t_max"], "t_max");
    if (doc.contains("early_abort")) c.budget.early_abort = as_bool(doc["early_abort"], "early_abort");
    if (doc.contains("fixed_codebook")) {
      c.fixed_codebook = as_bool(doc["fixed_codebook"], "fixed_codebook");
    }
    if (doc.contains("tail_tol")) c.tail_tol = as_double(doc["tail_tol"], "tail_tol");
    if (doc.contains("suite")) c.suite = as_bool(doc["suite"], "suite");
    if (c.n == 0) throw ConfigError("n: must be >= 1");
    if (c.trials == 0) throw ConfigError("trials: must be >= 1");
    if (c.workers == 0) throw ConfigError("workers: must be >= 1");
    if (c.budget.t_max == 0) throw ConfigError("t_max: must be >= 1");
    if (!(c.tail_tol > 0.0 && c.tail_tol < 1.0)) throw ConfigError("tail_tol: must lie in (0, 1)");

    if (doc.contains("definetti")) {
      const auto& d = doc["definetti"];
      check_keys(d, {"d", "k", "trials", "grid_k_max", "grid_d_max"}, "definetti");
      if (d.contains("d")) c.definetti.d = as_u32(d["d"], "definetti.d");
      if (d.contains("k")) c.definetti.k = as_u32(d["k"], "definetti.k");
      if (d.contains("trials")) c.definetti.trials = as_uint(d["trials"], "definetti.trials");
      if (d.contains("grid_k_max")) c.definetti.grid_k_max = as_u32(d["grid_k_max"], "definetti.grid_k_max");
      if (d.contains("grid_d_max")) c.definetti.grid_d_max = as_u32(d["grid_d_max"], "definetti.grid_d_max");
    }
    if (doc.contains("t_range")) {
      const auto range = as_u32s(doc["t_range"], "t_range");
      if (range.size() != 2 || range[0] == 0 || range[1] < range[0]) {
        throw ConfigError("t_range: expected [first, last] with 1 <= first <= last");
      }
      c.t_first = range[0];
      c.t_last = range[1];
    }

    if (doc.contains("source") && doc.contains("random_k")) {
      throw ConfigError("config: give either source or random_k, not both");
    }
    const json* g = doc.contains("generator") ? &doc["generator"] : nullptr;
    if (doc.contains("source")) {
      c.source = parse_source(doc["source"]);
      resolve_generator(c, g);
      if (!(c.generator->alphabet() == c.source->source->alphabet())) {
        throw ConfigError("generator: alphabet differs from the source alphabet");
      }
    } else if (doc.contains("random_k")) {
      Alphabet alphabet = Alphabet::range(0, 1);
      c.random_k = parse_random_k(doc["random_k"], alphabet);
      if (g == nullptr || (g->is_string() && g->get<std::string>() == "source-iid")) {
        c.generator = iid_generator(alphabet, c.random_k->symbol_pmf);
        c.generator_kind = "source-iid";
      } else if (g->is_object()) {
        c.generator = parse_mixture(*g, alphabet);
        c.generator_kind = "mixture";
      } else {
        throw ConfigError("generator: random_k supports source-iid or an explicit mixture");
      }
    } else if (g != nullptr) {
      if (!g->is_object()) throw ConfigError("generator: without a source give a mixture");
      c.generator = parse_mixture(*g, std::nullopt);
      c.generator_kind = "mixture";
    }
    if (doc.contains("fixed_activity")) {
      std::vector<std::uint64_t> a;
      for (auto v : as_u32s(doc["fixed_activity"], "fixed_activity")) a.push_back(v);
      ActivityPattern(a, c.n);
      c.fixed_activity = std::move(a);
    }
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(std::move(doc), overrides);
}

std::string RunConfig::hash() const {
  json d = document;
  d.erase("workers");
  return fnv1a_hex(d.dump());
}

SuiteCase RunConfig::suite_case() const {
  if (!source) throw ConfigError("this command needs a source");
  SuiteCase sc{source->kind, *source->source, *generator};
  sc.n = n;
  if (source->kind == "scheduling") {
    const bool auto_choice = source->slots == source->source->k()
                                 ? generator_kind == "auto-urn"
                                 : generator_kind == "auto-extended-urn";
    if (auto_choice) {
      sc.family = Family::kScheduling;
      sc.slots = source->slots;
    }
  } else if (source->kind == "categorization" && generator_kind == "auto-urn") {
    sc.family = Family::kCategorization;
    sc.counts = source->counts;
  }
  return sc;
}

TrialPlan RunConfig::plan() const {
  if (!generator) throw ConfigError("this command needs a source or random_k");
  TrialPlan p{.name = source ? source->kind : std::string("random-k"),
              .source = source ? std::optional<ExchangeableSource>(*source->source) : std::nullopt,
              .random_k = random_k,
              .generator = *generator,
              .n = n,
              .trials = trials,
              .master_seed = seed,
              .budget = budget,
              .fixed_codebook = fixed_codebook,
              .fixed_activity = fixed_activity,
              .workers = workers};
  return p;
}

}  // namespace mra::cli
