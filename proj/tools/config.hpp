#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mra/codebook.hpp"
#include "mra/codec.hpp"
#include "mra/montecarlo.hpp"
#include "mra/sources.hpp"

namespace mra::cli {

using nlohmann::json;

// Schema violation or invalid parameters; exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SourceConfig {
  std::string kind;  // iid | scheduling | categorization | multinomial | urn | two-point | custom
  std::optional<ExchangeableSource> source;
  std::optional<ExtendableSource> extendable;  // scheduling and urn kinds
  std::uint32_t slots = 0;                     // scheduling b
  std::vector<std::uint32_t> counts;           // categorization
  std::vector<double> iid_p;                   // iid
  std::uint32_t resources = 0;                 // multinomial r
};

struct DefinettiConfig {
  std::uint32_t d = 3;
  std::uint32_t k = 2;
  std::size_t trials = 1000;
  std::uint32_t grid_k_max = 6;
  std::uint32_t grid_d_max = 10;
};

struct RunConfig {
  json document;  // after flag overrides
  std::optional<SourceConfig> source;
  std::optional<RandomK> random_k;
  std::optional<MixtureGeneratorSpec> generator;
  std::string generator_kind;  // auto-urn | auto-extended-urn | source-iid | marginal | mixture
  std::uint64_t n = 100;
  std::uint64_t seed = 1;
  std::size_t trials = 1000;
  unsigned workers = 1;
  EncodeBudget budget{};
  bool fixed_codebook = false;
  std::optional<std::vector<std::uint64_t>> fixed_activity;
  double tail_tol = kDefaultTailTolerance;
  bool suite = false;
  DefinettiConfig definetti;
  std::uint64_t t_first = 1;
  std::uint64_t t_last = 64;

  // FNV-1a of the canonical document without "workers", which never
  // changes any output.
  std::string hash() const;
  // The source as a suite case (family set only for automatic generators).
  SuiteCase suite_case() const;
  TrialPlan plan() const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<unsigned> workers;
};

// Validates `doc` against the schema; unknown fields are rejected.
RunConfig parse_config(json doc, const Overrides& overrides = {});
RunConfig load_config(const std::string& path, const Overrides& overrides = {});

}  // namespace mra::cli
